//! Contextualized interpretations.
//!
//! Evidence and hypothesis concepts that share a direct assertion are
//! bonded directly. A pair without one may instead be linked through
//! contextualization cues: concepts adjacent to both ends. Each cue contributes
//! `tanh(phi_ik) + tanh(phi_kj)` to the negated energy, independently per
//! pair, so taking the top-`k` positive-gain cues of every deficient pair
//! yields the minimum-energy configuration of the family.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{strongest, ConceptId, Direction, Edge, KbError, Phi, RelationId, SemanticNetwork};
use crate::pt::{bond_energy, Configuration, ConfigurationBuilder, Generator, PtError};

#[derive(Debug, Error)]
pub enum ContextError {
    #[error("evidence or hypothesis has no grounded concepts")]
    DegenerateInput,
    #[error("cue search needs two distinct concepts")]
    SameConcept,
    #[error("{0} candidate cues exceed the exhaustive-search limit of {MAX_BRUTE_FORCE_CANDIDATES}")]
    TooLarge(usize),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Pt(#[from] PtError),
}

/// Upper bound on total candidates for [`brute_force_best_interpretation`].
pub const MAX_BRUTE_FORCE_CANDIDATES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueBond {
    pub relation: RelationId,
    pub phi: f64,
    /// `Outgoing` when the assertion points from the pair side to the cue
    /// for the left bond, or from the cue to the pair side for the right.
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueCandidate {
    pub cue: ConceptId,
    /// Bond between the first concept of the pair and the cue.
    pub left: CueBond,
    /// Bond between the cue and the second concept of the pair.
    pub right: CueBond,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpretationParams {
    /// Cues kept per deficient evidence-hypothesis pair; 0 disables
    /// contextualization.
    pub cues_per_pair: usize,
    /// Also bond evidence concepts with each other. These bonds are the
    /// same for every hypothesis of a question.
    pub include_evidence_bonds: bool,
}

impl Default for InterpretationParams {
    fn default() -> Self {
        InterpretationParams {
            cues_per_pair: 3,
            include_evidence_bonds: false,
        }
    }
}

fn candidate(cue: ConceptId, left: Phi, right: Phi) -> CueCandidate {
    CueCandidate {
        cue,
        left: CueBond {
            relation: left.relation,
            phi: left.strength,
            direction: left.direction,
        },
        // `right` was looked up from the second concept's side; flip it so
        // the direction reads cue → second concept.
        right: CueBond {
            relation: right.relation,
            phi: right.strength,
            direction: right.direction.reverse(),
        },
        gain: left.strength.tanh() + right.strength.tanh(),
    }
}

fn runs(adj: &[Edge]) -> impl Iterator<Item = &[Edge]> {
    adj.chunk_by(|a, b| a.neighbor == b.neighbor)
}

fn by_gain(a: &CueCandidate, b: &CueCandidate) -> Ordering {
    b.gain.total_cmp(&a.gain).then(a.cue.cmp(&b.cue))
}

/// Every concept adjacent to both `a` and `b`, sorted by gain descending
/// then concept id. Empty when `a` and `b` are directly related.
fn all_cues(net: &SemanticNetwork, a: ConceptId, b: ConceptId) -> Result<Vec<CueCandidate>, ContextError> {
    if a == b {
        return Err(ContextError::SameConcept);
    }
    if net.phi(a, b)?.is_some() {
        return Ok(Vec::new());
    }
    let mut left = runs(net.neighbors(a)?).peekable();
    let mut right = runs(net.neighbors(b)?).peekable();
    let mut out = Vec::new();
    while let (Some(l), Some(r)) = (left.peek(), right.peek()) {
        let (ln, rn) = (l[0].neighbor, r[0].neighbor);
        match ln.cmp(&rn) {
            Ordering::Less => {
                left.next();
            }
            Ordering::Greater => {
                right.next();
            }
            Ordering::Equal => {
                if ln != a && ln != b {
                    let (lp, rp) = (strongest(l), strongest(r));
                    if let (Some(lp), Some(rp)) = (lp, rp) {
                        out.push(candidate(ln, lp, rp));
                    }
                }
                left.next();
                right.next();
            }
        }
    }
    out.sort_by(by_gain);
    Ok(out)
}

/// Up to `k` contextualization cues linking `a` and `b`.
pub fn find_cues(
    net: &SemanticNetwork,
    a: ConceptId,
    b: ConceptId,
    k: usize,
) -> Result<Vec<CueCandidate>, ContextError> {
    let mut cues = all_cues(net, a, b)?;
    cues.truncate(k);
    Ok(cues)
}

fn dedup(ids: &[ConceptId]) -> Vec<ConceptId> {
    let mut seen = HashSet::new();
    ids.iter().copied().filter(|c| seen.insert(*c)).collect()
}

struct Skeleton {
    builder: ConfigurationBuilder,
    evidence: Vec<(ConceptId, usize)>,
    hypothesis: Vec<(ConceptId, usize)>,
    grounded: HashSet<ConceptId>,
}

/// Generators plus the grounded bonds shared by every member of the family.
fn skeleton(
    net: &SemanticNetwork,
    evidence: &[ConceptId],
    hypothesis: &[ConceptId],
    params: &InterpretationParams,
) -> Result<Skeleton, ContextError> {
    if evidence.is_empty() || hypothesis.is_empty() {
        return Err(ContextError::DegenerateInput);
    }
    let mut builder = ConfigurationBuilder::new();
    let evidence: Vec<_> = dedup(evidence)
        .into_iter()
        .map(|c| (c, builder.add_generator(Generator::evidence(c))))
        .collect();
    let hypothesis: Vec<_> = dedup(hypothesis)
        .into_iter()
        .map(|c| (c, builder.add_generator(Generator::hypothesis(c))))
        .collect();
    let grounded = evidence.iter().chain(&hypothesis).map(|&(c, _)| c).collect();

    if params.include_evidence_bonds {
        for (i, &(a, ga)) in evidence.iter().enumerate() {
            for &(b, gb) in &evidence[i + 1..] {
                if let Some(phi) = net.phi(a, b)? {
                    let (from, to) = match phi.direction {
                        Direction::Outgoing => (ga, gb),
                        Direction::Incoming => (gb, ga),
                    };
                    builder.add_bond(from, to, phi.relation, phi.strength)?;
                }
            }
        }
    }
    for &(e, ge) in &evidence {
        for &(h, gh) in &hypothesis {
            if e == h {
                continue;
            }
            if let Some(phi) = net.phi(e, h)? {
                builder.add_bond(ge, gh, phi.relation, phi.strength)?;
            }
        }
    }
    Ok(Skeleton {
        builder,
        evidence,
        hypothesis,
        grounded,
    })
}

fn attach_cue(
    builder: &mut ConfigurationBuilder,
    pair: (usize, usize),
    c: &CueCandidate,
) -> Result<(), PtError> {
    let g = builder.add_generator(Generator::cue(c.cue));
    let (from, to) = match c.left.direction {
        Direction::Outgoing => (pair.0, g),
        Direction::Incoming => (g, pair.0),
    };
    builder.add_bond(from, to, c.left.relation, c.left.phi)?;
    let (from, to) = match c.right.direction {
        Direction::Outgoing => (g, pair.1),
        Direction::Incoming => (pair.1, g),
    };
    builder.add_bond(from, to, c.right.relation, c.right.phi)?;
    Ok(())
}

/// Builds the minimum-energy interpretation of `evidence` together with one
/// hypothesis.
pub fn build_interpretation(
    net: &SemanticNetwork,
    evidence: &[ConceptId],
    hypothesis: &[ConceptId],
    params: &InterpretationParams,
) -> Result<Configuration, ContextError> {
    let Skeleton {
        mut builder,
        evidence,
        hypothesis,
        grounded,
    } = skeleton(net, evidence, hypothesis, params)?;
    if params.cues_per_pair > 0 {
        for &(e, ge) in &evidence {
            for &(h, gh) in &hypothesis {
                if e == h {
                    continue;
                }
                let chosen = all_cues(net, e, h)?
                    .into_iter()
                    .filter(|c| c.gain > 0.0 && !grounded.contains(&c.cue))
                    .take(params.cues_per_pair);
                for c in chosen {
                    attach_cue(&mut builder, (ge, gh), &c)?;
                }
            }
        }
    }
    Ok(builder.build())
}

/// Exhaustive search over every admissible cue assignment: for each
/// deficient pair, any subset of at most `cues_per_pair` of its
/// intermediates, including negative-gain ones. Candidates are found by
/// scanning the whole network. Meant as a test oracle for
/// [`build_interpretation`].
pub fn brute_force_best_interpretation(
    net: &SemanticNetwork,
    evidence: &[ConceptId],
    hypothesis: &[ConceptId],
    params: &InterpretationParams,
) -> Result<Configuration, ContextError> {
    let base = skeleton(net, evidence, hypothesis, params)?;
    let k = params.cues_per_pair;

    let mut pairs: Vec<((usize, usize), Vec<CueCandidate>)> = Vec::new();
    if k > 0 {
        for &(e, ge) in &base.evidence {
            for &(h, gh) in &base.hypothesis {
                if e == h || net.phi(e, h)?.is_some() {
                    continue;
                }
                let mut options = Vec::new();
                for x in net.concepts() {
                    if x == e || x == h || base.grounded.contains(&x) {
                        continue;
                    }
                    if let (Some(l), Some(r)) = (net.phi(e, x)?, net.phi(h, x)?) {
                        options.push(candidate(x, l, r));
                    }
                }
                if !options.is_empty() {
                    pairs.push(((ge, gh), options));
                }
            }
        }
    }
    let total: usize = pairs.iter().map(|(_, o)| o.len()).sum();
    if total > MAX_BRUTE_FORCE_CANDIDATES {
        return Err(ContextError::TooLarge(total));
    }

    // one list of admissible subsets (as bitmasks) per pair
    let subsets: Vec<Vec<u32>> = pairs
        .iter()
        .map(|(_, o)| {
            (0u32..1 << o.len())
                .filter(|m| m.count_ones() as usize <= k)
                .collect()
        })
        .collect();

    let mut best: Option<Configuration> = None;
    let mut choice = vec![0usize; pairs.len()];
    loop {
        let mut builder = base.builder.clone();
        for (p, ((pair, options), masks)) in pairs.iter().zip(&subsets).enumerate() {
            let mask = masks[choice[p]];
            for (bit, c) in options.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    attach_cue(&mut builder, *pair, c)?;
                }
            }
        }
        let config = builder.build();
        if best.as_ref().is_none_or(|b| config.energy() < b.energy()) {
            best = Some(config);
        }
        // odometer increment over the per-pair subset lists
        let mut p = 0;
        loop {
            if p == choice.len() {
                return Ok(best.expect("at least one assignment"));
            }
            choice[p] += 1;
            if choice[p] < subsets[p].len() {
                break;
            }
            choice[p] = 0;
            p += 1;
        }
    }
}

/// Gain of a cue, recomputed through the energy calculus.
pub fn cue_gain(c: &CueCandidate) -> Result<f64, PtError> {
    Ok(bond_energy(c.left.phi)? + bond_energy(c.right.phi)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kb::{Aggregation, NetworkBuilder};
    use proptest::prelude::*;
    use rand::SeedableRng;

    const TANH_1: f64 = 0.761_594_155_955_764_9;

    fn id(net: &SemanticNetwork, term: &str) -> ConceptId {
        net.lookup_phrase(term).unwrap()
    }

    #[test]
    fn piano_cues_between_woman_and_concert() {
        let net = fixtures::piano_network();
        let cues = find_cues(&net, id(&net, "woman"), id(&net, "concert"), 3).unwrap();
        let names: Vec<_> = cues.iter().map(|c| net.concept_term(c.cue).unwrap()).collect();
        assert_eq!(names, ["person", "music"]);
        assert!((cues[0].gain - (2.0f64.tanh() + 1.0f64.tanh())).abs() < 1e-15);
        assert!((cues[1].gain - (1.0f64.tanh() + 1.5f64.tanh())).abs() < 1e-15);
        // concert HasA music: the right bond runs concert → music, i.e. into the cue
        assert_eq!(cues[1].right.direction, Direction::Incoming);
        assert_eq!(cues[0].left.direction, Direction::Outgoing);
    }

    #[test]
    fn woman_and_piano_meet_through_music() {
        let net = fixtures::piano_network();
        let cues = find_cues(&net, id(&net, "woman"), id(&net, "piano"), 3).unwrap();
        let names: Vec<_> = cues.iter().map(|c| net.concept_term(c.cue).unwrap()).collect();
        assert_eq!(names, ["music"]);
        for c in &cues {
            let t = net.concept_term(c.cue).unwrap();
            assert!(["person", "instrument", "music"].contains(&t));
        }
    }

    #[test]
    fn no_shared_neighbor_no_cues() {
        let net = fixtures::piano_network();
        assert!(find_cues(&net, id(&net, "car"), id(&net, "piano"), 3)
            .unwrap()
            .is_empty());
        assert!(matches!(
            find_cues(&net, id(&net, "car"), id(&net, "car"), 3),
            Err(ContextError::SameConcept)
        ));
    }

    #[test]
    fn direct_edge_blocks_cues() {
        let net = fixtures::piano_network();
        // piano and music share `play`-free neighbors but are directly related
        assert!(find_cues(&net, id(&net, "piano"), id(&net, "music"), 3)
            .unwrap()
            .is_empty());
    }

    /// Five intermediates between `a` and `b` with distinct gains.
    fn five_way() -> SemanticNetwork {
        let mut b = NetworkBuilder::new("en", Aggregation::Max);
        let weights = [(0.5, 0.5), (2.0, 1.0), (1.0, 0.1), (-1.0, 2.0), (1.5, 1.5)];
        for (i, (l, r)) in weights.iter().enumerate() {
            let k = format!("k{i}");
            b.add_assertion("a", &k, "RelatedTo", *l).unwrap();
            b.add_assertion(&k, "b", "RelatedTo", *r).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn top_k_by_gain_matches_enumeration() {
        let net = five_way();
        let (a, b) = (id(&net, "a"), id(&net, "b"));
        // brute-force the gains straight from phi lookups
        let mut expected: Vec<(f64, ConceptId)> = net
            .concepts()
            .filter(|&x| x != a && x != b)
            .filter_map(|x| {
                let l = net.phi(a, x).unwrap()?;
                let r = net.phi(x, b).unwrap()?;
                Some((l.strength.tanh() + r.strength.tanh(), x))
            })
            .collect();
        expected.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
        let got = find_cues(&net, a, b, 2).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(
            got.iter().map(|c| c.cue).collect::<Vec<_>>(),
            expected[..2].iter().map(|e| e.1).collect::<Vec<_>>()
        );
        assert_eq!(net.concept_term(got[0].cue).unwrap(), "k4");
        assert_eq!(net.concept_term(got[1].cue).unwrap(), "k1");
        for c in &got {
            assert_eq!(cue_gain(c).unwrap(), c.gain);
        }
    }

    #[test]
    fn ties_break_on_concept_id() {
        let mut b = NetworkBuilder::new("en", Aggregation::Max);
        for k in ["x", "y", "z"] {
            b.add_assertion("a", k, "RelatedTo", 1.0).unwrap();
            b.add_assertion(k, "b", "RelatedTo", 1.0).unwrap();
        }
        let net = b.build().unwrap();
        let got = find_cues(&net, id(&net, "a"), id(&net, "b"), 3).unwrap();
        let ids: Vec<_> = got.iter().map(|c| c.cue).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn direct_bond_only_interpretation() {
        let mut b = NetworkBuilder::new("en", Aggregation::Max);
        b.add_assertion("piano", "music", "UsedFor", 1.0).unwrap();
        b.add_assertion("woman", "person", "IsA", 2.0).unwrap();
        let net = b.build().unwrap();
        let c = build_interpretation(
            &net,
            &[id(&net, "woman"), id(&net, "piano")],
            &[id(&net, "music")],
            &InterpretationParams::default(),
        )
        .unwrap();
        assert_eq!(c.bonds().len(), 1);
        assert!((c.energy() + TANH_1).abs() < 1e-15);
        assert_eq!(c.energy_ungrounded(), 0.0);
    }

    #[test]
    fn unrelated_pair_gives_empty_configuration() {
        let mut b = NetworkBuilder::new("en", Aggregation::Max);
        b.concept("a");
        b.concept("b");
        let net = b.build().unwrap();
        let c = build_interpretation(
            &net,
            &[ConceptId(0)],
            &[ConceptId(1)],
            &InterpretationParams::default(),
        )
        .unwrap();
        assert!(c.is_empty());
        assert_eq!(c.energy(), 0.0);
    }

    #[test]
    fn empty_side_is_degenerate() {
        let net = fixtures::piano_network();
        let p = InterpretationParams::default();
        assert!(matches!(
            build_interpretation(&net, &[], &[ConceptId(0)], &p),
            Err(ContextError::DegenerateInput)
        ));
        assert!(matches!(
            build_interpretation(&net, &[ConceptId(0)], &[], &p),
            Err(ContextError::DegenerateInput)
        ));
    }

    #[test]
    fn piano_interpretation_shape() {
        let net = fixtures::piano_network();
        let c = build_interpretation(
            &net,
            &[id(&net, "woman"), id(&net, "piano")],
            &[id(&net, "concert")],
            &InterpretationParams::default(),
        )
        .unwrap();
        let mut cues: Vec<_> = c
            .generators()
            .iter()
            .filter(|g| !g.is_grounded())
            .map(|g| net.concept_term(g.concept).unwrap())
            .collect();
        cues.sort();
        assert_eq!(cues, ["instrument", "music", "person"]);
        assert_eq!(c.generators().len(), 6);
        // concert → music is shared by both pairs
        let shared = c
            .bonds()
            .iter()
            .find(|b| b.multiplicity == 2)
            .expect("shared bond");
        assert_eq!(net.relation_label(shared.relation), "HasA");
        let t = |x: f64| x.tanh();
        let expected = -((t(2.0) + t(1.0)) + (t(1.0) + t(1.5)) + (t(2.0) + t(1.0)) + (t(1.0) + t(1.5)));
        assert!((c.energy() - expected).abs() < 1e-12);
        assert_eq!(c.energy_grounded(), 0.0);
    }

    #[test]
    fn single_pair_k1_picks_max_gain() {
        let mut b = NetworkBuilder::new("en", Aggregation::Max);
        for (k, l, r) in [("x", 0.3, 0.3), ("y", 1.0, 1.0), ("z", 2.0, -1.5)] {
            b.add_assertion("a", k, "RelatedTo", l).unwrap();
            b.add_assertion(k, "b", "RelatedTo", r).unwrap();
        }
        let net = b.build().unwrap();
        let p = InterpretationParams {
            cues_per_pair: 1,
            ..Default::default()
        };
        let (a, bb) = ([id(&net, "a")], [id(&net, "b")]);
        let brute = brute_force_best_interpretation(&net, &a, &bb, &p).unwrap();
        let fast = build_interpretation(&net, &a, &bb, &p).unwrap();
        // subsets: {}, {x}, {y}, {z}; y has the largest gain 2 tanh(1)
        assert!((brute.energy() + 2.0 * TANH_1).abs() < 1e-12);
        assert_eq!(brute.energy(), fast.energy());
        let cue = fast.generators().iter().find(|g| !g.is_grounded()).unwrap();
        assert_eq!(net.concept_term(cue.concept).unwrap(), "y");
    }

    #[test]
    fn k_zero_is_direct_only() {
        let net = fixtures::piano_network();
        let p = InterpretationParams {
            cues_per_pair: 0,
            ..Default::default()
        };
        let ev = [id(&net, "woman"), id(&net, "piano")];
        let hyp = [id(&net, "kitchen")];
        let brute = brute_force_best_interpretation(&net, &ev, &hyp, &p).unwrap();
        let fast = build_interpretation(&net, &ev, &hyp, &p).unwrap();
        assert_eq!(fast.cue_count(), 0);
        assert_eq!(brute.energy(), fast.energy());
        assert!((fast.energy() + 0.5f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let mut b = NetworkBuilder::new("en", Aggregation::Max);
        for i in 0..21 {
            let k = format!("k{i}");
            b.add_assertion("a", &k, "RelatedTo", 1.0).unwrap();
            b.add_assertion(&k, "b", "RelatedTo", 1.0).unwrap();
        }
        let net = b.build().unwrap();
        let r = brute_force_best_interpretation(
            &net,
            &[id(&net, "a")],
            &[id(&net, "b")],
            &InterpretationParams::default(),
        );
        assert!(matches!(r, Err(ContextError::TooLarge(21))));
    }

    #[test]
    fn evidence_bonds_are_optional() {
        let net = fixtures::piano_network();
        let ev = [id(&net, "woman"), id(&net, "music")];
        let hyp = [id(&net, "car")];
        let off = build_interpretation(&net, &ev, &hyp, &InterpretationParams::default()).unwrap();
        let on = build_interpretation(
            &net,
            &ev,
            &hyp,
            &InterpretationParams {
                include_evidence_bonds: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(off.is_empty());
        assert_eq!(on.bonds().len(), 1);
        assert!((on.energy() + TANH_1).abs() < 1e-15);
    }

    #[test]
    fn grounded_concepts_are_never_cues() {
        let net = fixtures::piano_network();
        // person is both a cue candidate for (woman, concert) and a hypothesis concept
        let c = build_interpretation(
            &net,
            &[id(&net, "woman")],
            &[id(&net, "concert"), id(&net, "person")],
            &InterpretationParams::default(),
        )
        .unwrap();
        assert!(c
            .generators()
            .iter()
            .filter(|g| !g.is_grounded())
            .all(|g| net.concept_term(g.concept).unwrap() != "person"));
    }

    fn random_case(seed: u64) -> (SemanticNetwork, Vec<ConceptId>, Vec<ConceptId>, usize) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        fixtures::random_instance(&mut rng, 15, 40)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn greedy_matches_exhaustive(seed in any::<u64>()) {
            let (net, ev, hyp, k) = random_case(seed);
            let p = InterpretationParams { cues_per_pair: k, ..Default::default() };
            match brute_force_best_interpretation(&net, &ev, &hyp, &p) {
                Ok(brute) => {
                    let fast = build_interpretation(&net, &ev, &hyp, &p).unwrap();
                    prop_assert!((fast.energy() - brute.energy()).abs() < 1e-9);
                }
                Err(ContextError::TooLarge(_)) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }

        #[test]
        fn cues_are_legal(seed in any::<u64>()) {
            let (net, ev, hyp, k) = random_case(seed);
            let p = InterpretationParams { cues_per_pair: k, ..Default::default() };
            let c = build_interpretation(&net, &ev, &hyp, &p).unwrap();
            for (gi, g) in c.generators().iter().enumerate() {
                if g.is_grounded() {
                    continue;
                }
                let attached: Vec<ConceptId> = c
                    .bonds()
                    .iter()
                    .filter_map(|b| {
                        if b.from == gi { Some(c.generators()[b.to].concept) }
                        else if b.to == gi { Some(c.generators()[b.from].concept) }
                        else { None }
                    })
                    .collect();
                let legal = ev.iter().any(|&e| {
                    hyp.iter().any(|&h| {
                        e != h
                            && attached.contains(&e)
                            && attached.contains(&h)
                            && net.phi(e, h).unwrap().is_none()
                            && net.phi(e, g.concept).unwrap().is_some()
                            && net.phi(g.concept, h).unwrap().is_some()
                    })
                });
                prop_assert!(legal);
            }
        }

        #[test]
        fn contextualization_never_raises_energy(seed in any::<u64>()) {
            let (net, ev, hyp, k) = random_case(seed);
            let on = build_interpretation(&net, &ev, &hyp, &InterpretationParams { cues_per_pair: k, ..Default::default() }).unwrap();
            let off = build_interpretation(&net, &ev, &hyp, &InterpretationParams { cues_per_pair: 0, ..Default::default() }).unwrap();
            prop_assert!(on.energy() <= off.energy());
        }

        #[test]
        fn interpretation_is_deterministic(seed in any::<u64>()) {
            let (net, ev, hyp, k) = random_case(seed);
            let p = InterpretationParams { cues_per_pair: k, ..Default::default() };
            let a = build_interpretation(&net, &ev, &hyp, &p).unwrap();
            let b = build_interpretation(&net, &ev, &hyp, &p).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
