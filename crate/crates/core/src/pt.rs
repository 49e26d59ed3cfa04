//! Pattern-theory interpretations: generators, bonds and configurations,
//! with their energies.
//!
//! A bond's energy is `tanh(phi)` where `phi` is the signed strength of the
//! underlying assertion; a configuration's energy is the negated sum of its
//! bond energies, so lower energy means a more probable interpretation
//! (`P(c) ∝ exp(-E(c))`). The total splits into a grounded part (bonds
//! between concepts observed in the text) and an ungrounded part (bonds
//! touching at least one contextual cue).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{ConceptId, RelationId, SemanticNetwork};

#[derive(Debug, Error, PartialEq)]
pub enum PtError {
    #[error("non-finite assertion strength {0}")]
    NonFiniteInput(f64),
    #[error("generator index {0} out of range")]
    UnknownGenerator(usize),
    #[error("bond from hypothesis level to evidence level")]
    PosetViolation,
    #[error("bond endpoints must differ")]
    SelfBond,
    #[error("bond re-added with a different strength")]
    ConflictingBond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grounding {
    Grounded,
    Ungrounded,
}

/// Level in the two-level partial order, plus the cue level for
/// contextual generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Evidence,
    Hypothesis,
    Cue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub concept: ConceptId,
    pub grounding: Grounding,
    pub level: Level,
}

impl Generator {
    pub fn evidence(concept: ConceptId) -> Self {
        Generator {
            concept,
            grounding: Grounding::Grounded,
            level: Level::Evidence,
        }
    }

    pub fn hypothesis(concept: ConceptId) -> Self {
        Generator {
            concept,
            grounding: Grounding::Grounded,
            level: Level::Hypothesis,
        }
    }

    pub fn cue(concept: ConceptId) -> Self {
        Generator {
            concept,
            grounding: Grounding::Ungrounded,
            level: Level::Cue,
        }
    }

    pub fn is_grounded(&self) -> bool {
        self.grounding == Grounding::Grounded
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub from: usize,
    pub to: usize,
    pub relation: RelationId,
    pub phi: f64,
    /// `tanh(phi)`
    pub energy: f64,
    /// Number of evidence-hypothesis pairs this bond serves. A cue shared
    /// by several pairs keeps one bond per edge, counted once per pair.
    pub multiplicity: u32,
}

impl Bond {
    pub fn weighted_energy(&self) -> f64 {
        self.energy * self.multiplicity as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergySplit {
    pub total: f64,
    /// Bonds whose endpoints are both grounded.
    pub grounded: f64,
    /// Bonds with at least one ungrounded endpoint.
    pub ungrounded: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Configuration {
    generators: Vec<Generator>,
    bonds: Vec<Bond>,
    energy_grounded: f64,
    energy_ungrounded: f64,
}

/// Energy of a single bond.
pub fn bond_energy(phi: f64) -> Result<f64, PtError> {
    if phi.is_finite() {
        Ok(phi.tanh())
    } else {
        Err(PtError::NonFiniteInput(phi))
    }
}

/// Recomputes a configuration's energy from its bonds.
pub fn config_energy(c: &Configuration) -> EnergySplit {
    let mut grounded = 0.0;
    let mut ungrounded = 0.0;
    for b in &c.bonds {
        if c.bond_is_grounded(b) {
            grounded -= b.weighted_energy();
        } else {
            ungrounded -= b.weighted_energy();
        }
    }
    EnergySplit {
        total: grounded + ungrounded,
        grounded,
        ungrounded,
    }
}

/// Log of the unnormalized configuration probability.
pub fn config_log_weight(energy: f64) -> f64 {
    -energy
}

impl Configuration {
    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn energy(&self) -> f64 {
        self.energy_grounded + self.energy_ungrounded
    }

    pub fn energy_grounded(&self) -> f64 {
        self.energy_grounded
    }

    pub fn energy_ungrounded(&self) -> f64 {
        self.energy_ungrounded
    }

    pub fn split(&self) -> EnergySplit {
        EnergySplit {
            total: self.energy(),
            grounded: self.energy_grounded,
            ungrounded: self.energy_ungrounded,
        }
    }

    pub fn bond_is_grounded(&self, b: &Bond) -> bool {
        self.generators[b.from].is_grounded() && self.generators[b.to].is_grounded()
    }

    pub fn is_empty(&self) -> bool {
        self.bonds.is_empty()
    }

    pub fn cue_count(&self) -> usize {
        self.generators.iter().filter(|g| !g.is_grounded()).count()
    }

    pub fn to_document(&self, net: &SemanticNetwork) -> ConfigurationDocument {
        let term = |id: ConceptId| net.concept_uri(id).unwrap_or("?").to_string();
        ConfigurationDocument {
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorDoc {
                    concept: term(g.concept),
                    grounding: g.grounding,
                    level: g.level,
                })
                .collect(),
            bonds: self
                .bonds
                .iter()
                .map(|b| BondDoc {
                    from: b.from,
                    to: b.to,
                    relation: net.relation_label(b.relation).to_string(),
                    phi: b.phi,
                    energy: b.energy,
                    multiplicity: b.multiplicity,
                })
                .collect(),
            energy: self.split(),
        }
    }
}

/// JSON form of a configuration with concepts and relations spelled out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationDocument {
    pub generators: Vec<GeneratorDoc>,
    pub bonds: Vec<BondDoc>,
    pub energy: EnergySplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDoc {
    pub concept: String,
    pub grounding: Grounding,
    pub level: Level,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondDoc {
    pub from: usize,
    pub to: usize,
    pub relation: String,
    pub phi: f64,
    pub energy: f64,
    pub multiplicity: u32,
}

/// Assembles a [`Configuration`], deduplicating generators by
/// (concept, level) and bonds by (from, to, relation).
#[derive(Debug, Default, Clone)]
pub struct ConfigurationBuilder {
    generators: Vec<Generator>,
    generator_index: HashMap<(ConceptId, Level), usize>,
    bonds: Vec<Bond>,
    bond_index: HashMap<(usize, usize, RelationId), usize>,
}

impl ConfigurationBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_generator(&mut self, g: Generator) -> usize {
        *self
            .generator_index
            .entry((g.concept, g.level))
            .or_insert_with(|| {
                self.generators.push(g);
                self.generators.len() - 1
            })
    }

    pub fn generator(&self, index: usize) -> Option<&Generator> {
        self.generators.get(index)
    }

    /// Adds a bond or, if the same (from, to, relation) bond exists, raises
    /// its multiplicity. Returns the bond's index.
    pub fn add_bond(
        &mut self,
        from: usize,
        to: usize,
        relation: RelationId,
        phi: f64,
    ) -> Result<usize, PtError> {
        let (gf, gt) = match (self.generators.get(from), self.generators.get(to)) {
            (Some(f), Some(t)) => (f, t),
            (None, _) => return Err(PtError::UnknownGenerator(from)),
            (_, None) => return Err(PtError::UnknownGenerator(to)),
        };
        if from == to {
            return Err(PtError::SelfBond);
        }
        if gf.level == Level::Hypothesis && gt.level == Level::Evidence {
            return Err(PtError::PosetViolation);
        }
        let energy = bond_energy(phi)?;
        if let Some(&i) = self.bond_index.get(&(from, to, relation)) {
            if self.bonds[i].phi != phi {
                return Err(PtError::ConflictingBond);
            }
            self.bonds[i].multiplicity += 1;
            return Ok(i);
        }
        self.bonds.push(Bond {
            from,
            to,
            relation,
            phi,
            energy,
            multiplicity: 1,
        });
        self.bond_index.insert((from, to, relation), self.bonds.len() - 1);
        Ok(self.bonds.len() - 1)
    }

    pub fn build(self) -> Configuration {
        let mut c = Configuration {
            generators: self.generators,
            bonds: self.bonds,
            energy_grounded: 0.0,
            energy_ungrounded: 0.0,
        };
        let split = config_energy(&c);
        c.energy_grounded = split.grounded;
        c.energy_ungrounded = split.ungrounded;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TANH_2: f64 = 0.964_027_580_075_816_9;
    const TANH_1: f64 = 0.761_594_155_955_764_9;

    #[test]
    fn bond_energy_reference_values() {
        assert_eq!(bond_energy(0.0).unwrap(), 0.0);
        assert!((bond_energy(2.0).unwrap() - TANH_2).abs() < 1e-15);
        assert!((bond_energy(-1.0).unwrap() + TANH_1).abs() < 1e-15);
        assert!(matches!(
            bond_energy(f64::NAN),
            Err(PtError::NonFiniteInput(_))
        ));
        assert!(bond_energy(f64::INFINITY).is_err());
    }

    fn two_grounded_bonds() -> Configuration {
        let mut b = ConfigurationBuilder::new();
        let e = b.add_generator(Generator::evidence(ConceptId(0)));
        let h = b.add_generator(Generator::hypothesis(ConceptId(1)));
        let h2 = b.add_generator(Generator::hypothesis(ConceptId(2)));
        b.add_bond(e, h, RelationId(0), 2.0).unwrap();
        b.add_bond(e, h2, RelationId(0), 1.0).unwrap();
        b.build()
    }

    #[test]
    fn energy_of_grounded_bonds() {
        let c = two_grounded_bonds();
        let split = config_energy(&c);
        assert!((split.total - -(TANH_2 + TANH_1)).abs() < 1e-12);
        assert!((split.total - -1.7256).abs() < 1e-4);
        assert_eq!(split.ungrounded, 0.0);
        assert_eq!(split, c.split());
    }

    #[test]
    fn zero_bonds_zero_energy() {
        let c = ConfigurationBuilder::new().build();
        assert_eq!(c.energy(), 0.0);
        assert_eq!(config_energy(&c).total, 0.0);
    }

    #[test]
    fn cue_bond_is_ungrounded() {
        let mut b = ConfigurationBuilder::new();
        let e = b.add_generator(Generator::evidence(ConceptId(0)));
        let h = b.add_generator(Generator::hypothesis(ConceptId(1)));
        let k = b.add_generator(Generator::cue(ConceptId(2)));
        b.add_bond(e, h, RelationId(0), 1.0).unwrap();
        b.add_bond(k, h, RelationId(0), 1.0).unwrap();
        let c = b.build();
        assert!((c.energy_grounded() + TANH_1).abs() < 1e-15);
        assert!((c.energy_ungrounded() + TANH_1).abs() < 1e-15);
    }

    #[test]
    fn log_weight_orders_by_energy() {
        assert_eq!(config_log_weight(0.0), 0.0);
        assert_eq!(config_log_weight(-1.7256), 1.7256);
        assert!(config_log_weight(-2.0) > config_log_weight(-1.0));
    }

    #[test]
    fn builder_dedups_and_checks_poset() {
        let mut b = ConfigurationBuilder::new();
        let e = b.add_generator(Generator::evidence(ConceptId(0)));
        assert_eq!(b.add_generator(Generator::evidence(ConceptId(0))), e);
        let h = b.add_generator(Generator::hypothesis(ConceptId(0)));
        assert_ne!(e, h);
        let k = b.add_generator(Generator::cue(ConceptId(5)));
        assert_eq!(b.add_bond(h, e, RelationId(0), 1.0), Err(PtError::PosetViolation));
        assert_eq!(b.add_bond(e, e, RelationId(0), 1.0), Err(PtError::SelfBond));
        assert_eq!(b.add_bond(e, 9, RelationId(0), 1.0), Err(PtError::UnknownGenerator(9)));
        let first = b.add_bond(e, k, RelationId(1), 1.0).unwrap();
        let again = b.add_bond(e, k, RelationId(1), 1.0).unwrap();
        assert_eq!(first, again);
        let c = b.build();
        assert_eq!(c.bonds().len(), 1);
        assert_eq!(c.bonds()[0].multiplicity, 2);
        assert!((c.energy() + 2.0 * TANH_1).abs() < 1e-15);
    }

    type Spec = (Vec<Level>, Vec<f64>, Vec<(usize, usize)>);

    /// Generator levels, a strength per ordered generator pair, and a bond
    /// list over those pairs (repeats allowed, which exercises merging).
    fn arb_config() -> impl Strategy<Value = Spec> {
        let levels = prop::collection::vec(
            prop_oneof![Just(Level::Evidence), Just(Level::Hypothesis), Just(Level::Cue)],
            2..10,
        );
        levels.prop_flat_map(|levels| {
            let n = levels.len();
            let phis = prop::collection::vec(-5.0f64..5.0, n * n);
            let bonds = prop::collection::vec((0..n, 0..n), 0..30);
            (Just(levels), phis, bonds)
        })
    }

    fn build(levels: &[Level], phis: &[f64], bonds: &[(usize, usize)]) -> (Configuration, Vec<f64>) {
        let n = levels.len();
        let mut b = ConfigurationBuilder::new();
        for (i, l) in levels.iter().enumerate() {
            let c = ConceptId(i as u32);
            b.add_generator(match l {
                Level::Evidence => Generator::evidence(c),
                Level::Hypothesis => Generator::hypothesis(c),
                Level::Cue => Generator::cue(c),
            });
        }
        let mut accepted = Vec::new();
        for &(f, t) in bonds {
            let phi = phis[f * n + t];
            if b.add_bond(f, t, RelationId(((f + t) % 3) as u16), phi).is_ok() {
                accepted.push(phi);
            }
        }
        (b.build(), accepted)
    }

    proptest! {
        #[test]
        fn tanh_is_odd_and_bounded(x in -50.0f64..50.0) {
            let (p, n) = (bond_energy(x).unwrap(), bond_energy(-x).unwrap());
            prop_assert!((p + n).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&p));
        }

        #[test]
        fn tanh_strictly_increasing(x in -15.0f64..15.0, dx in 1e-3f64..5.0) {
            prop_assert!(bond_energy(x + dx).unwrap() > bond_energy(x).unwrap());
        }

        #[test]
        fn energy_is_additive_and_partitioned((levels, phis, bonds) in arb_config()) {
            let (c, accepted) = build(&levels, &phis, &bonds);
            let direct: f64 = -accepted.iter().map(|p| p.tanh()).sum::<f64>();
            prop_assert!((c.energy() - direct).abs() < 1e-12);
            let s = config_energy(&c);
            prop_assert_eq!(s.grounded + s.ungrounded, s.total);
            prop_assert_eq!(c.energy_grounded() + c.energy_ungrounded(), c.energy());
        }

        #[test]
        fn appending_a_bond_moves_energy_by_its_sign(
            (levels, phis, bonds) in arb_config(),
            phi in prop_oneof![0.01f64..3.0, -3.0f64..-0.01],
        ) {
            let (before, _) = build(&levels, &phis, &bonds);
            let mut b = ConfigurationBuilder::new();
            for g in before.generators() {
                b.add_generator(*g);
            }
            for bond in before.bonds() {
                for _ in 0..bond.multiplicity {
                    b.add_bond(bond.from, bond.to, bond.relation, bond.phi).unwrap();
                }
            }
            let x = b.add_generator(Generator::cue(ConceptId(1000)));
            b.add_bond(0, x, RelationId(99), phi).unwrap();
            let after = b.build();
            if phi > 0.0 {
                prop_assert!(after.energy() < before.energy());
            } else {
                prop_assert!(after.energy() > before.energy());
            }
        }

        #[test]
        fn energy_ignores_bond_order((levels, phis, bonds) in arb_config(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let (c, _) = build(&levels, &phis, &bonds);
            let mut shuffled = bonds.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let (d, _) = build(&levels, &phis, &shuffled);
            prop_assert!((c.energy() - d.energy()).abs() < 1e-12);
        }
    }
}
