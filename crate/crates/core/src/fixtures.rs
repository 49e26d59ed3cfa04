//! Small hand-built networks and questions shared by unit tests, the
//! integration suites and the CLI tests.

use crate::harness::QuestionInstance;
use rand::seq::index::sample;
use rand::Rng;

use crate::kb::{build_network, Aggregation, ConceptId, IngestConfig, NetworkBuilder, SemanticNetwork};

/// Ten dump records: seven retained English assertions (one negative
/// relation, one multiword concept, one sense-tagged URI), two
/// non-English records and one self-loop.
pub const TEN_LINE_DUMP: &str = concat!(
    "/a/[/r/IsA/,/c/en/piano/n/,/c/en/instrument/]\t/r/IsA\t/c/en/piano/n\t/c/en/instrument\t{\"dataset\": \"/d/wordnet/3.1\", \"license\": \"cc:by/4.0\", \"sources\": [{\"contributor\": \"/s/resource/wordnet/rdf/3.1\"}], \"weight\": 2.0}\n",
    "/a/[/r/UsedFor/,/c/en/piano/,/c/en/music/]\t/r/UsedFor\t/c/en/piano\t/c/en/music\t{\"dataset\": \"/d/conceptnet/4/en\", \"license\": \"cc:by/4.0\", \"sources\": [{\"activity\": \"/s/activity/omcs/omcs1_possibly_free_text\", \"contributor\": \"/s/contributor/omcs/bugmenot\"}], \"surfaceEnd\": \"music\", \"surfaceStart\": \"a piano\", \"surfaceText\": \"[[a piano]] is used for [[music]]\", \"weight\": 1.0}\n",
    "/a/[/r/IsA/,/c/en/woman/,/c/en/person/]\t/r/IsA\t/c/en/woman\t/c/en/person\t{\"dataset\": \"/d/conceptnet/4/en\", \"license\": \"cc:by/4.0\", \"weight\": 2.0}\n",
    "/a/[/r/CapableOf/,/c/en/person/,/c/en/sing/]\t/r/CapableOf\t/c/en/person\t/c/en/sing\t{\"dataset\": \"/d/conceptnet/4/en\", \"license\": \"cc:by/4.0\", \"weight\": 1.5}\n",
    "/a/[/r/NotCapableOf/,/c/en/piano/,/c/en/sing/]\t/r/NotCapableOf\t/c/en/piano\t/c/en/sing\t{\"dataset\": \"/d/conceptnet/4/en\", \"license\": \"cc:by/4.0\", \"weight\": 1.0}\n",
    "/a/[/r/Antonym/,/c/en/loud/a/,/c/en/quiet/]\t/r/Antonym\t/c/en/loud/a\t/c/en/quiet\t{\"dataset\": \"/d/wiktionary/en\", \"license\": \"cc:by-sa/4.0\", \"weight\": 0.5}\n",
    "/a/[/r/AtLocation/,/c/en/instrument/,/c/en/concert_hall/]\t/r/AtLocation\t/c/en/instrument\t/c/en/concert_hall\t{\"dataset\": \"/d/conceptnet/4/en\", \"license\": \"cc:by/4.0\", \"weight\": 1.0}\n",
    "/a/[/r/IsA/,/c/fr/piano/,/c/fr/instrument/]\t/r/IsA\t/c/fr/piano\t/c/fr/instrument\t{\"dataset\": \"/d/wiktionary/fr\", \"license\": \"cc:by-sa/4.0\", \"weight\": 1.0}\n",
    "/a/[/r/RelatedTo/,/c/en/piano/,/c/en/piano/n/]\t/r/RelatedTo\t/c/en/piano\t/c/en/piano/n\t{\"dataset\": \"/d/wiktionary/en\", \"license\": \"cc:by-sa/4.0\", \"weight\": 1.0}\n",
    "/a/[/r/Synonym/,/c/en/piano/,/c/ja/ピアノ/]\t/r/Synonym\t/c/en/piano\t/c/ja/ピアノ\t{\"dataset\": \"/d/wiktionary/ja\", \"license\": \"cc:by-sa/4.0\", \"weight\": 1.0}\n",
);

pub fn ten_line_network() -> SemanticNetwork {
    build_network(TEN_LINE_DUMP.as_bytes(), &IngestConfig::default())
        .expect("fixture ingests")
        .0
}

/// A mini-network shaped after the woman-at-the-piano interpretation:
/// `woman` and `piano` share no direct edge and are connected through
/// `person`, `instrument` and `music`.
pub fn piano_network() -> SemanticNetwork {
    let mut b = NetworkBuilder::new("en", Aggregation::Max);
    let edges: [(&str, &str, &str, f64); 11] = [
        ("woman", "person", "IsA", 2.0),
        ("woman", "music", "Desires", 1.0),
        ("woman", "kitchen", "AtLocation", 0.5),
        ("woman", "spider", "NotDesires", -1.0),
        ("person", "concert", "AtLocation", 1.0),
        ("piano", "instrument", "IsA", 2.0),
        ("piano", "music", "UsedFor", 1.0),
        ("instrument", "concert", "AtLocation", 1.0),
        ("concert", "music", "HasA", 1.5),
        ("play", "music", "RelatedTo", 1.0),
        ("car", "vehicle", "IsA", 2.0),
    ];
    for (s, e, r, w) in edges {
        b.add_assertion(s, e, r, w).expect("fixture edge");
    }
    b.concept("lighthouse");
    b.build().expect("fixture builds")
}

/// Four-way question over [`piano_network`]; the gold ending (index 2)
/// is the only one reachable from both evidence concepts through cues.
pub fn piano_question() -> QuestionInstance {
    QuestionInstance {
        id: "piano".into(),
        context: "A woman sits down at the piano.".into(),
        choices: vec![
            "She drives a car to work.".into(),
            "The spider scares her.".into(),
            "Soon the concert begins.".into(),
            "She walks into the kitchen.".into(),
        ],
        gold: Some(2),
    }
}

const RANDOM_RELATIONS: [&str; 5] = ["RelatedTo", "IsA", "AtLocation", "UsedFor", "Antonym"];

/// A random network of at most `max_concepts` concepts and `max_edges`
/// assertions with weights in [-2, 2], plus disjoint evidence and
/// hypothesis concept sets (1 to 3 each) and a cue budget in 0..=3.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_concepts: usize,
    max_edges: usize,
) -> (SemanticNetwork, Vec<ConceptId>, Vec<ConceptId>, usize) {
    let n = rng.gen_range(2..=max_concepts.max(2));
    let mut b = NetworkBuilder::new("en", Aggregation::Max);
    for i in 0..n {
        b.concept(&format!("c{i}"));
    }
    for _ in 0..rng.gen_range(0..=max_edges) {
        let s = rng.gen_range(0..n);
        let e = rng.gen_range(0..n);
        if s == e {
            continue;
        }
        let rel = RANDOM_RELATIONS[rng.gen_range(0..RANDOM_RELATIONS.len())];
        let w = rng.gen_range(-2.0..=2.0);
        b.add_assertion(&format!("c{s}"), &format!("c{e}"), rel, w)
            .expect("random edge");
    }
    let net = b.build().expect("random network builds");
    let n_ev = rng.gen_range(1..=3.min(n - 1));
    let n_hyp = rng.gen_range(1..=3.min(n - n_ev));
    let picked = sample(rng, n, n_ev + n_hyp);
    let ids: Vec<ConceptId> = picked
        .iter()
        .map(|i| net.lookup_phrase(&format!("c{i}")).expect("concept"))
        .collect();
    let k = rng.gen_range(0..=3);
    (net, ids[..n_ev].to_vec(), ids[n_ev..].to_vec(), k)
}
