use std::io::Write;

use abduce_core::contextualize::{
    brute_force_best_interpretation, build_interpretation, InterpretationParams,
};
use abduce_core::fixtures;
use abduce_core::harness::{
    answer_question, emit_labels, evaluate, load_dataset, AnswerParams, DatasetFormat, EvalParams,
    LoadOptions, QuestionInstance,
};
use abduce_core::kb::{
    build_network, load_index, open_dump, persist_index, Aggregation, ConceptId, IngestConfig,
    NetworkBuilder, SemanticNetwork,
};
use flate2::write::GzEncoder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gzipped_dump_to_index_to_answer() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("assertions.csv.gz");
    let mut gz = GzEncoder::new(std::fs::File::create(&dump).unwrap(), flate2::Compression::fast());
    gz.write_all(fixtures::TEN_LINE_DUMP.as_bytes()).unwrap();
    gz.finish().unwrap();

    let (net, report) = build_network(open_dump(&dump).unwrap(), &IngestConfig::default()).unwrap();
    assert_eq!(report.lines, 10);
    assert_eq!(report.retained, 7);
    assert_eq!(report.skipped_language, 2);
    assert_eq!(report.skipped_self_loops, 1);

    let idx = dir.path().join("net.idx");
    persist_index(&net, &idx).unwrap();
    let net = load_index(&idx).unwrap();
    let q = QuestionInstance {
        id: "t".into(),
        context: "The woman sat at the piano.".into(),
        choices: vec!["She began to sing.".into(), "It was quiet.".into()],
        gold: None,
    };
    let p = answer_question(&net, &q, &AnswerParams::default()).unwrap();
    // person links woman to sing; piano NotCapableOf sing pulls the other way
    let t = |x: f64| x.tanh();
    let expected = -(t(2.0) + t(1.5)) + t(1.0);
    assert!((p.energies[0] - expected).abs() < 1e-12, "{:?}", p.energies);
    assert_eq!(p.energies[1], 0.0);
    assert_eq!(p.chosen, 0);
}

/// Two evidence concepts and one hypothesis with no direct edges, plus
/// eight intermediates each randomly linked to some of them.
fn cue_rich(rng: &mut ChaCha8Rng) -> (SemanticNetwork, Vec<ConceptId>, Vec<ConceptId>) {
    let mut b = NetworkBuilder::new("en", Aggregation::Max);
    let rels = ["RelatedTo", "IsA", "AtLocation"];
    for i in 0..8 {
        let x = format!("x{i}");
        for end in ["e0", "e1", "h"] {
            if rng.gen_bool(0.7) {
                let w = rng.gen_range(-2.0..2.0);
                let rel = rels[rng.gen_range(0..rels.len())];
                if rng.gen_bool(0.5) {
                    b.add_assertion(end, &x, rel, w).unwrap();
                } else {
                    b.add_assertion(&x, end, rel, w).unwrap();
                }
            }
        }
    }
    for c in ["e0", "e1", "h"] {
        b.concept(c);
    }
    let net = b.build().unwrap();
    let id = |t: &str| net.lookup_phrase(t).unwrap();
    let (ev, hyp) = (vec![id("e0"), id("e1")], vec![id("h")]);
    (net, ev, hyp)
}

#[test]
fn cue_rich_networks_match_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut truncated = 0;
    for _ in 0..150 {
        let (net, ev, hyp) = cue_rich(&mut rng);
        for k in 1..=3 {
            let p = InterpretationParams {
                cues_per_pair: k,
                ..Default::default()
            };
            let brute = brute_force_best_interpretation(&net, &ev, &hyp, &p).unwrap();
            let fast = build_interpretation(&net, &ev, &hyp, &p).unwrap();
            assert!(
                (fast.energy() - brute.energy()).abs() < 1e-9,
                "k={k}: {} vs {}",
                fast.energy(),
                brute.energy()
            );
            let all = build_interpretation(
                &net,
                &ev,
                &hyp,
                &InterpretationParams {
                    cues_per_pair: usize::MAX,
                    ..p
                },
            )
            .unwrap();
            if all.cue_count() > fast.cue_count() {
                truncated += 1;
            }
        }
    }
    // the cut at k must actually have been exercised
    assert!(truncated >= 100, "only {truncated} truncated instances");
}

fn corpus_file(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("qs.jsonl");
    let mut lines = vec![serde_json::to_string(&fixtures::piano_question()).unwrap()];
    lines.push(r#"{"id":"b","context":"A car.","choices":["a vehicle","music"],"gold":0}"#.into());
    lines.push(r#"{"id":"c","context":"The the the.","choices":["of","and"],"gold":1}"#.into());
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

#[test]
fn labels_from_a_dataset_file() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixtures::piano_network();
    let qs = load_dataset(&corpus_file(dir.path()), DatasetFormat::Generic, &LoadOptions::default()).unwrap();
    let mut buf = Vec::new();
    assert_eq!(emit_labels(&net, &qs, &AnswerParams::default(), &mut buf).unwrap(), 3);
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["chosen"], 2);
    assert_eq!(lines[1]["chosen"], 0);
    // nothing grounds in the third question: uniform with a flag
    assert_eq!(lines[2]["probs"], serde_json::json!([0.5, 0.5]));
    assert_eq!(lines[2]["degenerate"], serde_json::json!([0, 1]));
    assert!(lines[0].get("degenerate").is_none());
}

#[test]
fn batch_order_does_not_change_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixtures::piano_network();
    let mut qs = load_dataset(&corpus_file(dir.path()), DatasetFormat::Generic, &LoadOptions::default()).unwrap();
    let forward = evaluate(&net, &qs, &EvalParams::default()).unwrap();
    qs.reverse();
    let backward = evaluate(&net, &qs, &EvalParams::default()).unwrap();
    assert_eq!(forward.accuracy, backward.accuracy);
    for p in &forward.predictions {
        let q = backward.predictions.iter().find(|b| b.id == p.id).unwrap();
        assert_eq!(p, q);
    }
    // the degenerate question is decided by the tie rule and misses gold
    assert_eq!(forward.correct, 2);
    assert!((forward.tie_rate - 1.0 / 3.0).abs() < 1e-15);
}
