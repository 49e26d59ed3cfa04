//! End-to-end question answering, evaluation and label emission.

mod dataset;
mod dot;

use std::io::Write;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64;

pub use dataset::{load_dataset, read_dataset, DataError, DatasetFormat, LoadOptions, QuestionInstance};
pub use dot::export_dot;

use crate::contextualize::{build_interpretation, ContextError, InterpretationParams};
use crate::extract::{extract_concepts, ExtractionConfig};
use crate::ibe::{
    rank_hypotheses, soft_labels, HypothesisScore, IbeError, SoftLabelRecord, DEFAULT_TEMPERATURE,
    DEFAULT_TIE_EPSILON,
};
use crate::kb::{KbError, SemanticNetwork};
use crate::pt::Configuration;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Ibe(#[from] IbeError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("invalid parameter: {0}")]
    Params(String),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code: 1 usage, 2 data, 3 index.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Params(_) | HarnessError::Ibe(IbeError::InvalidTemperature(_)) => 1,
            HarnessError::Kb(_) | HarnessError::Context(ContextError::Kb(_)) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnswerParams {
    /// Cues per evidence-hypothesis pair.
    pub k: usize,
    pub temperature: f64,
    /// Bond evidence concepts with each other as well.
    pub include_direct: bool,
    pub contextualize: bool,
    pub tie_epsilon: f64,
    pub extract_verbs: bool,
}

impl Default for AnswerParams {
    fn default() -> Self {
        AnswerParams {
            k: 3,
            temperature: DEFAULT_TEMPERATURE,
            include_direct: false,
            contextualize: true,
            tie_epsilon: DEFAULT_TIE_EPSILON,
            extract_verbs: true,
        }
    }
}

impl AnswerParams {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(IbeError::InvalidTemperature(self.temperature).into());
        }
        if self.tie_epsilon.is_nan() || self.tie_epsilon < 0.0 {
            return Err(HarnessError::Params("tie epsilon must be non-negative".into()));
        }
        Ok(())
    }

    fn interpretation(&self) -> InterpretationParams {
        InterpretationParams {
            cues_per_pair: if self.contextualize { self.k } else { 0 },
            include_evidence_bonds: self.include_direct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub chosen: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold: Option<usize>,
    pub order: Vec<usize>,
    pub energies: Vec<f64>,
    pub grounded_energies: Vec<f64>,
    pub probs: Vec<f64>,
    pub tie_broken: bool,
    pub evidence_concepts: Vec<String>,
    pub choice_concepts: Vec<Vec<String>>,
    /// Choices scored as energy 0 because either side grounded nothing.
    pub degenerate: Vec<usize>,
    #[serde(skip)]
    pub configurations: Vec<Configuration>,
}

impl Prediction {
    pub fn correct(&self) -> Option<bool> {
        self.gold.map(|g| g == self.chosen)
    }

    pub fn soft_label(&self, temperature: f64) -> SoftLabelRecord {
        SoftLabelRecord {
            id: self.id.clone(),
            energies: self.energies.clone(),
            probs: self.probs.clone(),
            chosen: self.chosen,
            temperature,
            degenerate: self.degenerate.clone(),
        }
    }
}

/// A network plus the parameters and extraction tables needed to answer
/// questions against it.
pub struct Engine<'a> {
    net: &'a SemanticNetwork,
    params: AnswerParams,
    extraction: ExtractionConfig,
}

impl<'a> Engine<'a> {
    pub fn new(net: &'a SemanticNetwork, params: AnswerParams) -> Result<Self, HarnessError> {
        params.validate()?;
        let mut extraction = ExtractionConfig::default();
        extraction.extract_verbs = params.extract_verbs;
        Ok(Engine {
            net,
            params,
            extraction,
        })
    }

    pub fn with_extraction(mut self, extraction: ExtractionConfig) -> Self {
        self.extraction = extraction;
        self
    }

    pub fn network(&self) -> &SemanticNetwork {
        self.net
    }

    pub fn params(&self) -> &AnswerParams {
        &self.params
    }

    fn terms(&self, ids: &[crate::kb::ConceptId]) -> Vec<String> {
        ids.iter()
            .map(|&c| self.net.concept_term(c).unwrap_or("?").to_string())
            .collect()
    }

    pub fn answer(&self, q: &QuestionInstance) -> Result<Prediction, HarnessError> {
        q.validate()
            .map_err(|reason| DataError::MalformedRecord { index: 0, reason })?;
        let interp = self.params.interpretation();
        let evidence = extract_concepts(&q.context, self.net, &self.extraction);
        let mut scores = Vec::with_capacity(q.choices.len());
        let mut configurations = Vec::with_capacity(q.choices.len());
        let mut choice_concepts = Vec::with_capacity(q.choices.len());
        let mut degenerate = Vec::new();
        for (index, choice) in q.choices.iter().enumerate() {
            let hyp = extract_concepts(choice, self.net, &self.extraction);
            choice_concepts.push(self.terms(&hyp));
            let config = match build_interpretation(self.net, &evidence, &hyp, &interp) {
                Ok(c) => c,
                Err(ContextError::DegenerateInput) => {
                    degenerate.push(index);
                    crate::pt::ConfigurationBuilder::new().build()
                }
                Err(e) => return Err(e.into()),
            };
            scores.push(HypothesisScore {
                index,
                energy: config.energy(),
                grounded_energy: config.energy_grounded(),
                bond_count: config.bonds().len(),
            });
            configurations.push(config);
        }
        let ranking = rank_hypotheses(&scores, self.params.tie_epsilon)?;
        let energies: Vec<f64> = scores.iter().map(|s| s.energy).collect();
        let probs = soft_labels(&energies, self.params.temperature)?;
        Ok(Prediction {
            id: q.id.clone(),
            chosen: ranking.best(),
            gold: q.gold,
            tie_broken: ranking.tie_broken,
            order: ranking.order,
            grounded_energies: scores.iter().map(|s| s.grounded_energy).collect(),
            energies,
            probs,
            evidence_concepts: self.terms(&evidence),
            choice_concepts,
            degenerate,
            configurations,
        })
    }

    /// Answers every question in parallel; results keep input order.
    pub fn answer_all(&self, questions: &[QuestionInstance]) -> Vec<Result<Prediction, HarnessError>> {
        questions.par_iter().map(|q| self.answer(q)).collect()
    }
}

pub fn answer_question(
    net: &SemanticNetwork,
    q: &QuestionInstance,
    params: &AnswerParams,
) -> Result<Prediction, HarnessError> {
    Engine::new(net, *params)?.answer(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub answer: AnswerParams,
    /// Evaluate a uniform random subset of this size per repeat.
    pub limit: Option<usize>,
    pub seed: u64,
    pub repeats: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            answer: AnswerParams::default(),
            limit: None,
            seed: 0,
            repeats: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub loaded: usize,
    pub evaluated: usize,
    pub failed: usize,
    pub degenerate_evidence: usize,
    pub degenerate_choices: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
    pub questions_per_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub repeat_accuracies: Vec<f64>,
    /// Fraction of questions whose top two were within the tie epsilon.
    pub tie_rate: f64,
    /// Among questions with gold in the top two, the fraction whose top two
    /// had equal energy.
    pub indifference_rate: f64,
    pub counters: Counters,
    pub fingerprint: String,
    pub params: EvalParams,
    pub index_checksum: String,
    pub predictions: Vec<Prediction>,
    pub timing: Timing,
}

impl EvalReport {
    /// The report with wall-clock fields zeroed, for determinism checks.
    pub fn without_timing(&self) -> EvalReport {
        EvalReport {
            timing: Timing::default(),
            ..self.clone()
        }
    }
}

fn fingerprint(params: &EvalParams, checksum: u64, questions: &[QuestionInstance]) -> String {
    let mut data = serde_json::to_vec(params).expect("params serialize");
    data.extend_from_slice(&checksum.to_le_bytes());
    for q in questions {
        data.extend_from_slice(&serde_json::to_vec(q).expect("question serializes"));
    }
    format!("{:016x}", xxh3_64(&data))
}

/// Indices evaluated in one repeat, sorted.
pub fn subsample(n: usize, limit: Option<usize>, seed: u64) -> Vec<usize> {
    match limit {
        Some(m) if m < n => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = sample(&mut rng, n, m).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..n).collect(),
    }
}

pub fn evaluate(
    net: &SemanticNetwork,
    questions: &[QuestionInstance],
    params: &EvalParams,
) -> Result<EvalReport, HarnessError> {
    if params.repeats == 0 {
        return Err(HarnessError::Params("repeats must be at least 1".into()));
    }
    let engine = Engine::new(net, params.answer)?;
    let started = Instant::now();

    let mut counters = Counters {
        loaded: questions.len(),
        ..Default::default()
    };
    let mut predictions = Vec::new();
    let mut repeat_accuracies = Vec::with_capacity(params.repeats);
    let (mut correct, mut total, mut ties, mut top2, mut indifferent) = (0, 0, 0, 0, 0);
    for r in 0..params.repeats {
        let picked: Vec<&QuestionInstance> = subsample(questions.len(), params.limit, params.seed.wrapping_add(r as u64))
            .into_iter()
            .map(|i| &questions[i])
            .collect();
        if let Some(q) = picked.iter().find(|q| q.gold.is_none()) {
            return Err(DataError::MissingGold(q.id.clone()).into());
        }
        let results: Vec<_> = picked.par_iter().map(|q| engine.answer(q)).collect();
        let mut run_correct = 0;
        for res in results {
            total += 1;
            let p = match res {
                Ok(p) => p,
                Err(e) => {
                    log::warn!("question failed: {e}");
                    counters.failed += 1;
                    continue;
                }
            };
            counters.evaluated += 1;
            if p.evidence_concepts.is_empty() {
                counters.degenerate_evidence += 1;
            }
            counters.degenerate_choices += p.degenerate.len();
            if p.correct() == Some(true) {
                run_correct += 1;
            }
            if p.tie_broken {
                ties += 1;
            }
            let gold = p.gold.expect("checked above");
            if p.order[..2].contains(&gold) {
                top2 += 1;
                if p.energies[p.order[0]] == p.energies[p.order[1]] {
                    indifferent += 1;
                }
            }
            predictions.push(p);
        }
        correct += run_correct;
        repeat_accuracies.push(ratio(run_correct, picked.len()));
    }
    let seconds = started.elapsed().as_secs_f64();
    let checksum = net.checksum();
    Ok(EvalReport {
        accuracy: ratio(correct, total),
        correct,
        total,
        repeat_accuracies,
        tie_rate: ratio(ties, counters.evaluated),
        indifference_rate: ratio(indifferent, top2),
        counters,
        fingerprint: fingerprint(params, checksum, questions),
        params: *params,
        index_checksum: format!("{checksum:016x}"),
        predictions,
        timing: Timing {
            seconds,
            questions_per_second: if seconds > 0.0 { total as f64 / seconds } else { 0.0 },
        },
    })
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Writes one soft-label JSON line per question; returns the number
/// written. A question that fails is logged and skipped.
pub fn emit_labels<W: Write>(
    net: &SemanticNetwork,
    questions: &[QuestionInstance],
    params: &AnswerParams,
    out: &mut W,
) -> Result<usize, HarnessError> {
    let engine = Engine::new(net, *params)?;
    let mut written = 0;
    for res in engine.answer_all(questions) {
        match res {
            Ok(p) => {
                serde_json::to_writer(&mut *out, &p.soft_label(params.temperature))
                    .map_err(std::io::Error::from)?;
                out.write_all(b"\n")?;
                written += 1;
            }
            Err(e) => log::warn!("skipping question: {e}"),
        }
    }
    out.flush()?;
    Ok(written)
}
