//! Choosing among hypotheses: Bradley–Terry preferences, ranking with a
//! tie rule, and temperature-softened labels.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;
pub const DEFAULT_TEMPERATURE: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum IbeError {
    #[error("ranking needs at least two hypotheses, got {0}")]
    TooFewHypotheses(usize),
    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),
    #[error("hypothesis {0} has a non-finite energy")]
    NonFiniteEnergy(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisScore {
    pub index: usize,
    pub energy: f64,
    pub grounded_energy: f64,
    pub bond_count: usize,
}

/// Orders two hypotheses whose energies fall within the tie epsilon.
pub type TieBreaker = fn(&HypothesisScore, &HypothesisScore) -> Ordering;

/// More grounded support (lower grounded energy) first, then lower index.
pub fn grounded_support_first(a: &HypothesisScore, b: &HypothesisScore) -> Ordering {
    a.grounded_energy
        .total_cmp(&b.grounded_energy)
        .then(a.index.cmp(&b.index))
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let z = x.exp();
        z / (1.0 + z)
    }
}

/// Probability that the hypothesis with energy `e_i` beats the one with
/// `e_j`: `exp(-e_i) / (exp(-e_i) + exp(-e_j))`.
pub fn pairwise_preference(e_i: f64, e_j: f64) -> f64 {
    logistic(e_j - e_i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    /// Hypothesis indices, best first.
    pub order: Vec<usize>,
    /// `preferences[i][j]` = P(i beats j).
    pub preferences: Vec<Vec<f64>>,
    /// The top two were within the tie epsilon.
    pub tie_broken: bool,
}

impl Ranking {
    pub fn best(&self) -> usize {
        self.order[0]
    }
}

pub fn rank_hypotheses(scores: &[HypothesisScore], tie_epsilon: f64) -> Result<Ranking, IbeError> {
    rank_hypotheses_with(scores, tie_epsilon, grounded_support_first)
}

/// Sorts by ascending energy. Runs of energies whose neighbors differ by
/// less than `tie_epsilon` form one tie group, ordered by `tie_breaker`.
pub fn rank_hypotheses_with(
    scores: &[HypothesisScore],
    tie_epsilon: f64,
    tie_breaker: TieBreaker,
) -> Result<Ranking, IbeError> {
    if scores.len() < 2 {
        return Err(IbeError::TooFewHypotheses(scores.len()));
    }
    if let Some(bad) = scores.iter().position(|s| !s.energy.is_finite()) {
        return Err(IbeError::NonFiniteEnergy(bad));
    }
    let mut sorted: Vec<&HypothesisScore> = scores.iter().collect();
    sorted.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.index.cmp(&b.index)));

    let mut order = Vec::with_capacity(scores.len());
    let mut tie_broken = false;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end].energy - sorted[end - 1].energy < tie_epsilon {
            end += 1;
        }
        let group = &mut sorted[start..end];
        if start == 0 && group.len() > 1 {
            tie_broken = true;
        }
        group.sort_by(|a, b| tie_breaker(a, b));
        order.extend(group.iter().map(|s| s.index));
        start = end;
    }

    let preferences = scores
        .iter()
        .map(|a| {
            scores
                .iter()
                .map(|b| pairwise_preference(a.energy, b.energy))
                .collect()
        })
        .collect();
    Ok(Ranking {
        order,
        preferences,
        tie_broken,
    })
}

/// `softmax(-energies / temperature)`, computed with max subtraction.
pub fn soft_labels(energies: &[f64], temperature: f64) -> Result<Vec<f64>, IbeError> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(IbeError::InvalidTemperature(temperature));
    }
    if let Some(bad) = energies.iter().position(|e| !e.is_finite()) {
        return Err(IbeError::NonFiniteEnergy(bad));
    }
    let logits: Vec<f64> = energies.iter().map(|e| -e / temperature).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|q| (q - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|x| x / sum).collect())
}

/// One line of a soft-label file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftLabelRecord {
    pub id: String,
    pub energies: Vec<f64>,
    pub probs: Vec<f64>,
    pub chosen: usize,
    pub temperature: f64,
    /// Indices of choices that grounded no concepts.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<usize>,
}
