//! Depth-weighted error scores. Lower is better.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::gate::GateClass;

pub const DEFAULT_E1Q: f64 = 3.8e-4;
pub const DEFAULT_E2Q: f64 = 6.4e-3;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("{name} = {value} must lie in [0, 1)")]
    RateOutOfRange { name: &'static str, value: f64 },
    #[error("beta = {0} must be positive")]
    BadBeta(f64),
    #[error("baseline score is zero; cannot normalize")]
    ZeroBaseline,
    #[error("error model file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("error model file: {0}")]
    Io(#[from] std::io::Error),
}

/// Uniform per-gate error rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErrorModel {
    pub e1q: f64,
    pub e2q: f64,
    pub beta: f64,
    /// Count measurements as single-qubit operations at rate `e1q`.
    pub include_measure: bool,
}

impl Default for ErrorModel {
    fn default() -> Self {
        ErrorModel { e1q: DEFAULT_E1Q, e2q: DEFAULT_E2Q, beta: 1.0, include_measure: false }
    }
}

impl ErrorModel {
    pub fn validate(&self) -> Result<(), ScoreError> {
        for (name, value) in [("e1q", self.e1q), ("e2q", self.e2q)] {
            if !(0.0..1.0).contains(&value) {
                return Err(ScoreError::RateOutOfRange { name, value });
            }
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(ScoreError::BadBeta(self.beta));
        }
        Ok(())
    }

    /// Parses a TOML table with any of `e1q`, `e2q`, `beta`, `include_measure`.
    pub fn from_toml_str(text: &str) -> Result<Self, ScoreError> {
        let model: ErrorModel = toml::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScoreError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// `(N_1q, N_2q)` as counted by this model. Barriers never count.
    pub fn counts(&self, circuit: &Circuit) -> (usize, usize) {
        let counts = circuit.gate_counts();
        let mut n1 = counts.single_qubit();
        if self.include_measure {
            n1 += counts.get(GateClass::Measure);
        }
        (n1, counts.two_qubit())
    }
}

/// Gate-count-weighted mean error rate; 0 for a circuit with no counted gates.
pub fn avg_error(circuit: &Circuit, model: &ErrorModel) -> f64 {
    let (n1, n2) = model.counts(circuit);
    if n1 + n2 == 0 {
        return 0.0;
    }
    (model.e1q * n1 as f64 + model.e2q * n2 as f64) / (n1 + n2) as f64
}

/// `depth * avg_error`.
pub fn score_simplified(circuit: &Circuit, model: &ErrorModel) -> f64 {
    circuit.depth() as f64 * avg_error(circuit, model)
}

/// `beta * (1 - (1 - avg_error)^depth)`.
pub fn score_full(circuit: &Circuit, model: &ErrorModel) -> f64 {
    full_from_parts(avg_error(circuit, model), circuit.depth(), model.beta)
}

pub(crate) fn full_from_parts(avg: f64, depth: usize, beta: f64) -> f64 {
    // ln_1p/exp_m1 keep precision when avg * depth is tiny
    -beta * (depth as f64 * (-avg).ln_1p()).exp_m1()
}

/// Simplified score of `transpiled` relative to `original`.
pub fn normalized_score(transpiled: &Circuit, original: &Circuit, model: &ErrorModel) -> Result<f64, ScoreError> {
    let base = score_simplified(original, model);
    if base == 0.0 {
        return Err(ScoreError::ZeroBaseline);
    }
    Ok(score_simplified(transpiled, model) / base)
}

/// Gate count, depth and simplified score of one circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub n_gate: usize,
    pub depth: usize,
    pub score: f64,
}

impl Metrics {
    pub fn of(circuit: &Circuit, model: &ErrorModel) -> Self {
        Metrics { n_gate: circuit.num_gates(), depth: circuit.depth(), score: score_simplified(circuit, model) }
    }
}
