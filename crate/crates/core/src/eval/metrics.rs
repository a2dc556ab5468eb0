use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::pipeline::Termination;

/// Minimum accuracy counted as a pass.
pub const PASS_THRESHOLD: f64 = 0.65;
pub const DEFAULT_RAG_TOP_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RunMode {
    Base,
    Rag { top_k: usize },
    Agentic,
}

impl RunMode {
    pub fn name(&self) -> &'static str {
        match self {
            RunMode::Base => "base",
            RunMode::Rag { .. } => "rag",
            RunMode::Agentic => "agentic",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(RunMode::Base),
            "rag" => Ok(RunMode::Rag { top_k: DEFAULT_RAG_TOP_K }),
            "agentic" => Ok(RunMode::Agentic),
            other => Err(format!("unknown mode {other:?} (expected base, rag or agentic)")),
        }
    }
}

/// Outcome for one question. An unextractable answer or a failed run is incorrect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub question_id: String,
    pub predicted_index: Option<usize>,
    pub correct: bool,
    pub mode: RunMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub latency_ms: u64,
}

impl EvalResult {
    pub fn scored(question_id: &str, predicted_index: Option<usize>, correct_index: usize, mode: RunMode) -> Self {
        Self {
            question_id: question_id.to_string(),
            predicted_index,
            correct: predicted_index == Some(correct_index),
            mode,
            trace: None,
            termination: None,
            error: None,
            latency_ms: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub n: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    pub f1: f64,
    pub passes_threshold: bool,
}

impl MetricsRecord {
    pub fn from_counts(n_correct: usize, n: usize) -> Result<Self, EvalError> {
        if n == 0 {
            return Err(EvalError::EmptyResults);
        }
        assert!(n_correct <= n, "more correct answers than questions");
        let accuracy = n_correct as f64 / n as f64;
        Ok(Self { n, n_correct, accuracy, f1: f1_from_accuracy(accuracy)?, passes_threshold: passes(accuracy) })
    }
}

pub fn passes(accuracy: f64) -> bool {
    accuracy >= PASS_THRESHOLD
}

pub fn accuracy(results: &[EvalResult]) -> Result<f64, EvalError> {
    if results.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    Ok(results.iter().filter(|r| r.correct).count() as f64 / results.len() as f64)
}

/// F1 with precision fixed at one and recall equal to accuracy: `2a / (1 + a)`.
pub fn f1_from_accuracy(a: f64) -> Result<f64, EvalError> {
    if !(0.0..=1.0).contains(&a) {
        return Err(EvalError::DomainError(a));
    }
    Ok(2.0 * a / (1.0 + a))
}

pub fn metrics(results: &[EvalResult]) -> Result<MetricsRecord, EvalError> {
    MetricsRecord::from_counts(results.iter().filter(|r| r.correct).count(), results.len())
}
