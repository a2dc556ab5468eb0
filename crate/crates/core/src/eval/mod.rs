//! Evaluation: running a dataset in base, retrieval-augmented or agentic
//! mode, scoring, significance testing, stratified breakdowns and reports.

mod breakdown;
mod compare;
mod extract;
mod metrics;
mod report;
mod run;
mod stats;

pub use breakdown::{breakdown, correlations, BreakdownKey, BreakdownTable, CorrelationMatrix, GroupMetrics, PairCorrelation};
pub use compare::{compare_counts, compare_methods, ComparisonReport, ALPHA};
pub use extract::extract_choice;
pub use metrics::{
    accuracy, f1_from_accuracy, metrics, passes, EvalResult, MetricsRecord, RunMode, DEFAULT_RAG_TOP_K, PASS_THRESHOLD,
};
pub use report::{
    emit_report, fmt_real, render_metrics_json, round_sig, to_rounded_json, MetricsBlock, Report, ReportFormat,
    REPORT_SCHEMA_VERSION,
};
pub use run::{run_evaluation, EvalSetup};
pub use stats::{fisher_exact_two_sided, infer_counts, pearson, FISHER_RELATIVE_TOLERANCE};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("no results")]
    EmptyResults,
    #[error("value {0} outside [0, 1]")]
    DomainError(f64),
    #[error("contingency table has a zero margin")]
    ZeroMargin,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("no labeled questions")]
    NoLabeledQuestions,
    #[error("result for unknown question {0:?}")]
    UnknownQuestion(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("serialization: {0}")]
    Serialization(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
