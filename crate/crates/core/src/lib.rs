//! Multi-agent, retrieval-augmented answering of multiple-choice clinical
//! questions, and the harness that evaluates it.
//!
//! * [`benchmark`]: questions, datasets, subspecialties, complexity profiles.
//! * [`gateway`]: chat and embedding endpoints (HTTP or scripted mock).
//! * [`knowledge`]: tokenizer, sliding-window chunker, exact cosine index.
//! * [`pipeline`]: the five-agent classify/interpret/retrieve/synthesize/validate loop.
//! * [`eval`]: answer extraction, metrics, exact statistics, breakdowns, reports.
//! * [`runner`]: config-driven runs with reproducible manifests.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod digest;
pub mod gateway;
pub mod knowledge;
pub mod pipeline;
pub mod eval;
pub mod runner;
