//! Multi-agent question answering over a workspace: complexity classification,
//! query generation, iterative retrieval, evidence synthesis, and a validation
//! loop that can send the answer back for another round.

mod agents;
mod config;
mod controller;
mod json;
mod retrieval;
mod schema;
mod templates;
mod trace;
mod workspace;

pub use agents::{
    classify_complexity, format_question, interpret_question, synthesize_answer, validate_answer, AgentCall,
    AgentContext,
};
pub use config::{Budgets, PipelineConfig, RetrievalBudget};
pub use controller::{Pipeline, PipelineFailure, PipelineOutcome};
pub use json::{balanced_objects, extract_object};
pub use retrieval::{expand_query, retrieve_evidence};
pub use schema::{
    notes_from_reply, AgentName, ComplexityEstimate, Concept, Decision, EvidenceHit, EvidenceManifest, EvidenceRecord,
    InterpretationRecord, OptionAssessment, OptionVerdict, QueryEvidence, SearchQuery, SynthesizedAnswer, Verdict,
    SCHEMA_VERSION,
};
pub use templates::{render, Templates, TEMPLATE_SET_VERSION};
pub use trace::{PipelineTrace, Termination, TraceStep};
pub use workspace::{
    sanitize_component, verify_manifest, verify_workspace_dir, FileSlice, ManifestRecord, Workspace, WorkspaceError,
    MANIFEST_FILE,
};

use crate::gateway::GatewayError;
use crate::knowledge::IndexError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("{agent} output unparseable after {} attempt(s): {reason}", request_digests.len())]
    UnparseableAgentOutput { agent: AgentName, reason: String, request_digests: Vec<String> },
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[cfg(test)]
pub(crate) mod testkit;
