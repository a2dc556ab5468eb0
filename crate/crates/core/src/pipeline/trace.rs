use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::schema::{AgentName, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub index: usize,
    pub agent: AgentName,
    pub cycle: usize,
    pub request_digests: Vec<String>,
    pub output: Value,
    pub started_at: String,
    pub finished_at: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Approved,
    ForcedAccept,
}

/// Replayable record of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub schema_version: u32,
    pub question_id: String,
    pub run_id: String,
    pub model_id: String,
    pub template_version: u32,
    pub steps: Vec<TraceStep>,
    pub cycles: usize,
    pub termination: Option<Termination>,
    pub final_choice: Option<usize>,
    pub error: Option<String>,
}

impl PipelineTrace {
    pub fn new(question_id: &str, run_id: &str, model_id: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            question_id: question_id.to_string(),
            run_id: run_id.to_string(),
            model_id: model_id.to_string(),
            template_version: super::templates::TEMPLATE_SET_VERSION,
            steps: Vec::new(),
            cycles: 0,
            termination: None,
            final_choice: None,
            error: None,
        }
    }

    pub fn count(&self, agent: AgentName) -> usize {
        self.steps.iter().filter(|s| s.agent == agent).count()
    }

    pub fn agents(&self) -> Vec<AgentName> {
        self.steps.iter().map(|s| s.agent).collect()
    }

    /// The trace as JSON with every timestamp removed, for determinism checks.
    pub fn without_timestamps(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("trace serializes");
        if let Some(steps) = v.get_mut("steps").and_then(Value::as_array_mut) {
            for s in steps {
                if let Some(obj) = s.as_object_mut() {
                    obj.remove("started_at");
                    obj.remove("finished_at");
                }
            }
        }
        v
    }
}
