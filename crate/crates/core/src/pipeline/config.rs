use serde::{Deserialize, Serialize};

use crate::benchmark::Level;

/// How much retrieval a question of a given complexity receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalBudget {
    pub queries_per_concept: usize,
    pub top_k: usize,
    pub rounds: usize,
}

impl RetrievalBudget {
    pub const fn new(queries_per_concept: usize, top_k: usize, rounds: usize) -> Self {
        Self { queries_per_concept, top_k, rounds }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub l1: RetrievalBudget,
    pub l2: RetrievalBudget,
    pub l3: RetrievalBudget,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            l1: RetrievalBudget::new(1, 3, 1),
            l2: RetrievalBudget::new(1, 5, 2),
            l3: RetrievalBudget::new(2, 5, 2),
        }
    }
}

impl Budgets {
    pub fn for_level(&self, level: Level) -> RetrievalBudget {
        match level.get() {
            1 => self.l1,
            2 => self.l2,
            _ => self.l3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub max_validation_cycles: usize,
    pub budgets: Budgets,
    /// Maximum tokens returned by one ReadFile slice.
    pub read_chunk_tokens: usize,
    /// Re-prompts allowed after an unusable agent reply.
    pub json_repair_retries: usize,
    /// Evidence tokens passed to the synthesizer per call.
    pub synthesis_context_tokens: usize,
    /// Tokens taken from each previous-round hit to expand later-round queries.
    pub expansion_prefix_tokens: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            max_validation_cycles: 2,
            budgets: Budgets::default(),
            read_chunk_tokens: 1024,
            json_repair_retries: 2,
            synthesis_context_tokens: 3072,
            expansion_prefix_tokens: 20,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_validation_cycles == 0 {
            return Err("max_validation_cycles must be at least 1".into());
        }
        for (name, b) in [("l1", self.budgets.l1), ("l2", self.budgets.l2), ("l3", self.budgets.l3)] {
            if b.queries_per_concept == 0 || b.top_k == 0 || b.rounds == 0 {
                return Err(format!("budget {name} must be positive in every field"));
            }
        }
        if self.read_chunk_tokens == 0 || self.synthesis_context_tokens == 0 {
            return Err("read_chunk_tokens and synthesis_context_tokens must be positive".into());
        }
        Ok(())
    }
}
