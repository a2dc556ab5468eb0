use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::{extract_choice, EvalError, EvalResult, RunMode};
use crate::benchmark::{Dataset, Question};
use crate::gateway::{ChatRequest, Gateway, Message, SamplingParams};
use crate::knowledge::VectorIndex;
use crate::pipeline::{format_question, render, AgentContext, Pipeline, PipelineConfig, Templates, Workspace};

/// Shared components for one evaluation run.
#[derive(Clone, Copy)]
pub struct EvalSetup<'a> {
    pub gateway: &'a Gateway,
    pub model_id: &'a str,
    pub sampling: SamplingParams,
    pub templates: &'a Templates,
    pub pipeline: &'a PipelineConfig,
    /// Required for rag and agentic modes.
    pub index: Option<&'a VectorIndex>,
    /// Parent of per-question workspaces; required for agentic mode.
    pub workspace_base: Option<&'a Path>,
    pub run_id: &'a str,
}

fn passages(index: &VectorIndex, gateway: &Gateway, query: &str, k: usize) -> Result<String, String> {
    let hits = index.retrieve(query, gateway, k).map_err(|e| e.to_string())?;
    Ok(hits
        .iter()
        .enumerate()
        .map(|(i, h)| format!("[{}] {} #{}\n{}", i + 1, h.chunk.doc_id, h.chunk.seq, h.chunk.text))
        .collect::<Vec<_>>()
        .join("\n\n"))
}

fn ask(setup: &EvalSetup<'_>, user: String) -> Result<String, String> {
    let request = ChatRequest::new(
        setup.model_id,
        vec![Message::system(&setup.templates.eval_system), Message::user(user)],
        setup.sampling,
    );
    setup.gateway.complete(&request).map(|c| c.text).map_err(|e| e.to_string())
}

fn evaluate_one(setup: &EvalSetup<'_>, q: &Question, mode: RunMode) -> EvalResult {
    let started = Instant::now();
    let mut result = EvalResult::scored(&q.id, None, q.correct_index, mode);
    let question = format_question(q);
    let reply = match mode {
        RunMode::Base => ask(setup, render(&setup.templates.eval_base, &[("question_id", &q.id), ("question", &question)])),
        RunMode::Rag { top_k } => {
            let index = setup.index.expect("checked before fan-out");
            passages(index, setup.gateway, &q.stem, top_k).and_then(|p| {
                ask(
                    setup,
                    render(&setup.templates.eval_rag, &[("question_id", &q.id), ("passages", &p), ("question", &question)]),
                )
            })
        }
        RunMode::Agentic => {
            let base = setup.workspace_base.expect("checked before fan-out");
            let ctx = AgentContext {
                gateway: setup.gateway,
                model_id: setup.model_id,
                sampling: setup.sampling,
                config: setup.pipeline,
                templates: setup.templates,
            };
            match Workspace::create(base, &q.id, setup.run_id, setup.pipeline.read_chunk_tokens) {
                Err(e) => Err(e.to_string()),
                Ok(mut ws) => {
                    let trace_path = ws.root().join("trace.json");
                    result.trace = Some(
                        trace_path.strip_prefix(base).unwrap_or(&trace_path).to_string_lossy().replace('\\', "/"),
                    );
                    let pipeline = Pipeline::new(ctx, setup.index.expect("checked before fan-out"));
                    match pipeline.run(q, &mut ws, setup.run_id) {
                        Ok(outcome) => {
                            result.predicted_index = Some(outcome.choice_index);
                            result.termination = outcome.trace.termination;
                            Ok(String::new())
                        }
                        Err(fail) => Err(fail.error.to_string()),
                    }
                }
            }
        }
    };
    match reply {
        Ok(text) => {
            if mode != RunMode::Agentic {
                result.predicted_index = extract_choice(&text, q.options.len());
            }
        }
        Err(e) => result.error = Some(e),
    }
    result.correct = result.predicted_index == Some(q.correct_index);
    result.latency_ms = started.elapsed().as_millis() as u64;
    result
}

/// One result per question, in dataset order. Per-question failures are
/// recorded in the result; only missing components abort the run.
pub fn run_evaluation(
    dataset: &Dataset,
    mode: RunMode,
    setup: &EvalSetup<'_>,
    parallelism: usize,
) -> Result<Vec<EvalResult>, EvalError> {
    if parallelism == 0 {
        return Err(EvalError::Config("parallelism must be at least 1".into()));
    }
    match mode {
        RunMode::Rag { top_k } => {
            if top_k == 0 {
                return Err(EvalError::Config("rag top_k must be at least 1".into()));
            }
            if setup.index.is_none() {
                return Err(EvalError::Config("rag mode needs an index".into()));
            }
        }
        RunMode::Agentic => {
            if setup.index.is_none() {
                return Err(EvalError::Config("agentic mode needs an index".into()));
            }
            if setup.workspace_base.is_none() {
                return Err(EvalError::Config("agentic mode needs a workspace directory".into()));
            }
            setup.pipeline.validate().map_err(EvalError::Config)?;
        }
        RunMode::Base => {}
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| EvalError::Config(e.to_string()))?;
    Ok(pool.install(|| dataset.questions.par_iter().map(|q| evaluate_one(setup, q, mode)).collect()))
}
