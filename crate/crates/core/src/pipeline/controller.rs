use serde::Serialize;
use serde_json::{json, Value};

use super::agents::{classify_complexity, interpret_question, synthesize_answer, validate_answer, AgentCall, AgentContext};
use super::retrieval::retrieve_evidence;
use super::schema::{AgentName, Decision, SynthesizedAnswer, SCHEMA_VERSION};
use super::trace::{PipelineTrace, Termination, TraceStep};
use super::{PipelineError, Workspace};
use crate::benchmark::Question;
use crate::gateway::now_rfc3339;
use crate::knowledge::VectorIndex;

/// Agents plus the knowledge base they retrieve from.
pub struct Pipeline<'a> {
    pub ctx: AgentContext<'a>,
    pub index: &'a VectorIndex,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub choice_index: usize,
    pub answer: SynthesizedAnswer,
    pub trace: PipelineTrace,
}

#[derive(Debug)]
pub struct PipelineFailure {
    pub error: PipelineError,
    pub trace: PipelineTrace,
}

struct Recorder<'t> {
    trace: &'t mut PipelineTrace,
}

impl Recorder<'_> {
    fn step<T: Serialize>(
        &mut self,
        agent: AgentName,
        cycle: usize,
        f: impl FnOnce() -> Result<AgentCall<T>, PipelineError>,
    ) -> Result<T, PipelineError> {
        let started_at = now_rfc3339();
        let result = f();
        let finished_at = now_rfc3339();
        let index = self.trace.steps.len();
        match result {
            Ok(call) => {
                self.trace.steps.push(TraceStep {
                    index,
                    agent,
                    cycle,
                    request_digests: call.request_digests,
                    output: serde_json::to_value(&call.value).expect("agent output serializes"),
                    started_at,
                    finished_at,
                });
                Ok(call.value)
            }
            Err(e) => {
                if let PipelineError::UnparseableAgentOutput { request_digests, .. } = &e {
                    self.trace.steps.push(TraceStep {
                        index,
                        agent,
                        cycle,
                        request_digests: request_digests.clone(),
                        output: Value::Null,
                        started_at,
                        finished_at,
                    });
                }
                Err(e)
            }
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

impl<'a> Pipeline<'a> {
    pub fn new(ctx: AgentContext<'a>, index: &'a VectorIndex) -> Self {
        Self { ctx, index }
    }

    /// Answers one question inside `ws`, writing `trace.json` whether or not
    /// the run succeeds.
    pub fn run(&self, q: &Question, ws: &mut Workspace, run_id: &str) -> Result<PipelineOutcome, Box<PipelineFailure>> {
        let mut trace = PipelineTrace::new(&q.id, run_id, self.ctx.model_id);
        let result = self.run_cycles(q, ws, &mut trace);
        match result {
            Ok(answer) => {
                trace.final_choice = Some(answer.choice_index);
                if let Err(error) = ws.save_file("trace.json", &pretty(&trace)) {
                    return Err(Box::new(PipelineFailure { error: error.into(), trace }));
                }
                Ok(PipelineOutcome { choice_index: answer.choice_index, answer, trace })
            }
            Err(error) => {
                trace.error = Some(error.to_string());
                let _ = ws.save_file("trace.json", &pretty(&trace));
                Err(Box::new(PipelineFailure { error, trace }))
            }
        }
    }

    fn run_cycles(&self, q: &Question, ws: &mut Workspace, trace: &mut PipelineTrace) -> Result<SynthesizedAnswer, PipelineError> {
        let ctx = &self.ctx;
        let cfg = ctx.config;
        let mut rec = Recorder { trace };

        let estimate = rec.step(AgentName::Classifier, 0, || classify_complexity(ctx, q))?;
        let level = estimate.rc_level;
        let budget = cfg.budgets.for_level(level);
        ws.save_file("complexity.json", &pretty(&estimate))?;

        let mut hints: Option<Vec<String>> = None;
        for cycle in 1..=cfg.max_validation_cycles {
            rec.trace.cycles = cycle;
            let interp = rec.step(AgentName::Interpreter, cycle, || {
                interpret_question(ctx, q, hints.as_deref(), level, cycle - 1)
            })?;
            ws.save_file(
                "concepts.json",
                &pretty(&json!({"schema_version": SCHEMA_VERSION, "revision": interp.revision, "concepts": interp.concepts})),
            )?;
            ws.save_file(
                "queries.json",
                &pretty(&json!({"schema_version": SCHEMA_VERSION, "revision": interp.revision, "queries": interp.queries})),
            )?;

            let dir = if cycle == 1 { "evidence/".to_string() } else { format!("evidence/cycle{cycle}/") };
            let manifest = rec.step(AgentName::Retriever, cycle, || {
                let m = retrieve_evidence(&interp, self.index, ctx.gateway, ws, budget, cfg.expansion_prefix_tokens, &dir)?;
                Ok(AgentCall { value: m, request_digests: Vec::new() })
            })?;
            ws.save_file(&format!("{dir}manifest.json"), &pretty(&manifest))?;

            let answer = rec.step(AgentName::Synthesizer, cycle, || synthesize_answer(ctx, q, &interp, &manifest, ws))?;
            ws.save_file("synthesis.json", &pretty(&answer))?;

            let verdict = rec.step(AgentName::Validator, cycle, || validate_answer(ctx, q, &answer, ws, cycle))?;
            ws.save_file(&format!("verdict_{cycle}.json"), &pretty(&verdict))?;

            match verdict.decision {
                Decision::Approve => {
                    rec.trace.termination = Some(Termination::Approved);
                    return Ok(answer);
                }
                Decision::Revise if cycle == cfg.max_validation_cycles => {
                    rec.trace.termination = Some(Termination::ForcedAccept);
                    return Ok(answer);
                }
                Decision::Revise => hints = Some(verdict.hints),
            }
        }
        Err(PipelineError::Config("max_validation_cycles must be at least 1".into()))
    }
}
