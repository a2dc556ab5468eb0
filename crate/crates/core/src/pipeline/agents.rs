//! The four model-backed agents. Each builds its prompt from templates, calls
//! the gateway, and accepts the reply only once it passes its schema.

use serde_json::Value;

use super::json::extract_object;
use super::schema::{
    notes_from_reply, AgentName, ComplexityEstimate, EvidenceManifest, InterpretationRecord, SynthesizedAnswer,
    Verdict,
};
use super::templates::render;
use super::{PipelineConfig, PipelineError, RetrievalBudget, Templates, Workspace};
use crate::benchmark::{option_letter, Level, Question};
use crate::gateway::{ChatRequest, Gateway, Message, SamplingParams};

/// Everything an agent needs to talk to its model.
#[derive(Clone, Copy)]
pub struct AgentContext<'a> {
    pub gateway: &'a Gateway,
    pub model_id: &'a str,
    pub sampling: SamplingParams,
    pub config: &'a PipelineConfig,
    pub templates: &'a Templates,
}

/// A validated agent result and the digests of every request it took.
#[derive(Debug, Clone)]
pub struct AgentCall<T> {
    pub value: T,
    pub request_digests: Vec<String>,
}

/// Stem followed by lettered options.
pub fn format_question(q: &Question) -> String {
    let mut out = q.stem.trim_end().to_string();
    out.push_str("\n\nOptions:");
    for (i, opt) in q.options.iter().enumerate() {
        out.push_str(&format!("\n{}. {}", option_letter(i), opt));
    }
    out
}

impl<'a> AgentContext<'a> {
    /// Sends `system` + `user`, extracts the first JSON object from the reply and
    /// parses it. Failures are fed back as a repair prompt up to
    /// `json_repair_retries` times.
    pub fn call_json<T>(
        &self,
        agent: AgentName,
        system: &str,
        user: String,
        parse: impl Fn(&Value) -> Result<T, String>,
    ) -> Result<AgentCall<T>, PipelineError> {
        let mut messages = vec![Message::system(system), Message::user(user)];
        let mut request_digests = Vec::new();
        let mut last_error = String::new();
        for _ in 0..=self.config.json_repair_retries {
            let request = ChatRequest::new(self.model_id, messages.clone(), self.sampling);
            request_digests.push(request.digest());
            let reply = self.gateway.complete(&request)?;
            match extract_object(&reply.text).and_then(|v| parse(&v)) {
                Ok(value) => return Ok(AgentCall { value, request_digests }),
                Err(e) => {
                    messages.push(Message::assistant(reply.text));
                    messages.push(Message::user(render(&self.templates.repair, &[("error", &e)])));
                    last_error = e;
                }
            }
        }
        Err(PipelineError::UnparseableAgentOutput { agent, reason: last_error, request_digests })
    }
}

pub fn classify_complexity(ctx: &AgentContext<'_>, q: &Question) -> Result<AgentCall<ComplexityEstimate>, PipelineError> {
    let user = render(
        &ctx.templates.classifier_user,
        &[("question_id", &q.id), ("question", &format_question(q))],
    );
    ctx.call_json(AgentName::Classifier, &ctx.templates.classifier_system, user, ComplexityEstimate::from_reply)
}

pub fn interpret_question(
    ctx: &AgentContext<'_>,
    q: &Question,
    hints: Option<&[String]>,
    level: Level,
    revision: usize,
) -> Result<AgentCall<InterpretationRecord>, PipelineError> {
    let budget: RetrievalBudget = ctx.config.budgets.for_level(level);
    let hint_block = match hints {
        Some(h) if !h.is_empty() => {
            let list: Vec<String> = h.iter().map(|x| format!("- {x}")).collect();
            render(&ctx.templates.interpreter_hints, &[("hints", &list.join("\n"))])
        }
        _ => String::new(),
    };
    let user = render(
        &ctx.templates.interpreter_user,
        &[
            ("question_id", &q.id),
            ("level", &level.get().to_string()),
            ("revision", &revision.to_string()),
            ("queries_per_concept", &budget.queries_per_concept.to_string()),
            ("question", &format_question(q)),
            ("hints", &hint_block),
        ],
    );
    ctx.call_json(AgentName::Interpreter, &ctx.templates.interpreter_system, user, |v| {
        InterpretationRecord::from_reply(v, revision, &budget)
    })
}

fn concept_list(rec: &InterpretationRecord) -> String {
    rec.concepts
        .iter()
        .map(|c| {
            if c.clinical_elements.is_empty() {
                format!("- {}", c.name)
            } else {
                format!("- {}: {}", c.name, c.clinical_elements.join("; "))
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Groups evidence slices into portions of at most `synthesis_context_tokens`
/// tokens (a single oversized slice forms its own portion).
fn evidence_portions(ws: &Workspace, manifest: &EvidenceManifest, budget: usize) -> Result<Vec<String>, PipelineError> {
    let mut portions = Vec::new();
    let mut current = String::new();
    let mut used = 0usize;
    for path in manifest.paths() {
        for slice in ws.read_all(path)? {
            if used > 0 && used + slice.tokens > budget {
                portions.push(std::mem::take(&mut current));
                used = 0;
            }
            current.push_str(&format!("--- {path} (part {}/{}) ---\n", slice.index + 1, slice.total));
            current.push_str(&slice.content);
            current.push('\n');
            used += slice.tokens;
        }
    }
    if used > 0 || portions.is_empty() {
        if current.is_empty() {
            current.push_str("(no evidence retrieved; rely on established clinical knowledge)\n");
        }
        portions.push(current);
    }
    Ok(portions)
}

/// Feeds the evidence to the model portion by portion (ReadFile slices), carrying
/// notes forward, and parses the final portion's reply into an answer.
pub fn synthesize_answer(
    ctx: &AgentContext<'_>,
    q: &Question,
    rec: &InterpretationRecord,
    manifest: &EvidenceManifest,
    ws: &Workspace,
) -> Result<AgentCall<SynthesizedAnswer>, PipelineError> {
    let portions = evidence_portions(ws, manifest, ctx.config.synthesis_context_tokens)?;
    let question = format_question(q);
    let concepts = concept_list(rec);
    let total = portions.len().to_string();
    let mut notes: Vec<String> = Vec::new();
    let mut request_digests = Vec::new();
    let last = portions.len() - 1;
    for (i, evidence) in portions.iter().enumerate() {
        let portion = (i + 1).to_string();
        let notes_text = if notes.is_empty() { "(none)".to_string() } else { notes.join("\n") };
        let vars = [
            ("question_id", q.id.as_str()),
            ("portion", portion.as_str()),
            ("portions", total.as_str()),
            ("question", question.as_str()),
            ("concepts", concepts.as_str()),
            ("notes", notes_text.as_str()),
            ("evidence", evidence.as_str()),
        ];
        if i < last {
            let user = render(&ctx.templates.synthesizer_read, &vars);
            let call = ctx.call_json(AgentName::Synthesizer, &ctx.templates.synthesizer_system, user, notes_from_reply)?;
            request_digests.extend(call.request_digests);
            notes.push(call.value);
        } else {
            let user = render(&ctx.templates.synthesizer_final, &vars);
            let n = q.options.len();
            let call = ctx.call_json(AgentName::Synthesizer, &ctx.templates.synthesizer_system, user, |v| {
                SynthesizedAnswer::from_reply(v, n, manifest)
            });
            let call = call.map_err(|e| match e {
                PipelineError::UnparseableAgentOutput { agent, reason, request_digests: mut d } => {
                    let mut all = request_digests.clone();
                    all.append(&mut d);
                    PipelineError::UnparseableAgentOutput { agent, reason, request_digests: all }
                }
                other => other,
            })?;
            request_digests.extend(call.request_digests);
            return Ok(AgentCall { value: call.value, request_digests });
        }
    }
    unreachable!("evidence_portions always yields at least one portion")
}

pub fn validate_answer(
    ctx: &AgentContext<'_>,
    q: &Question,
    answer: &SynthesizedAnswer,
    ws: &Workspace,
    cycle: usize,
) -> Result<AgentCall<Verdict>, PipelineError> {
    let assessments = answer
        .assessments
        .iter()
        .map(|a| format!("{} [{}]: {}", a.option, serde_json::to_string(&a.verdict).unwrap().trim_matches('"'), a.text))
        .collect::<Vec<_>>()
        .join("\n");
    let mut evidence = String::new();
    for path in &answer.citations {
        evidence.push_str(&format!("--- {path} ---\n"));
        for slice in ws.read_all(path)? {
            evidence.push_str(&slice.content);
        }
        evidence.push('\n');
    }
    if evidence.is_empty() {
        evidence.push_str("(none cited)");
    }
    let chosen = format!("{}. {}", answer.choice_letter(), q.options[answer.choice_index]);
    let user = render(
        &ctx.templates.validator_user,
        &[
            ("question_id", &q.id),
            ("cycle", &cycle.to_string()),
            ("question", &format_question(q)),
            ("answer", &chosen),
            ("assessments", &assessments),
            ("evidence", &evidence),
        ],
    );
    ctx.call_json(AgentName::Validator, &ctx.templates.validator_system, user, Verdict::from_reply)
}
