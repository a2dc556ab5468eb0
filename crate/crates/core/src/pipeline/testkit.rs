//! Shared fixtures for pipeline tests.

use serde_json::json;

use super::{AgentContext, PipelineConfig, Templates};
use crate::benchmark::Question;
use crate::gateway::{Gateway, MockRule, MockScript, SamplingParams};
use crate::knowledge::{build_index, Chunk, TokenSpan, VectorIndex};

pub const TOPICS: [&str; 10] = [
    "Myasthenia gravis causes fatigable ptosis and diplopia with acetylcholine receptor antibodies.",
    "Guillain-Barre syndrome presents with ascending weakness and areflexia after infection.",
    "Multiple sclerosis shows periventricular white matter lesions disseminated in time and space.",
    "Parkinson disease features resting tremor, rigidity and bradykinesia from nigral loss.",
    "Amyotrophic lateral sclerosis combines upper and lower motor neuron signs.",
    "Subarachnoid hemorrhage causes a thunderclap headache and xanthochromia.",
    "Absence seizures show 3 Hz spike and wave discharges in children.",
    "Trigeminal neuralgia produces brief electric facial pain triggered by touch.",
    "Wernicke encephalopathy presents with confusion, ataxia and ophthalmoplegia.",
    "Normal pressure hydrocephalus causes gait apraxia, incontinence and dementia.",
];

pub fn question() -> Question {
    Question {
        id: "q-001".into(),
        exam_id: "toy".into(),
        stem: "A 30-year-old woman has ptosis that worsens through the day. Which test is most specific?".into(),
        options: vec![
            "Lumbar puncture".into(),
            "Brain MRI".into(),
            "Acetylcholine receptor antibodies".into(),
            "EEG".into(),
        ],
        correct_index: 2,
        subspecialty: None,
        complexity: None,
    }
}

pub fn chunks() -> Vec<Chunk> {
    TOPICS
        .iter()
        .enumerate()
        .map(|(i, t)| Chunk {
            doc_id: format!("doc{i:02}"),
            seq: 0,
            token_span: TokenSpan { start: 0, end: crate::knowledge::count_tokens(t) },
            text: t.to_string(),
        })
        .collect()
}

pub fn index(gateway: &Gateway) -> VectorIndex {
    build_index(chunks(), gateway).unwrap()
}

pub fn classifier(level: u8) -> MockRule {
    MockRule::contains(
        &["[agent:classifier]"],
        json!({"schema_version": 1, "rc_level": level, "rationale": "scripted"}).to_string(),
    )
}

pub fn interpreter_two_concepts() -> MockRule {
    MockRule::contains(
        &["[agent:interpreter]"],
        json!({
            "schema_version": 1,
            "concepts": [
                {"name": "fatigable ptosis", "clinical_elements": ["ptosis", "worse in evening"]},
                {"name": "neuromuscular junction", "clinical_elements": ["antibodies"]}
            ],
            "queries": [
                {"concept": "fatigable ptosis", "query": "ptosis diplopia fatigable weakness"},
                {"concept": "neuromuscular junction", "query": "acetylcholine receptor antibodies"}
            ]
        })
        .to_string(),
    )
}

pub fn synth_read() -> MockRule {
    MockRule::contains(
        &["[agent:synthesizer]", "Reading portion"],
        json!({"schema_version": 1, "notes": "antibody testing is specific"}).to_string(),
    )
}

/// Final synthesis answering `letter` and citing the first evidence file shown.
pub fn synth_final(letter: char) -> MockRule {
    let assessments: Vec<_> = ['A', 'B', 'C', 'D']
        .iter()
        .map(|&o| json!({"option": o, "verdict": if o == letter {"supported"} else {"contradicted"}, "text": "scripted"}))
        .collect();
    MockRule {
        name: Some("synth-final".into()),
        contains: vec!["[agent:synthesizer]".into(), "Final portion".into()],
        regex: Some(r"--- (evidence/[^ ]+\.json) \(part".into()),
        pattern: None,
        respond: json!({"schema_version": 1, "answer": letter.to_string(), "assessments": assessments, "citations": ["{{1}}"]})
            .to_string(),
    }
}

pub fn approve() -> MockRule {
    MockRule::contains(
        &["[agent:validator]"],
        json!({"schema_version": 1, "decision": "approve", "reasons": ["consistent"]}).to_string(),
    )
}

pub fn revise_at(cycle: Option<usize>) -> MockRule {
    let marker = cycle.map(|c| format!("Validation cycle: {c}\n"));
    let mut needles = vec!["[agent:validator]".to_string()];
    needles.extend(marker);
    MockRule {
        name: None,
        contains: needles,
        regex: None,
        pattern: None,
        respond: json!({"schema_version": 1, "decision": "revise", "reasons": ["thin"], "hints": ["consider repetitive nerve stimulation"]})
            .to_string(),
    }
}

pub fn gateway(rules: Vec<MockRule>) -> Gateway {
    Gateway::mock(MockScript { rules, ..Default::default() }).unwrap()
}

pub struct Kit {
    pub config: PipelineConfig,
    pub templates: Templates,
}

impl Kit {
    pub fn new() -> Self {
        Self { config: PipelineConfig::default(), templates: Templates::default() }
    }

    pub fn ctx<'a>(&'a self, gateway: &'a Gateway) -> AgentContext<'a> {
        AgentContext {
            gateway,
            model_id: "mock-chat",
            sampling: SamplingParams::default(),
            config: &self.config,
            templates: &self.templates,
        }
    }
}
