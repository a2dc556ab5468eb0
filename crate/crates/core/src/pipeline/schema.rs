//! Agent message types and the schema checks applied to raw model replies.
//! Every stored message carries `schema_version`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::RetrievalBudget;
use crate::benchmark::{letter_index, option_letter, Level};

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentName {
    Classifier,
    Interpreter,
    Retriever,
    Synthesizer,
    Validator,
}

impl AgentName {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentName::Classifier => "classifier",
            AgentName::Interpreter => "interpreter",
            AgentName::Retriever => "retriever",
            AgentName::Synthesizer => "synthesizer",
            AgentName::Validator => "validator",
        }
    }
}

impl std::fmt::Display for AgentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value, String> {
    v.get(name).ok_or_else(|| format!("missing field `{name}`"))
}

fn string_field(v: &Value, name: &str) -> Result<String, String> {
    field(v, name)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| format!("field `{name}` must be a string"))
}

fn string_list(v: &Value, name: &str) -> Result<Vec<String>, String> {
    match v.get(name) {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|i| i.as_str().map(str::to_string).ok_or_else(|| format!("`{name}` must hold strings")))
            .collect(),
        Some(_) => Err(format!("field `{name}` must be an array of strings")),
    }
}

fn check_version(v: &Value) -> Result<(), String> {
    match v.get("schema_version") {
        None => Ok(()),
        Some(x) if x.as_u64() == Some(u64::from(SCHEMA_VERSION)) => Ok(()),
        Some(x) => Err(format!("unsupported schema_version {x}")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub rc_level: Level,
    pub rationale: String,
}

impl ComplexityEstimate {
    pub fn from_reply(v: &Value) -> Result<Self, String> {
        check_version(v)?;
        let raw = field(v, "rc_level")?;
        let level = raw
            .as_u64()
            .and_then(|n| u8::try_from(n).ok())
            .ok_or_else(|| format!("`rc_level` must be 1, 2 or 3 (got {raw})"))?;
        let rc_level = Level::new(level).map_err(|e| e.to_string())?;
        let rationale = v.get("rationale").and_then(Value::as_str).unwrap_or_default().to_string();
        Ok(Self { schema_version: SCHEMA_VERSION, rc_level, rationale })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub name: String,
    #[serde(default)]
    pub clinical_elements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub concept: String,
    pub query: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretationRecord {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub concepts: Vec<Concept>,
    pub queries: Vec<SearchQuery>,
    pub revision: usize,
}

impl InterpretationRecord {
    /// Validates a reply; queries beyond `queries_per_concept` for one concept are dropped.
    pub fn from_reply(v: &Value, revision: usize, budget: &RetrievalBudget) -> Result<Self, String> {
        check_version(v)?;
        let concepts_raw = field(v, "concepts")?.as_array().ok_or("`concepts` must be an array")?;
        let mut concepts = Vec::new();
        for c in concepts_raw {
            let name = string_field(c, "name")?.trim().to_string();
            if name.is_empty() {
                return Err("concept names must be non-empty".into());
            }
            if concepts.iter().any(|x: &Concept| x.name == name) {
                return Err(format!("concept {name:?} listed twice"));
            }
            concepts.push(Concept { name, clinical_elements: string_list(c, "clinical_elements")? });
        }
        if concepts.is_empty() {
            return Err("at least one concept is required".into());
        }
        let queries_raw = field(v, "queries")?.as_array().ok_or("`queries` must be an array")?;
        let mut per_concept: BTreeMap<String, usize> = BTreeMap::new();
        let mut queries = Vec::new();
        for q in queries_raw {
            let concept = string_field(q, "concept")?.trim().to_string();
            let query = string_field(q, "query")?.trim().to_string();
            if !concepts.iter().any(|c| c.name == concept) {
                return Err(format!("query {query:?} names unknown concept {concept:?}"));
            }
            if query.is_empty() {
                return Err("queries must be non-empty".into());
            }
            let used = per_concept.entry(concept.clone()).or_default();
            if *used < budget.queries_per_concept {
                *used += 1;
                queries.push(SearchQuery { concept, query });
            }
        }
        if queries.is_empty() {
            return Err("at least one query is required".into());
        }
        Ok(Self { schema_version: SCHEMA_VERSION, concepts, queries, revision })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceHit {
    pub round: usize,
    pub rank: usize,
    pub path: String,
    pub doc_id: String,
    pub seq: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEvidence {
    pub query_index: usize,
    pub concept: String,
    pub query: String,
    /// Sorted by score, descending.
    pub hits: Vec<EvidenceHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceManifest {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub queries: Vec<QueryEvidence>,
}

impl EvidenceManifest {
    pub fn empty() -> Self {
        Self { schema_version: SCHEMA_VERSION, queries: Vec::new() }
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.queries.iter().flat_map(|q| q.hits.iter().map(|h| h.path.as_str()))
    }

    pub fn file_count(&self) -> usize {
        self.queries.iter().map(|q| q.hits.len()).sum()
    }
}

/// Contents of one saved evidence file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub schema_version: u32,
    pub query_index: usize,
    pub query: String,
    pub round: usize,
    pub rank: usize,
    pub doc_id: String,
    pub seq: usize,
    pub token_span: [usize; 2],
    pub score: f64,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionVerdict {
    Supported,
    Contradicted,
    Uncertain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionAssessment {
    pub option: char,
    pub verdict: OptionVerdict,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesizedAnswer {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub choice_index: usize,
    pub assessments: Vec<OptionAssessment>,
    pub citations: Vec<String>,
}

fn parse_letter(raw: &str, n_options: usize) -> Result<usize, String> {
    let t = raw.trim().trim_matches(|c: char| matches!(c, '(' | ')' | '.' | '*' | '[' | ']'));
    let mut chars = t.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => match letter_index(c) {
            Some(i) if i < n_options => Ok(i),
            _ => Err(format!("{raw:?} is not one of the {n_options} option letters")),
        },
        _ => Err(format!("{raw:?} is not a single option letter")),
    }
}

impl SynthesizedAnswer {
    pub fn from_reply(v: &Value, n_options: usize, manifest: &EvidenceManifest) -> Result<Self, String> {
        check_version(v)?;
        let choice_index = parse_letter(&string_field(v, "answer")?, n_options)?;
        let raw = field(v, "assessments")?.as_array().ok_or("`assessments` must be an array")?;
        let mut by_option = BTreeMap::new();
        for a in raw {
            let idx = parse_letter(&string_field(a, "option")?, n_options)?;
            let verdict: OptionVerdict = serde_json::from_value(field(a, "verdict")?.clone())
                .map_err(|_| "verdict must be supported, contradicted or uncertain".to_string())?;
            let text = a.get("text").and_then(Value::as_str).unwrap_or_default().to_string();
            if by_option.insert(idx, OptionAssessment { option: option_letter(idx), verdict, text }).is_some() {
                return Err(format!("option {} assessed twice", option_letter(idx)));
            }
        }
        if by_option.len() != n_options {
            let missing: String = (0..n_options).filter(|i| !by_option.contains_key(i)).map(option_letter).collect();
            return Err(format!("every option needs an assessment; missing {missing}"));
        }
        let known: BTreeSet<&str> = manifest.paths().collect();
        let citations = string_list(v, "citations")?;
        if let Some(bad) = citations.iter().find(|c| !known.contains(c.as_str())) {
            return Err(format!("citation {bad:?} is not a retrieved evidence file"));
        }
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            choice_index,
            assessments: by_option.into_values().collect(),
            citations,
        })
    }

    pub fn choice_letter(&self) -> char {
        option_letter(self.choice_index)
    }
}

/// Interim notes from a synthesizer reading call.
pub fn notes_from_reply(v: &Value) -> Result<String, String> {
    check_version(v)?;
    let notes = string_field(v, "notes")?;
    if notes.trim().is_empty() {
        return Err("`notes` must be non-empty".into());
    }
    Ok(notes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Approve,
    Revise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub decision: Decision,
    pub reasons: Vec<String>,
    /// Non-empty exactly when `decision` is revise.
    pub hints: Vec<String>,
}

impl Verdict {
    pub fn from_reply(v: &Value) -> Result<Self, String> {
        check_version(v)?;
        let decision: Decision = serde_json::from_value(field(v, "decision")?.clone())
            .map_err(|_| "decision must be approve or revise".to_string())?;
        let reasons = string_list(v, "reasons")?;
        let hints: Vec<String> = string_list(v, "hints")?
            .into_iter()
            .filter(|h| !h.trim().is_empty())
            .collect();
        match decision {
            Decision::Revise if hints.is_empty() => Err("a revise decision must include refinement hints".into()),
            Decision::Revise => Ok(Self { schema_version: SCHEMA_VERSION, decision, reasons, hints }),
            Decision::Approve => Ok(Self { schema_version: SCHEMA_VERSION, decision, reasons, hints: Vec::new() }),
        }
    }
}
