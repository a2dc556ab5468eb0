//! Scripted, deterministic stand-in for the chat and embedding endpoints.
//!
//! Rules are tried in order and the first match wins. A rule matches when all
//! of its matchers match:
//!
//! * `contains`: every listed substring occurs in the rendered request
//!   (`role: content` lines),
//! * `regex`: the regex matches somewhere in the rendered request,
//! * `pattern`: a `*`-glob matched against the whole last user message.
//!
//! The response may reference capture groups of `regex` or `pattern` as
//! `{{1}}`, `{{2}}`, ... Requests that match no rule are errors.

use std::collections::BTreeMap;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{normalize, ChatRequest, Completion, FinishReason, GatewayError};
use crate::digest::fnv1a64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contains: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regex: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    pub respond: String,
}

impl MockRule {
    pub fn contains(needles: &[&str], respond: impl Into<String>) -> Self {
        Self {
            name: None,
            contains: needles.iter().map(|s| s.to_string()).collect(),
            regex: None,
            pattern: None,
            respond: respond.into(),
        }
    }

    pub fn pattern(glob: impl Into<String>, respond: impl Into<String>) -> Self {
        Self {
            name: None,
            contains: Vec::new(),
            regex: None,
            pattern: Some(glob.into()),
            respond: respond.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockEmbedding {
    pub dimension: usize,
    pub seed: u64,
    /// Character n-gram length.
    pub ngram: usize,
    /// Exact-text overrides; normalized before use.
    pub overrides: BTreeMap<String, Vec<f64>>,
}

impl Default for MockEmbedding {
    fn default() -> Self {
        Self {
            dimension: 64,
            seed: 0,
            ngram: 3,
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub rules: Vec<MockRule>,
    #[serde(default)]
    pub embedding: MockEmbedding,
}

impl MockScript {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Config(format!("reading mock script {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| GatewayError::Config(format!("parsing mock script {}: {e}", path.display())))
    }
}

struct CompiledRule {
    contains: Vec<String>,
    regex: Option<Regex>,
    pattern: Option<Regex>,
    respond: String,
}

/// A [`MockScript`] with its matchers compiled.
pub struct MockBackend {
    rules: Vec<CompiledRule>,
    embedding: MockEmbedding,
}

fn glob_to_regex(glob: &str) -> String {
    let parts: Vec<String> = glob.split('*').map(regex::escape).collect();
    format!("(?s)^{}$", parts.join("(.*)"))
}

fn expand(template: &str, caps: &[String]) -> String {
    let mut out = template.to_string();
    for (i, cap) in caps.iter().enumerate().rev() {
        out = out.replace(&format!("{{{{{}}}}}", i + 1), cap);
    }
    out
}

impl MockBackend {
    pub fn new(script: MockScript) -> Result<Self, GatewayError> {
        if script.embedding.dimension == 0 || script.embedding.ngram == 0 {
            return Err(GatewayError::Config("mock embedding dimension and ngram must be positive".into()));
        }
        for (text, v) in &script.embedding.overrides {
            if v.len() != script.embedding.dimension {
                return Err(GatewayError::Config(format!(
                    "override for {text:?} has dimension {}, expected {}",
                    v.len(),
                    script.embedding.dimension
                )));
            }
        }
        let mut rules = Vec::with_capacity(script.rules.len());
        for (i, rule) in script.rules.into_iter().enumerate() {
            if rule.contains.is_empty() && rule.regex.is_none() && rule.pattern.is_none() {
                return Err(GatewayError::Config(format!("mock rule {i} has no matcher")));
            }
            let regex = rule
                .regex
                .as_deref()
                .map(Regex::new)
                .transpose()
                .map_err(|e| GatewayError::Config(format!("mock rule {i}: {e}")))?;
            let pattern = rule
                .pattern
                .as_deref()
                .map(|g| Regex::new(&glob_to_regex(g)))
                .transpose()
                .map_err(|e| GatewayError::Config(format!("mock rule {i}: {e}")))?;
            rules.push(CompiledRule {
                contains: rule.contains,
                regex,
                pattern,
                respond: rule.respond,
            });
        }
        Ok(Self { rules, embedding: script.embedding })
    }

    pub fn dimension(&self) -> usize {
        self.embedding.dimension
    }

    pub fn complete(&self, request: &ChatRequest) -> Result<Completion, GatewayError> {
        let rendered = request.rendered();
        let last_user = request.last_user().unwrap_or("");
        'rules: for rule in &self.rules {
            if !rule.contains.iter().all(|needle| rendered.contains(needle.as_str())) {
                continue;
            }
            let mut caps = Vec::new();
            for (re, subject) in [(&rule.regex, rendered.as_str()), (&rule.pattern, last_user)] {
                if let Some(re) = re {
                    match re.captures(subject) {
                        Some(c) => caps.extend(
                            c.iter().skip(1).map(|m| m.map(|m| m.as_str().to_string()).unwrap_or_default()),
                        ),
                        None => continue 'rules,
                    }
                }
            }
            return Ok(Completion {
                text: expand(&rule.respond, &caps),
                finish_reason: FinishReason::Stop,
                usage: None,
            });
        }
        Err(GatewayError::MockUnmatched(request.digest()))
    }

    /// Hashes padded character n-grams into signed buckets, then L2-normalizes.
    pub fn embed_one(&self, text: &str) -> Result<Vec<f64>, GatewayError> {
        if let Some(v) = self.embedding.overrides.get(text) {
            return normalize(v.clone());
        }
        let dim = self.embedding.dimension;
        let n = self.embedding.ngram;
        let lowered: Vec<char> = text.to_lowercase().chars().collect();
        let mut padded = vec!['\u{2}'; n - 1];
        padded.extend(lowered);
        padded.extend(std::iter::repeat_n('\u{3}', n - 1));
        let mut v = vec![0.0f64; dim];
        let mut buf = String::new();
        for window in padded.windows(n) {
            buf.clear();
            buf.extend(window);
            let h = fnv1a64(self.embedding.seed, buf.as_bytes());
            let bucket = (h % dim as u64) as usize;
            let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
            v[bucket] += sign;
        }
        normalize(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{Message, SamplingParams};

    fn request(user: &str) -> ChatRequest {
        ChatRequest::new("m", vec![Message::system("sys"), Message::user(user)], SamplingParams::default())
    }

    #[test]
    fn echo_pattern_returns_payload() {
        let mock = MockBackend::new(MockScript {
            rules: vec![MockRule::pattern("echo:*", "{{1}}")],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(mock.complete(&request("echo:hello world")).unwrap().text, "hello world");
    }

    #[test]
    fn first_matching_rule_wins() {
        let mock = MockBackend::new(MockScript {
            rules: vec![
                MockRule::contains(&["alpha", "beta"], "both"),
                MockRule::contains(&["alpha"], "one"),
            ],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(mock.complete(&request("alpha beta")).unwrap().text, "both");
        assert_eq!(mock.complete(&request("alpha")).unwrap().text, "one");
    }

    #[test]
    fn regex_captures_expand() {
        let rule = MockRule {
            name: None,
            contains: vec![],
            regex: Some(r"cycle: (\d+)".into()),
            pattern: None,
            respond: "saw {{1}}".into(),
        };
        let mock = MockBackend::new(MockScript { rules: vec![rule], ..Default::default() }).unwrap();
        assert_eq!(mock.complete(&request("cycle: 2")).unwrap().text, "saw 2");
    }

    #[test]
    fn unmatched_is_error_with_digest() {
        let mock = MockBackend::new(MockScript {
            rules: vec![MockRule::contains(&["zzz"], "x")],
            ..Default::default()
        })
        .unwrap();
        let req = request("hello");
        assert_eq!(mock.complete(&req), Err(GatewayError::MockUnmatched(req.digest())));
    }

    #[test]
    fn rule_without_matcher_rejected() {
        let rule = MockRule { name: None, contains: vec![], regex: None, pattern: None, respond: "x".into() };
        assert!(MockBackend::new(MockScript { rules: vec![rule], ..Default::default() }).is_err());
    }

    #[test]
    fn embeddings_are_unit_and_similarity_tracks_overlap() {
        let mock = MockBackend::new(MockScript::default()).unwrap();
        let a = mock.embed_one("myasthenia gravis fatigable weakness").unwrap();
        let b = mock.embed_one("myasthenia gravis fluctuating weakness").unwrap();
        let c = mock.embed_one("subarachnoid hemorrhage thunderclap").unwrap();
        for v in [&a, &b, &c] {
            assert_eq!(v.len(), 64);
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        assert!(dot(&a, &b) > dot(&a, &c));
    }

    #[test]
    fn overrides_take_precedence() {
        let mut overrides = BTreeMap::new();
        overrides.insert("x".to_string(), vec![3.0, 4.0]);
        let mock = MockBackend::new(MockScript {
            rules: vec![],
            embedding: MockEmbedding { dimension: 2, overrides, ..Default::default() },
        })
        .unwrap();
        let v = mock.embed_one("x").unwrap();
        assert!((v[0] - 0.6).abs() < 1e-12 && (v[1] - 0.8).abs() < 1e-12);
    }
}
