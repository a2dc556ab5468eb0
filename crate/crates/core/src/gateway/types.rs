use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_output_tokens: u32,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            temperature: 0.7,
            top_p: 0.9,
            max_output_tokens: 2048,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.temperature >= 0.0) {
            return Err(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(format!("top_p must be in (0, 1], got {}", self.top_p));
        }
        if self.max_output_tokens == 0 {
            return Err("max_output_tokens must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub messages: Vec<Message>,
    pub sampling: SamplingParams,
}

impl ChatRequest {
    pub fn new(model_id: impl Into<String>, messages: Vec<Message>, sampling: SamplingParams) -> Self {
        Self { model_id: model_id.into(), messages, sampling }
    }

    /// Digest over model, messages and sampling; stable across runs.
    pub fn digest(&self) -> String {
        crate::digest::json_digest(self)
    }

    /// `role: content` lines, the text mock rules match against.
    pub fn rendered(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            out.push_str(m.role.as_str());
            out.push_str(": ");
            out.push_str(&m.content);
            out.push('\n');
        }
        out
    }

    pub fn last_user(&self) -> Option<&str> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishReason {
    Stop,
    Length,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub finish_reason: FinishReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Mock,
}

/// An API key. Never serialized, never printed.
#[derive(Clone, PartialEq, Eq)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        Self(key.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey([REDACTED])")
    }
}

pub const DEFAULT_API_KEY_ENV: &str = "NEUROQA_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub base_url: String,
    #[serde(skip)]
    pub api_key: Option<ApiKey>,
    /// Environment variable the API key is read from.
    pub api_key_env: String,
    pub request_timeout_ms: u64,
    pub max_retries: u32,
    /// First backoff ceiling; doubles on every retry, full jitter.
    pub backoff_initial_ms: u64,
    pub rate_limit_per_minute: Option<u32>,
    pub embedding_model: String,
    /// Mock script file, resolved relative to the config file when relative.
    pub mock_script: Option<PathBuf>,
    /// Append-only JSON-lines transcript.
    pub transcript_path: Option<PathBuf>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Mock,
            base_url: "http://localhost:11434".into(),
            api_key: None,
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            request_timeout_ms: 120_000,
            max_retries: 3,
            backoff_initial_ms: 500,
            rate_limit_per_minute: None,
            embedding_model: "BAAI/bge-large-en-v1.5".into(),
            mock_script: None,
            transcript_path: None,
        }
    }
}

impl BackendConfig {
    pub fn http(base_url: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::Http,
            base_url: base_url.into(),
            ..Self::default()
        }
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_millis(self.request_timeout_ms)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.request_timeout_ms == 0 {
            return Err("request_timeout_ms must be positive".into());
        }
        if self.rate_limit_per_minute == Some(0) {
            return Err("rate_limit_per_minute must be positive when set".into());
        }
        if self.kind == BackendKind::Http {
            url::Url::parse(&self.base_url).map_err(|e| format!("invalid base_url: {e}"))?;
        }
        Ok(())
    }

    /// Fills `api_key` from the configured environment variable, if set.
    pub fn load_api_key_from_env(&mut self) {
        if let Ok(key) = std::env::var(&self.api_key_env) {
            if !key.is_empty() {
                self.api_key = Some(ApiKey::new(key));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GatewayError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("backend returned status {code}: {body}")]
    BadStatus { code: u16, body: String },
    #[error("no mock rule matched request {0}")]
    MockUnmatched(String),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding input is empty or contains an empty string")]
    EmptyInput,
    #[error("embedding vector has zero norm")]
    DegenerateVector,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("backend configuration error: {0}")]
    Config(String),
}
