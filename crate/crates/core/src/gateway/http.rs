//! OpenAI-compatible wire protocol: `/v1/chat/completions` and `/v1/embeddings`.

use serde_json::{json, Value};

use super::{ApiKey, BackendConfig, ChatRequest, Completion, FinishReason, GatewayError, Usage};

pub(crate) enum AttemptError {
    /// Worth retrying: connection failure, timeout, 429 or 5xx.
    Transient { status: Option<u16>, message: String },
    Fatal(GatewayError),
}

pub(crate) struct HttpBackend {
    client: reqwest::blocking::Client,
    base_url: String,
    api_key: Option<ApiKey>,
}

impl HttpBackend {
    pub fn new(config: &BackendConfig) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.request_timeout())
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self {
            client,
            base_url: config.base_url.trim_end_matches('/').to_string(),
            api_key: config.api_key.clone(),
        })
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value, AttemptError> {
        let mut req = self.client.post(format!("{}{}", self.base_url, path)).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key.expose());
        }
        let resp = req.send().map_err(|e| AttemptError::Transient {
            status: None,
            message: e.to_string(),
        })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| AttemptError::Transient {
            status: Some(status.as_u16()),
            message: e.to_string(),
        })?;
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(AttemptError::Transient {
                status: Some(status.as_u16()),
                message: text,
            });
        }
        if !status.is_success() {
            return Err(AttemptError::Fatal(GatewayError::BadStatus {
                code: status.as_u16(),
                body: text,
            }));
        }
        serde_json::from_str(&text)
            .map_err(|e| AttemptError::Fatal(GatewayError::MalformedResponse(e.to_string())))
    }

    pub fn chat_body(request: &ChatRequest) -> Value {
        let messages: Vec<Value> = request
            .messages
            .iter()
            .map(|m| json!({"role": m.role.as_str(), "content": m.content}))
            .collect();
        json!({
            "model": request.model_id,
            "messages": messages,
            "temperature": request.sampling.temperature,
            "top_p": request.sampling.top_p,
            "max_tokens": request.sampling.max_output_tokens,
        })
    }

    pub fn complete(&self, request: &ChatRequest) -> Result<Completion, AttemptError> {
        let body = self.post("/v1/chat/completions", &Self::chat_body(request))?;
        parse_chat_response(&body).map_err(AttemptError::Fatal)
    }

    pub fn embed(&self, model: &str, texts: &[String]) -> Result<Vec<Vec<f64>>, AttemptError> {
        let body = self.post("/v1/embeddings", &json!({"model": model, "input": texts}))?;
        parse_embedding_response(&body, texts.len()).map_err(AttemptError::Fatal)
    }
}

fn malformed(msg: &str) -> GatewayError {
    GatewayError::MalformedResponse(msg.to_string())
}

pub(crate) fn parse_chat_response(body: &Value) -> Result<Completion, GatewayError> {
    let choice = body
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| malformed("missing choices[0]"))?;
    let text = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing choices[0].message.content"))?
        .to_string();
    let finish_reason = match choice.get("finish_reason").and_then(Value::as_str) {
        Some("length") => FinishReason::Length,
        Some("stop") | None => FinishReason::Stop,
        Some(_) => FinishReason::Stop,
    };
    let usage = body.get("usage").map(|u| {
        let field = |k: &str| u.get(k).and_then(Value::as_u64).unwrap_or(0);
        Usage {
            prompt_tokens: field("prompt_tokens"),
            completion_tokens: field("completion_tokens"),
            total_tokens: field("total_tokens"),
        }
    });
    Ok(Completion { text, finish_reason, usage })
}

pub(crate) fn parse_embedding_response(body: &Value, expected: usize) -> Result<Vec<Vec<f64>>, GatewayError> {
    let data = body
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing data array"))?;
    if data.len() != expected {
        return Err(malformed(&format!("expected {expected} embeddings, got {}", data.len())));
    }
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(data.len());
    for (pos, item) in data.iter().enumerate() {
        let index = item.get("index").and_then(Value::as_u64).map_or(pos, |i| i as usize);
        let vec = item
            .get("embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("missing embedding"))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| malformed("non-numeric embedding value")))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push((index, vec));
    }
    rows.sort_by_key(|(i, _)| *i);
    Ok(rows.into_iter().map(|(_, v)| v).collect())
}
