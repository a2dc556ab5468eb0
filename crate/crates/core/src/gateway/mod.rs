//! Uniform access to chat-completion and embedding endpoints.
//!
//! A [`Gateway`] wraps either the OpenAI-compatible HTTP backend or the
//! scripted [`MockBackend`], and adds retries with jittered exponential
//! backoff, an optional shared rate limit, and an append-only transcript of
//! every attempt. Embeddings leave the gateway L2-normalized.

mod http;
mod mock;
mod ratelimit;
mod transcript;
mod types;

use std::time::Duration;

use rand::Rng;
use serde_json::json;

pub use mock::{MockBackend, MockEmbedding, MockRule, MockScript};
pub use ratelimit::TokenBucket;
pub use transcript::{ExchangeKind, Transcript, TranscriptEntry};
pub use types::{
    ApiKey, BackendConfig, BackendKind, ChatRequest, Completion, FinishReason, GatewayError, Message, Role,
    SamplingParams, Usage, DEFAULT_API_KEY_ENV,
};

use http::{AttemptError, HttpBackend};
pub use transcript::now_rfc3339;

/// Anything that maps texts to unit-norm vectors of one fixed dimension.
pub trait Embedder: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError>;
}

/// Scales `v` to unit L2 norm.
pub fn normalize(mut v: Vec<f64>) -> Result<Vec<f64>, GatewayError> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(GatewayError::DegenerateVector);
    }
    for x in &mut v {
        *x /= norm;
    }
    Ok(v)
}

enum Backend {
    Http(HttpBackend),
    Mock(MockBackend),
}

pub struct Gateway {
    config: BackendConfig,
    backend: Backend,
    transcript: Transcript,
    limiter: Option<TokenBucket>,
}

impl Gateway {
    /// Builds a gateway from configuration. Mock backends load their script from `config.mock_script`.
    pub fn new(config: BackendConfig) -> Result<Self, GatewayError> {
        config.validate().map_err(GatewayError::Config)?;
        let backend = match config.kind {
            BackendKind::Http => Backend::Http(HttpBackend::new(&config)?),
            BackendKind::Mock => {
                let path = config
                    .mock_script
                    .as_ref()
                    .ok_or_else(|| GatewayError::Config("mock backend requires mock_script".into()))?;
                Backend::Mock(MockBackend::new(MockScript::load(path)?)?)
            }
        };
        Self::assemble(config, backend)
    }

    /// A mock gateway over an in-memory script.
    pub fn mock(script: MockScript) -> Result<Self, GatewayError> {
        let config = BackendConfig::default();
        Self::assemble(config, Backend::Mock(MockBackend::new(script)?))
    }

    fn assemble(config: BackendConfig, backend: Backend) -> Result<Self, GatewayError> {
        let secret = config.api_key.as_ref().map(|k| k.expose().to_string());
        let transcript = match &config.transcript_path {
            Some(path) => Transcript::with_file(path, secret)
                .map_err(|e| GatewayError::Config(format!("opening transcript {}: {e}", path.display())))?,
            None => Transcript::in_memory(secret),
        };
        let limiter = config.rate_limit_per_minute.map(TokenBucket::per_minute);
        Ok(Self { config, backend, transcript, limiter })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn complete(&self, request: &ChatRequest) -> Result<Completion, GatewayError> {
        if request.messages.is_empty() {
            return Err(GatewayError::InvalidRequest("chat request has no messages".into()));
        }
        request.sampling.validate().map_err(GatewayError::InvalidRequest)?;
        let logged = json!({"messages": request.messages, "sampling": request.sampling});
        self.drive(ExchangeKind::Chat, &request.model_id, request.digest(), logged, || match &self.backend {
            Backend::Http(h) => h.complete(request).map(|c| {
                let shown = c.text.clone();
                let usage = c.usage;
                (c, shown, usage)
            }),
            Backend::Mock(m) => m
                .complete(request)
                .map(|c| {
                    let shown = c.text.clone();
                    (c, shown, None)
                })
                .map_err(AttemptError::Fatal),
        })
    }

    pub fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        if texts.is_empty() || texts.iter().any(|t| t.trim().is_empty()) {
            return Err(GatewayError::EmptyInput);
        }
        let model = self.config.embedding_model.clone();
        let digest = crate::digest::json_digest(&json!({"model": model, "input": texts}));
        let logged = json!({"input_count": texts.len(), "input_digest": crate::digest::json_digest(texts)});
        let raw = self.drive(ExchangeKind::Embed, &model, digest, logged, || {
            let vectors = match &self.backend {
                Backend::Http(h) => h.embed(&model, texts)?,
                Backend::Mock(m) => texts
                    .iter()
                    .map(|t| m.embed_one(t))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(AttemptError::Fatal)?,
            };
            let shown = format!("{} vector(s)", vectors.len());
            Ok((vectors, shown, None))
        })?;
        let dim = raw[0].len();
        if let Some(bad) = raw.iter().find(|v| v.len() != dim) {
            return Err(GatewayError::DimensionMismatch { expected: dim, got: bad.len() });
        }
        raw.into_iter().map(normalize).collect()
    }

    /// Runs `attempt` with retries on transient failures, logging every attempt.
    fn drive<T>(
        &self,
        kind: ExchangeKind,
        model: &str,
        digest: String,
        request: serde_json::Value,
        attempt: impl Fn() -> Result<(T, String, Option<Usage>), AttemptError>,
    ) -> Result<T, GatewayError> {
        let call_id = self.transcript.next_call_id();
        let max_attempts = match self.backend {
            Backend::Http(_) => self.config.max_retries + 1,
            Backend::Mock(_) => 1,
        };
        let mut n = 0;
        loop {
            if let Some(limiter) = &self.limiter {
                limiter.acquire();
            }
            let started_at = now_rfc3339();
            let result = attempt();
            let mut entry = TranscriptEntry {
                call_id,
                attempt: n,
                kind,
                model: model.to_string(),
                request_digest: digest.clone(),
                request: request.clone(),
                response: None,
                error: None,
                status: None,
                usage: None,
                started_at,
                finished_at: now_rfc3339(),
            };
            n += 1;
            match result {
                Ok((value, shown, usage)) => {
                    entry.response = Some(shown);
                    entry.usage = usage;
                    self.transcript.append(entry);
                    return Ok(value);
                }
                Err(AttemptError::Fatal(err)) => {
                    if let GatewayError::BadStatus { code, .. } = &err {
                        entry.status = Some(*code);
                    }
                    entry.error = Some(err.to_string());
                    self.transcript.append(entry);
                    return Err(err);
                }
                Err(AttemptError::Transient { status, message }) => {
                    entry.status = status;
                    entry.error = Some(message.clone());
                    self.transcript.append(entry);
                    if n >= max_attempts {
                        return Err(match status {
                            Some(code) => GatewayError::BadStatus { code, body: message },
                            None => GatewayError::Transport { attempts: n, message },
                        });
                    }
                    std::thread::sleep(self.backoff(n - 1));
                }
            }
        }
    }

    /// Full jitter: uniform in `[0, initial * 2^retry]`.
    fn backoff(&self, retry: u32) -> Duration {
        let ceiling = self.config.backoff_initial_ms.saturating_mul(1u64 << retry.min(20));
        if ceiling == 0 {
            return Duration::ZERO;
        }
        Duration::from_millis(rand::thread_rng().gen_range(0..=ceiling))
    }
}

impl Embedder for Gateway {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        Gateway::embed(self, texts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use http::test_server;

    fn ok_body(text: &str) -> String {
        json!({"choices": [{"message": {"role": "assistant", "content": text}, "finish_reason": "stop"}]}).to_string()
    }

    fn http_gateway(url: &str, retries: u32) -> Gateway {
        let mut cfg = BackendConfig::http(url);
        cfg.max_retries = retries;
        cfg.backoff_initial_ms = 1;
        cfg.request_timeout_ms = 5_000;
        Gateway::new(cfg).unwrap()
    }

    fn req(text: &str) -> ChatRequest {
        ChatRequest::new("model-x", vec![Message::user(text)], SamplingParams::default())
    }

    #[test]
    fn retries_server_errors_then_succeeds() {
        let server = test_server::serve(vec![
            (500, "{}".into()),
            (500, "{}".into()),
            (200, ok_body("B")),
        ]);
        let gw = http_gateway(&server.url, 3);
        let c = gw.complete(&req("hello")).unwrap();
        assert_eq!(c.text, "B");
        let entries = gw.transcript().entries();
        assert_eq!(entries.len(), 3);
        assert_eq!(entries.iter().map(|e| e.attempt).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(entries[0].status, Some(500));
        assert_eq!(gw.transcript().call_count(), 1);
        let reqs = server.requests.lock().unwrap().clone();
        assert!(reqs[0].starts_with("POST /v1/chat/completions"));
        assert!(reqs[0].contains("\"top_p\":0.9"));
        server.join();
    }

    #[test]
    fn exhausted_retries_report_status() {
        let server = test_server::serve(vec![(503, "busy".into()), (503, "busy".into())]);
        let gw = http_gateway(&server.url, 1);
        let err = gw.complete(&req("x")).unwrap_err();
        assert_eq!(err, GatewayError::BadStatus { code: 503, body: "busy".into() });
        assert_eq!(gw.transcript().len(), 2);
        server.join();
    }

    #[test]
    fn client_errors_are_not_retried() {
        let server = test_server::serve(vec![(400, "bad".into())]);
        let gw = http_gateway(&server.url, 3);
        assert!(matches!(gw.complete(&req("x")), Err(GatewayError::BadStatus { code: 400, .. })));
        assert_eq!(gw.transcript().len(), 1);
        server.join();
    }

    #[test]
    fn connection_refused_is_transport_error() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        drop(listener);
        let gw = http_gateway(&url, 2);
        match gw.complete(&req("x")) {
            Err(GatewayError::Transport { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(gw.transcript().len(), 3);
    }

    #[test]
    fn api_key_sent_as_bearer_and_redacted() {
        let server = test_server::serve(vec![(200, ok_body("echo sk-test-123"))]);
        let mut cfg = BackendConfig::http(&server.url);
        cfg.api_key = Some(ApiKey::new("sk-test-123"));
        let gw = Gateway::new(cfg).unwrap();
        gw.complete(&req("x")).unwrap();
        let reqs = server.requests.lock().unwrap().clone();
        assert!(reqs[0].to_ascii_lowercase().contains("authorization: bearer sk-test-123"));
        let logged = serde_json::to_string(&gw.transcript().entries()).unwrap();
        assert!(!logged.contains("sk-test-123"));
        assert!(format!("{:?}", gw.config()).contains("REDACTED"));
        server.join();
    }

    #[test]
    fn http_embeddings_normalized_and_ragged_rejected() {
        let body = json!({"data": [{"index": 0, "embedding": [3.0, 4.0]}, {"index": 1, "embedding": [0.0, 2.0]}]});
        let server = test_server::serve(vec![(200, body.to_string())]);
        let gw = http_gateway(&server.url, 0);
        let v = gw.embed(&["a".into(), "b".into()]).unwrap();
        assert!((v[0][0] - 0.6).abs() < 1e-12 && (v[1][1] - 1.0).abs() < 1e-12);
        let reqs = server.requests.lock().unwrap().clone();
        assert!(reqs[0].starts_with("POST /v1/embeddings"));
        assert!(reqs[0].contains("bge-large-en-v1.5"));
        server.join();

        let ragged = json!({"data": [{"embedding": [1.0, 0.0]}, {"embedding": [1.0]}]});
        let server = test_server::serve(vec![(200, ragged.to_string())]);
        let gw = http_gateway(&server.url, 0);
        assert!(matches!(
            gw.embed(&["a".into(), "b".into()]),
            Err(GatewayError::DimensionMismatch { .. })
        ));
        server.join();
    }

    #[test]
    fn mock_echo_and_unmatched() {
        let gw = Gateway::mock(MockScript {
            rules: vec![MockRule::pattern("echo:*", "{{1}}")],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(gw.complete(&req("echo:payload")).unwrap().text, "payload");
        assert!(matches!(gw.complete(&req("nope")), Err(GatewayError::MockUnmatched(_))));
        assert_eq!(gw.transcript().len(), 2);
        assert_eq!(gw.transcript().call_count(), 2);
    }

    #[test]
    fn mock_is_idempotent() {
        let gw = Gateway::mock(MockScript {
            rules: vec![MockRule::contains(&["q"], "A")],
            ..Default::default()
        })
        .unwrap();
        let a = gw.complete(&req("q")).unwrap();
        let b = gw.complete(&req("q")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mock_embed_contract() {
        let gw = Gateway::mock(MockScript::default()).unwrap();
        assert_eq!(gw.embed(&["".into()]), Err(GatewayError::EmptyInput));
        assert_eq!(gw.embed(&[]), Err(GatewayError::EmptyInput));
        let v = gw.embed(&["a".into(), "a".into()]).unwrap();
        assert_eq!(v[0], v[1]);
        let norm = v[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
        let three = gw.embed(&["x".into(), "y".into(), "z".into()]).unwrap();
        assert_eq!(three.len(), 3);
        assert!(three.iter().all(|v| v.len() == 64));
    }

    #[test]
    fn empty_chat_request_rejected() {
        let gw = Gateway::mock(MockScript::default()).unwrap();
        let r = ChatRequest::new("m", vec![], SamplingParams::default());
        assert!(matches!(gw.complete(&r), Err(GatewayError::InvalidRequest(_))));
    }

    #[test]
    fn concurrent_calls_all_logged() {
        let gw = Gateway::mock(MockScript {
            rules: vec![MockRule::pattern("*", "ok")],
            ..Default::default()
        })
        .unwrap();
        std::thread::scope(|s| {
            for i in 0..8 {
                let gw = &gw;
                s.spawn(move || {
                    for j in 0..10 {
                        gw.complete(&req(&format!("{i}-{j}"))).unwrap();
                    }
                });
            }
        });
        assert_eq!(gw.transcript().len(), 80);
        assert_eq!(gw.transcript().call_count(), 80);
    }

    proptest::proptest! {
        #[test]
        fn mock_embeddings_always_unit(texts in proptest::collection::vec("[a-zA-Z ]{0,30}[a-z]", 1..6)) {
            let gw = Gateway::mock(MockScript::default()).unwrap();
            for v in gw.embed(&texts).unwrap() {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                proptest::prop_assert!((norm - 1.0).abs() < 1e-9);
            }
        }
    }
}
