use serde::{Deserialize, Serialize};

use super::{DefaultTokenizer, Tokenizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChunkingConfig {
    pub chunk_tokens: usize,
    pub overlap_tokens: usize,
    /// End each non-final window at the last sentence boundary inside it.
    pub sentence_snap: bool,
}

impl Default for ChunkingConfig {
    fn default() -> Self {
        Self {
            chunk_tokens: 512,
            overlap_tokens: 128,
            sentence_snap: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid chunking config: {0}")]
pub struct InvalidChunking(pub String);

impl ChunkingConfig {
    pub fn new(chunk_tokens: usize, overlap_tokens: usize) -> Result<Self, InvalidChunking> {
        let cfg = Self { chunk_tokens, overlap_tokens, sentence_snap: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), InvalidChunking> {
        if self.chunk_tokens == 0 {
            return Err(InvalidChunking("chunk_tokens must be positive".into()));
        }
        if self.overlap_tokens >= self.chunk_tokens {
            return Err(InvalidChunking(format!(
                "overlap_tokens ({}) must be smaller than chunk_tokens ({})",
                self.overlap_tokens, self.chunk_tokens
            )));
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.chunk_tokens - self.overlap_tokens
    }
}

/// Half-open range of token indices, serialized as `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

impl From<[usize; 2]> for TokenSpan {
    fn from([start, end]: [usize; 2]) -> Self {
        Self { start, end }
    }
}

impl From<TokenSpan> for [usize; 2] {
    fn from(span: TokenSpan) -> Self {
        [span.start, span.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub seq: usize,
    pub token_span: TokenSpan,
    pub text: String,
}

/// Fixed sliding windows over `n_tokens` token positions.
///
/// Window `i` starts at `i * stride` and is at most `chunk_tokens` long.
/// Emission stops with the first window that reaches the end, so no window
/// lies entirely inside its predecessor's overlap.
pub fn window_spans(n_tokens: usize, cfg: &ChunkingConfig) -> Vec<TokenSpan> {
    let stride = cfg.stride();
    let mut spans = Vec::new();
    let mut start = 0;
    while start < n_tokens {
        let end = (start + cfg.chunk_tokens).min(n_tokens);
        spans.push(TokenSpan { start, end });
        if end == n_tokens {
            break;
        }
        start += stride;
    }
    spans
}

fn is_sentence_end(token: &str) -> bool {
    matches!(token, "." | "!" | "?")
}

/// Splits one document into overlapping token windows.
pub fn chunk_document(doc_id: &str, text: &str, cfg: &ChunkingConfig) -> Result<Vec<Chunk>, InvalidChunking> {
    chunk_document_with(doc_id, text, cfg, &DefaultTokenizer)
}

pub fn chunk_document_with(
    doc_id: &str,
    text: &str,
    cfg: &ChunkingConfig,
    tokenizer: &dyn Tokenizer,
) -> Result<Vec<Chunk>, InvalidChunking> {
    cfg.validate()?;
    let tokens = tokenizer.tokenize(text);
    let stride = cfg.stride();
    let spans = window_spans(tokens.len(), cfg);
    let last = spans.len().saturating_sub(1);
    Ok(spans
        .into_iter()
        .enumerate()
        .map(|(seq, mut span)| {
            if cfg.sentence_snap && seq != last {
                // Shorten to a sentence end, but never below the next window's
                // start so the windows still cover every token.
                let floor = span.start + stride;
                if let Some(i) = (floor.saturating_sub(1)..span.end)
                    .rev()
                    .find(|&i| i + 1 >= floor && is_sentence_end(tokens[i].text(text)))
                {
                    span.end = i + 1;
                }
            }
            let text = text[tokens[span.start].start..tokens[span.end - 1].end].to_string();
            Chunk {
                doc_id: doc_id.to_string(),
                seq,
                token_span: span,
                text,
            }
        })
        .collect())
}
