use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::Chunk;
use crate::digest::sha256_hex;
use crate::gateway::{Embedder, GatewayError};

/// Allowed deviation from unit norm for stored (f32) vectors.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-5;

const EMBED_BATCH: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("cannot build an index from zero chunks")]
    EmptyCorpus,
    #[error("embedding failed: {0}")]
    Embedding(#[from] GatewayError),
    #[error("vector {entry} has dimension {got}, index dimension is {expected}")]
    DimensionMismatch { entry: usize, expected: usize, got: usize },
    #[error("vector {entry} is not unit length (norm {norm})")]
    NotUnitNorm { entry: usize, norm: f64 },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported index format (magic/version {found})")]
    FormatVersionMismatch { found: String },
    #[error("index file checksum mismatch")]
    ChecksumMismatch,
    #[error("malformed data: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub chunk: Chunk,
    pub vector: Vec<f32>,
}

/// A retrieval hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredChunk {
    /// Position of the entry in the index.
    pub entry: usize,
    pub chunk: Chunk,
    pub score: f64,
}

impl ScoredChunk {
    pub fn chunk_ref(&self) -> (String, usize) {
        (self.chunk.doc_id.clone(), self.chunk.seq)
    }
}

/// Immutable exact-cosine index over embedded chunks.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    dimension: usize,
    entries: Vec<IndexEntry>,
    digest: String,
    norms: Vec<f64>,
}

/// Digest over the chunk texts, each length-prefixed, in entry order.
pub fn corpus_digest<'a>(texts: impl IntoIterator<Item = &'a str>) -> String {
    let mut buf = Vec::new();
    for t in texts {
        buf.extend_from_slice(&(t.len() as u64).to_le_bytes());
        buf.extend_from_slice(t.as_bytes());
    }
    sha256_hex(buf)
}

pub(crate) fn norm_f32(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
}

/// Total order used for every result list: score desc, then doc_id asc, then seq asc.
pub fn rank_order(a_score: f64, a: &Chunk, b_score: f64, b: &Chunk) -> Ordering {
    b_score
        .total_cmp(&a_score)
        .then_with(|| a.doc_id.cmp(&b.doc_id))
        .then_with(|| a.seq.cmp(&b.seq))
}

impl VectorIndex {
    /// Validates and assembles an index from precomputed entries.
    pub fn from_parts(dimension: usize, entries: Vec<IndexEntry>) -> Result<Self, IndexError> {
        if entries.is_empty() {
            return Err(IndexError::EmptyCorpus);
        }
        let mut norms = Vec::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.vector.len() != dimension {
                return Err(IndexError::DimensionMismatch { entry: i, expected: dimension, got: e.vector.len() });
            }
            let norm = norm_f32(&e.vector);
            if !((norm - 1.0).abs() <= UNIT_NORM_TOLERANCE) {
                return Err(IndexError::NotUnitNorm { entry: i, norm });
            }
            norms.push(norm);
        }
        let digest = corpus_digest(entries.iter().map(|e| e.chunk.text.as_str()));
        Ok(Self { dimension, entries, digest, norms })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Cosine similarity between `query` and entry `i`, clamped to `[-1, 1]`.
    pub fn cosine(&self, query: &[f64], query_norm: f64, i: usize) -> f64 {
        let v = &self.entries[i].vector;
        let dot: f64 = query.iter().zip(v).map(|(q, &x)| q * f64::from(x)).sum();
        (dot / (query_norm * self.norms[i])).clamp(-1.0, 1.0)
    }

    /// Exact top-`k` by cosine similarity over every entry.
    pub fn search(&self, query: &[f64], k: usize) -> Result<Vec<ScoredChunk>, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        if query.len() != self.dimension {
            return Err(IndexError::DimensionMismatch { entry: usize::MAX, expected: self.dimension, got: query.len() });
        }
        let qn = query.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(qn > 0.0) {
            return Err(IndexError::Embedding(GatewayError::DegenerateVector));
        }
        let mut scored: Vec<(f64, usize)> = (0..self.len()).map(|i| (self.cosine(query, qn, i), i)).collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| {
            rank_order(a.0, &self.entries[a.1].chunk, b.0, &self.entries[b.1].chunk).then(a.1.cmp(&b.1))
        };
        let k = k.min(scored.len());
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_unstable_by(cmp);
        Ok(scored
            .into_iter()
            .map(|(score, entry)| ScoredChunk { entry, chunk: self.entries[entry].chunk.clone(), score })
            .collect())
    }

    /// Embeds `query_text` and returns the exact top-`k`.
    pub fn retrieve(&self, query_text: &str, embedder: &dyn Embedder, k: usize) -> Result<Vec<ScoredChunk>, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        let q = embedder.embed(&[query_text.to_string()])?.pop().ok_or(GatewayError::EmptyInput)?;
        self.search(&q, k)
    }
}

/// Embeds every chunk (in batches) and builds the index in chunk order.
pub fn build_index(chunks: Vec<Chunk>, embedder: &dyn Embedder) -> Result<VectorIndex, IndexError> {
    if chunks.is_empty() {
        return Err(IndexError::EmptyCorpus);
    }
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(chunks.len());
    for batch in chunks.chunks(EMBED_BATCH) {
        let texts: Vec<String> = batch.iter().map(|c| c.text.clone()).collect();
        let got = embedder.embed(&texts)?;
        if got.len() != texts.len() {
            return Err(IndexError::Malformed(format!("embedder returned {} vectors for {} texts", got.len(), texts.len())));
        }
        vectors.extend(got);
    }
    let dimension = vectors[0].len();
    let entries = chunks
        .into_iter()
        .zip(vectors)
        .map(|(chunk, v)| IndexEntry { chunk, vector: v.into_iter().map(|x| x as f32).collect() })
        .collect();
    VectorIndex::from_parts(dimension, entries)
}
