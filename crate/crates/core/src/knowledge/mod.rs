//! Retrieval substrate: tokenization, fixed sliding-window chunking, corpus
//! ingestion, and an exact (brute-force) cosine index with a checksummed
//! binary file format.

mod chunk;
mod corpus;
mod index;
mod persist;
mod tokenize;

pub use chunk::{chunk_document, chunk_document_with, window_spans, Chunk, ChunkingConfig, InvalidChunking, TokenSpan};
pub use corpus::{chunk_corpus, read_chunks, read_corpus, write_chunks, Document};
pub use index::{build_index, corpus_digest, rank_order, IndexEntry, IndexError, ScoredChunk, VectorIndex, UNIT_NORM_TOLERANCE};
pub use persist::{decode_index, encode_index, open_index, persist_index, FORMAT_VERSION, MAGIC};
pub use tokenize::{count_tokens, prefix_tokens, DefaultTokenizer, Token, Tokenizer};
