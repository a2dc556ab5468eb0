#![allow(dead_code)]

use std::path::{Path, PathBuf};

use neuroqa::knowledge::ChunkingConfig;
use neuroqa::runner::{index_chunks, ingest, RunConfig};

pub fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy")
}

/// Chunks and indexes the toy corpus into `dir`, returning the index path.
pub fn build_toy_index(dir: &Path) -> PathBuf {
    let chunks = dir.join("chunks.jsonl");
    let n = ingest(&toy().join("corpus"), &chunks, &ChunkingConfig::default()).unwrap();
    assert_eq!(n, 10);
    let config = RunConfig::load(&toy().join("config.json")).unwrap().config;
    let index = dir.join("toy.idx");
    index_chunks(&chunks, &index, config.backend).unwrap();
    index
}
