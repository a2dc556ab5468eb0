//! Corpus ingestion: a directory of UTF-8 text files, one document per file.

use std::io::{BufRead, Write};
use std::path::Path;

use super::{chunk_document_with, Chunk, ChunkingConfig, Tokenizer};
use crate::knowledge::IndexError;

/// One document with its id (path relative to the corpus root, `/`-separated).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
}

/// Reads every regular, non-hidden file under `root` in sorted path order.
pub fn read_corpus(root: &Path) -> Result<Vec<Document>, IndexError> {
    let mut docs = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
    for entry in walker {
        let entry = entry.map_err(|e| IndexError::Io(std::io::Error::other(e.to_string())))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).expect("walkdir yields paths under root");
        let doc_id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        let bytes = std::fs::read(entry.path())?;
        let text = String::from_utf8(bytes)
            .map_err(|_| IndexError::Malformed(format!("{doc_id} is not valid UTF-8")))?;
        docs.push(Document { doc_id, text });
    }
    Ok(docs)
}

pub fn chunk_corpus(
    docs: &[Document],
    cfg: &ChunkingConfig,
    tokenizer: &dyn Tokenizer,
) -> Result<Vec<Chunk>, IndexError> {
    let mut chunks = Vec::new();
    for doc in docs {
        chunks.extend(
            chunk_document_with(&doc.doc_id, &doc.text, cfg, tokenizer)
                .map_err(|e| IndexError::Malformed(e.to_string()))?,
        );
    }
    Ok(chunks)
}

pub fn write_chunks<W: Write>(chunks: &[Chunk], mut out: W) -> std::io::Result<()> {
    for c in chunks {
        serde_json::to_writer(&mut out, c)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_chunks<R: BufRead>(input: R) -> Result<Vec<Chunk>, IndexError> {
    let mut chunks = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        chunks.push(
            serde_json::from_str(&line)
                .map_err(|e| IndexError::Malformed(format!("chunks line {}: {e}", i + 1)))?,
        );
    }
    Ok(chunks)
}
