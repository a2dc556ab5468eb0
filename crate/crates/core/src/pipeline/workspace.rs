//! Per-run file workspace backing the SaveFile / ReadFile tools.
//!
//! Every save appends a record (name, SHA-256, size) to an in-memory manifest
//! and to `manifest.jsonl` in the workspace root. Reads return token-bounded
//! slices whose concatenation is the original file.

use std::io::Write;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;
use crate::knowledge::{DefaultTokenizer, Tokenizer};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error("path {0:?} escapes the workspace")]
    PathEscape(String),
    #[error("workspace file {0:?} not found")]
    NotFound(String),
    #[error("slice {index} out of range for {name:?} ({total} slices)")]
    SliceOutOfRange { name: String, index: usize, total: usize },
    #[error("workspace {0} already exists")]
    AlreadyExists(PathBuf),
    #[error("workspace file {0:?} does not match its manifest digest")]
    DigestMismatch(String),
    #[error("workspace i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub seq: usize,
    pub name: String,
    pub digest: String,
    pub bytes: usize,
}

/// One ReadFile result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileSlice {
    pub content: String,
    pub index: usize,
    pub total: usize,
    pub tokens: usize,
}

impl FileSlice {
    pub fn is_final(&self) -> bool {
        self.index + 1 == self.total
    }
}

pub struct Workspace {
    root: PathBuf,
    manifest: Vec<ManifestRecord>,
    read_chunk_tokens: usize,
}

/// Maps an arbitrary id onto a single safe path component.
pub fn sanitize_component(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect();
    match s.as_str() {
        "" | "." | ".." => format!("_{s}"),
        _ => s,
    }
}

fn check_name(name: &str) -> Result<(), WorkspaceError> {
    let path = Path::new(name);
    let ok = !name.is_empty()
        && !name.contains('\\')
        && name != MANIFEST_FILE
        && path.components().all(|c| matches!(c, Component::Normal(_)));
    if ok {
        Ok(())
    } else {
        Err(WorkspaceError::PathEscape(name.to_string()))
    }
}

impl Workspace {
    /// Creates `base/<question>/<run>`; the directory must not already hold files.
    pub fn create(base: &Path, question_id: &str, run_id: &str, read_chunk_tokens: usize) -> Result<Self, WorkspaceError> {
        let root = base.join(sanitize_component(question_id)).join(sanitize_component(run_id));
        if root.exists() && std::fs::read_dir(&root)?.next().is_some() {
            return Err(WorkspaceError::AlreadyExists(root));
        }
        std::fs::create_dir_all(&root)?;
        Ok(Self { root, manifest: Vec::new(), read_chunk_tokens: read_chunk_tokens.max(1) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &[ManifestRecord] {
        &self.manifest
    }

    pub fn contains(&self, name: &str) -> bool {
        self.manifest.iter().any(|r| r.name == name)
    }

    /// SaveFile: writes `content` to `name` (relative, no traversal) and records it.
    pub fn save_file(&mut self, name: &str, content: &str) -> Result<PathBuf, WorkspaceError> {
        check_name(name)?;
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, content)?;
        let record = ManifestRecord {
            seq: self.manifest.len(),
            name: name.to_string(),
            digest: sha256_hex(content),
            bytes: content.len(),
        };
        let mut log = std::fs::OpenOptions::new().create(true).append(true).open(self.root.join(MANIFEST_FILE))?;
        writeln!(log, "{}", serde_json::to_string(&record).expect("record serializes"))?;
        self.manifest.push(record);
        Ok(path)
    }

    fn load(&self, name: &str) -> Result<String, WorkspaceError> {
        check_name(name)?;
        match std::fs::read_to_string(self.root.join(name)) {
            Ok(s) => Ok(s),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(WorkspaceError::NotFound(name.to_string())),
            Err(e) => Err(e.into()),
        }
    }

    /// Byte offsets where each slice starts.
    fn slice_starts(&self, text: &str) -> Vec<usize> {
        let tokens = DefaultTokenizer.tokenize(text);
        let mut starts = vec![0];
        starts.extend(tokens.iter().step_by(self.read_chunk_tokens).skip(1).map(|t| t.start));
        starts
    }

    /// ReadFile: the `slice_index`-th window of at most `read_chunk_tokens` tokens.
    pub fn read_file(&self, name: &str, slice_index: usize) -> Result<FileSlice, WorkspaceError> {
        let text = self.load(name)?;
        let starts = self.slice_starts(&text);
        let total = starts.len();
        if slice_index >= total {
            return Err(WorkspaceError::SliceOutOfRange { name: name.to_string(), index: slice_index, total });
        }
        let end = starts.get(slice_index + 1).copied().unwrap_or(text.len());
        let content = text[starts[slice_index]..end].to_string();
        let tokens = DefaultTokenizer.count(&content);
        Ok(FileSlice { content, index: slice_index, total, tokens })
    }

    /// Every slice of `name`, in order.
    pub fn read_all(&self, name: &str) -> Result<Vec<FileSlice>, WorkspaceError> {
        let first = self.read_file(name, 0)?;
        let mut out = vec![first];
        for i in 1..out[0].total {
            out.push(self.read_file(name, i)?);
        }
        Ok(out)
    }

    /// Checks that the latest record of every name exists on disk with its recorded digest.
    pub fn verify(&self) -> Result<(), WorkspaceError> {
        verify_manifest(&self.root, &self.manifest)
    }
}

pub fn verify_manifest(root: &Path, manifest: &[ManifestRecord]) -> Result<(), WorkspaceError> {
    let mut latest = std::collections::BTreeMap::new();
    for r in manifest {
        latest.insert(r.name.as_str(), r);
    }
    for (name, record) in latest {
        let bytes = match std::fs::read(root.join(name)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(WorkspaceError::NotFound(name.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        if sha256_hex(&bytes) != record.digest {
            return Err(WorkspaceError::DigestMismatch(name.to_string()));
        }
    }
    Ok(())
}

/// Re-reads `manifest.jsonl` from a finished workspace and verifies it.
pub fn verify_workspace_dir(root: &Path) -> Result<Vec<ManifestRecord>, WorkspaceError> {
    let text = std::fs::read_to_string(root.join(MANIFEST_FILE))?;
    let mut records = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let r: ManifestRecord = serde_json::from_str(line)
            .map_err(|e| WorkspaceError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
        records.push(r);
    }
    if records.iter().enumerate().any(|(i, r)| r.seq != i) {
        return Err(WorkspaceError::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "manifest sequence numbers are not contiguous",
        )));
    }
    verify_manifest(root, &records)?;
    Ok(records)
}
