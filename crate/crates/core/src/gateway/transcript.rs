use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::Usage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExchangeKind {
    Chat,
    Embed,
}

/// One request/response attempt as written to the transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub call_id: u64,
    pub attempt: u32,
    pub kind: ExchangeKind,
    pub model: String,
    pub request_digest: String,
    pub request: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<u16>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
    pub started_at: String,
    pub finished_at: String,
}

/// Append-only exchange log, kept in memory and optionally mirrored to a JSON-lines file.
pub struct Transcript {
    entries: Mutex<Vec<TranscriptEntry>>,
    sink: Mutex<Option<BufWriter<File>>>,
    next_call: AtomicU64,
    secret: Option<String>,
}

const REDACTED: &str = "[REDACTED]";

impl Transcript {
    pub fn in_memory(secret: Option<String>) -> Self {
        Self {
            entries: Mutex::new(Vec::new()),
            sink: Mutex::new(None),
            next_call: AtomicU64::new(0),
            secret: secret.filter(|s| !s.is_empty()),
        }
    }

    pub fn with_file(path: &Path, secret: Option<String>) -> std::io::Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let t = Self::in_memory(secret);
        *t.sink.lock().unwrap() = Some(BufWriter::new(file));
        Ok(t)
    }

    pub fn next_call_id(&self) -> u64 {
        self.next_call.fetch_add(1, Ordering::SeqCst)
    }

    fn redact(&self, s: &str) -> String {
        match &self.secret {
            Some(secret) => s.replace(secret.as_str(), REDACTED),
            None => s.to_string(),
        }
    }

    pub fn append(&self, mut entry: TranscriptEntry) {
        if self.secret.is_some() {
            entry.response = entry.response.map(|r| self.redact(&r));
            entry.error = entry.error.map(|r| self.redact(&r));
            let req = self.redact(&entry.request.to_string());
            entry.request = serde_json::from_str(&req).unwrap_or(serde_json::Value::String(req));
        }
        // Hold the entries lock across the file write so both views share one order.
        let mut entries = self.entries.lock().unwrap();
        if let Some(sink) = self.sink.lock().unwrap().as_mut() {
            let line = serde_json::to_string(&entry).expect("entry serializes");
            // A failing sink must not fail the model call; the in-memory copy remains.
            let _ = writeln!(sink, "{line}").and_then(|_| sink.flush());
        }
        entries.push(entry);
    }

    pub fn entries(&self) -> Vec<TranscriptEntry> {
        self.entries.lock().unwrap().clone()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of distinct calls logged (an entry is written per attempt).
    pub fn call_count(&self) -> usize {
        let entries = self.entries.lock().unwrap();
        let mut ids: Vec<u64> = entries.iter().map(|e| e.call_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
