//! Adapter for MedQA-style records (`question`, lettered `options`, answer letter).

use std::collections::BTreeMap;

use serde::Deserialize;

use super::Question;

#[derive(Debug, Clone, Deserialize)]
pub struct MedQaRecord {
    pub question: String,
    pub options: BTreeMap<String, String>,
    /// Answer letter. MedQA files carry it as `answer_idx`; `answer` holds the option text.
    #[serde(default)]
    pub answer_idx: Option<String>,
    #[serde(default)]
    pub answer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MedQaError {
    #[error("answer key {0:?} does not name an option")]
    UnknownAnswerKey(String),
    #[error("option {0:?} is empty")]
    EmptyOption(String),
}

impl MedQaRecord {
    fn answer_letter(&self) -> String {
        if let Some(idx) = &self.answer_idx {
            return idx.trim().to_string();
        }
        self.answer.as_deref().unwrap_or_default().trim().to_string()
    }
}

/// Converts a MedQA record into a [`Question`]. Options are re-indexed in key order.
pub fn adapt_medqa(
    record: &MedQaRecord,
    id: impl Into<String>,
    exam_id: impl Into<String>,
) -> Result<Question, MedQaError> {
    let mut options = Vec::with_capacity(record.options.len());
    let mut keys = Vec::with_capacity(record.options.len());
    for (key, text) in &record.options {
        if text.trim().is_empty() {
            return Err(MedQaError::EmptyOption(key.clone()));
        }
        keys.push(key.trim().to_ascii_uppercase());
        options.push(text.clone());
    }
    let letter = record.answer_letter();
    let correct_index = keys
        .iter()
        .position(|k| k.eq_ignore_ascii_case(&letter))
        .ok_or_else(|| MedQaError::UnknownAnswerKey(letter.clone()))?;
    Ok(Question {
        id: id.into(),
        exam_id: exam_id.into(),
        stem: record.question.clone(),
        options,
        correct_index,
        subspecialty: None,
        complexity: None,
    })
}
