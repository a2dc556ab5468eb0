use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{ComplexityProfile, Subspecialty};

pub const MIN_OPTIONS: usize = 2;
pub const MAX_OPTIONS: usize = 6;
pub const BOARD_OPTIONS: usize = 4;

/// How strictly question invariants are checked at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationProfile {
    /// Board-exam items: exactly four options.
    Board,
    /// Any item with 2 to 6 options.
    Generic,
}

impl std::str::FromStr for ValidationProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "board" => Ok(ValidationProfile::Board),
            "generic" => Ok(ValidationProfile::Generic),
            other => Err(format!("unknown validation profile {other:?}")),
        }
    }
}

/// One multiple-choice question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub exam_id: String,
    pub stem: String,
    pub options: Vec<String>,
    pub correct_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspecialty: Option<Subspecialty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<ComplexityProfile>,
}

impl Question {
    /// Checks the structural invariants, returning a human-readable reason on failure.
    pub fn validate(&self, profile: ValidationProfile) -> Result<(), String> {
        let n = self.options.len();
        if !(MIN_OPTIONS..=MAX_OPTIONS).contains(&n) {
            return Err(format!("expected {MIN_OPTIONS} to {MAX_OPTIONS} options, found {n}"));
        }
        if profile == ValidationProfile::Board && n != BOARD_OPTIONS {
            return Err(format!("board profile requires {BOARD_OPTIONS} options, found {n}"));
        }
        if self.correct_index >= n {
            return Err(format!("correct_index {} out of range for {n} options", self.correct_index));
        }
        let mut seen = HashSet::new();
        for (i, opt) in self.options.iter().enumerate() {
            if opt.trim().is_empty() {
                return Err(format!("option {} is empty", option_letter(i)));
            }
            if !seen.insert(opt.as_str()) {
                return Err(format!("option {} duplicates an earlier option", option_letter(i)));
            }
        }
        Ok(())
    }

    pub fn correct_letter(&self) -> char {
        option_letter(self.correct_index)
    }
}

/// `0 -> 'A'`, `1 -> 'B'`, ...
pub fn option_letter(index: usize) -> char {
    (b'A' + index as u8) as char
}

/// Inverse of [`option_letter`], case-insensitive.
pub fn letter_index(letter: char) -> Option<usize> {
    let upper = letter.to_ascii_uppercase();
    upper.is_ascii_uppercase().then(|| (upper as u8 - b'A') as usize)
}
