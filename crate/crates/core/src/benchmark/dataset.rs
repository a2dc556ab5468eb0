use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Question, ValidationProfile};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate question id {0:?}")]
    DuplicateId(String),
    #[error("question {id:?} violates profile: {reason}")]
    ProfileViolation { id: String, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub questions: Vec<Question>,
    pub validation_profile: ValidationProfile,
}

impl Dataset {
    /// Builds a dataset from already-constructed questions, enforcing every invariant.
    pub fn new(
        name: impl Into<String>,
        questions: Vec<Question>,
        profile: ValidationProfile,
    ) -> Result<Self, DatasetError> {
        let mut ids = HashSet::new();
        for q in &questions {
            q.validate(profile).map_err(|reason| DatasetError::ProfileViolation {
                id: q.id.clone(),
                reason,
            })?;
            if !ids.insert(q.id.as_str()) {
                return Err(DatasetError::DuplicateId(q.id.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            questions,
            validation_profile: profile,
        })
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.id == id)
    }

    /// Writes one JSON object per line in dataset order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for q in &self.questions {
            serde_json::to_writer(&mut out, q)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

/// Parses a line-delimited JSON dataset. Blank lines are skipped; parse order is kept.
pub fn parse_dataset<R: BufRead>(
    name: &str,
    source: R,
    profile: ValidationProfile,
) -> Result<Dataset, DatasetError> {
    let mut questions = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DatasetError::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let q: Question = serde_json::from_str(&line).map_err(|e| DatasetError::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        q.validate(profile).map_err(|reason| DatasetError::ProfileViolation {
            id: q.id.clone(),
            reason,
        })?;
        if !ids.insert(q.id.clone()) {
            return Err(DatasetError::DuplicateId(q.id));
        }
        questions.push(q);
    }
    Ok(Dataset {
        name: name.to_string(),
        questions,
        validation_profile: profile,
    })
}

pub fn load_dataset(
    path: &std::path::Path,
    profile: ValidationProfile,
) -> Result<Dataset, DatasetError> {
    let file = std::fs::File::open(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    parse_dataset(&name, std::io::BufReader::new(file), profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::{ComplexityProfile, Level, Subspecialty};
    use proptest::prelude::*;

    const VALID: &str = r#"{"id":"q1","exam_id":"2023-06","stem":"A 60-year-old woman...","options":["A","B","C","D"],"correct_index":2}"#;

    #[test]
    fn parses_single_valid_record() {
        let ds = parse_dataset("t", VALID.as_bytes(), ValidationProfile::Board).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.questions[0].correct_index, 2);
        assert_eq!(ds.questions[0].subspecialty, None);
    }

    #[test]
    fn correct_index_out_of_range_is_profile_violation() {
        let src = VALID.replace("\"correct_index\":2", "\"correct_index\":4");
        let err = parse_dataset("t", src.as_bytes(), ValidationProfile::Board).unwrap_err();
        assert!(matches!(err, DatasetError::ProfileViolation { .. }), "{err}");
    }

    #[test]
    fn missing_options_is_malformed() {
        let src = r#"{"id":"q1","exam_id":"e","stem":"s","correct_index":0}"#;
        let err = parse_dataset("t", src.as_bytes(), ValidationProfile::Generic).unwrap_err();
        assert!(matches!(err, DatasetError::MalformedRecord { line: 1, .. }), "{err}");
    }

    #[test]
    fn five_options_under_board_rejected() {
        let src = VALID.replace(r#"["A","B","C","D"]"#, r#"["A","B","C","D","E"]"#);
        let err = parse_dataset("t", src.as_bytes(), ValidationProfile::Board).unwrap_err();
        assert!(matches!(err, DatasetError::ProfileViolation { .. }));
        assert!(parse_dataset("t", src.as_bytes(), ValidationProfile::Generic).is_ok());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let src = format!("{VALID}\n\n{VALID}\n");
        let err = parse_dataset("t", src.as_bytes(), ValidationProfile::Board).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateId(id) if id == "q1"));
    }

    #[test]
    fn unknown_subspecialty_and_levels_rejected() {
        let src = VALID.replace("}", r#","subspecialty":"Neuro Stuff"}"#);
        assert!(matches!(
            parse_dataset("t", src.as_bytes(), ValidationProfile::Board).unwrap_err(),
            DatasetError::MalformedRecord { .. }
        ));
        let src = VALID.replace("}", r#","complexity":{"fkd":0,"cci":1,"rc":1}}"#);
        assert!(matches!(
            parse_dataset("t", src.as_bytes(), ValidationProfile::Board).unwrap_err(),
            DatasetError::MalformedRecord { .. }
        ));
    }

    #[test]
    fn optional_labels_parse() {
        let src = VALID.replace(
            "}",
            r#","subspecialty":"vascular neurology","complexity":{"fkd":3,"cci":2,"rc":1}}"#,
        );
        let ds = parse_dataset("t", src.as_bytes(), ValidationProfile::Board).unwrap();
        let q = &ds.questions[0];
        assert_eq!(q.subspecialty, Some(Subspecialty::Vascular));
        assert_eq!(q.complexity.unwrap().composite_score(), 6);
    }

    fn arb_question(idx: usize) -> impl Strategy<Value = Question> {
        (
            "[a-z]{1,8}",
            "[ -~]{0,40}",
            prop::collection::btree_set("[a-zA-Z0-9 ]{0,12}[a-z]", 2..=6),
            any::<prop::sample::Index>(),
            prop::option::of(prop::sample::select(Subspecialty::ALL.to_vec())),
            prop::option::of((1u8..=3, 1u8..=3, 1u8..=3)),
        )
            .prop_map(move |(exam, stem, opts, pick, sub, cx)| {
                let options: Vec<String> = opts.into_iter().collect();
                Question {
                    id: format!("q{idx}"),
                    exam_id: exam,
                    stem,
                    correct_index: pick.index(options.len()),
                    options,
                    subspecialty: sub,
                    complexity: cx.map(|(a, b, c)| {
                        ComplexityProfile::new(
                            Level::new(a).unwrap(),
                            Level::new(b).unwrap(),
                            Level::new(c).unwrap(),
                        )
                    }),
                }
            })
    }

    proptest! {
        #[test]
        fn parse_serialize_round_trip(qs in (0usize..8).prop_flat_map(|n| {
            (0..n).map(arb_question).collect::<Vec<_>>()
        })) {
            let ds = Dataset::new("rt", qs, ValidationProfile::Generic).unwrap();
            let text = ds.to_jsonl_string();
            let back = parse_dataset("rt", text.as_bytes(), ValidationProfile::Generic).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
