use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::stats::pearson;
use super::{EvalError, EvalResult, MetricsRecord};
use crate::benchmark::{Dataset, Dimension, Question};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BreakdownKey {
    Subspecialty,
    Complexity(Dimension),
    Exam,
}

impl BreakdownKey {
    pub const ALL: [BreakdownKey; 5] = [
        BreakdownKey::Subspecialty,
        BreakdownKey::Complexity(Dimension::Fkd),
        BreakdownKey::Complexity(Dimension::Cci),
        BreakdownKey::Complexity(Dimension::Rc),
        BreakdownKey::Exam,
    ];

    pub fn name(&self) -> String {
        match self {
            BreakdownKey::Subspecialty => "subspecialty".into(),
            BreakdownKey::Complexity(d) => format!("complexity_{}", d.name()),
            BreakdownKey::Exam => "exam".into(),
        }
    }

    /// Sortable group key and display label, or `None` if the question is unlabeled.
    fn group(&self, q: &Question) -> Option<(usize, String)> {
        match self {
            BreakdownKey::Subspecialty => {
                let s = q.subspecialty?;
                let rank = crate::benchmark::Subspecialty::ALL.iter().position(|&x| x == s).unwrap_or(usize::MAX);
                Some((rank, s.label().to_string()))
            }
            BreakdownKey::Complexity(d) => {
                let level = q.complexity?.level(*d).get();
                Some((level as usize, format!("L{level}")))
            }
            BreakdownKey::Exam => Some((0, q.exam_id.clone())),
        }
    }
}

impl fmt::Display for BreakdownKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for BreakdownKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BreakdownKey::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown breakdown key {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub group: String,
    #[serde(flatten)]
    pub metrics: MetricsRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownTable {
    pub key: String,
    pub groups: Vec<GroupMetrics>,
    /// Results whose question carries a label for this key.
    pub labeled: usize,
    /// Results whose question lacks one; they appear in no group.
    pub unlabeled: usize,
}

/// Per-group metrics over the results whose questions are labeled for `key`.
pub fn breakdown(results: &[EvalResult], dataset: &Dataset, key: BreakdownKey) -> Result<BreakdownTable, EvalError> {
    let mut groups: BTreeMap<(usize, String), (usize, usize)> = BTreeMap::new();
    let mut unlabeled = 0;
    for r in results {
        let q = dataset.get(&r.question_id).ok_or_else(|| EvalError::UnknownQuestion(r.question_id.clone()))?;
        match key.group(q) {
            Some(g) => {
                let e = groups.entry(g).or_default();
                e.0 += 1;
                e.1 += usize::from(r.correct);
            }
            None => unlabeled += 1,
        }
    }
    if groups.is_empty() {
        return Err(EvalError::NoLabeledQuestions);
    }
    let labeled = groups.values().map(|g| g.0).sum();
    let groups = groups
        .into_iter()
        .map(|((_, group), (n, ok))| Ok(GroupMetrics { group, metrics: MetricsRecord::from_counts(ok, n)? }))
        .collect::<Result<_, EvalError>>()?;
    Ok(BreakdownTable { key: key.name(), groups, labeled, unlabeled })
}

/// One dimension pair: the coefficient, or why it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub pair: (Dimension, Dimension),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub n: usize,
    pub pairs: Vec<PairCorrelation>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: Dimension, b: Dimension) -> Option<f64> {
        if a == b {
            return Some(1.0);
        }
        self.pairs.iter().find(|p| p.pair == (a, b) || p.pair == (b, a)).and_then(|p| p.r)
    }

    /// Full 3×3 matrix in fkd, cci, rc order.
    pub fn matrix(&self) -> [[Option<f64>; 3]; 3] {
        let mut m = [[None; 3]; 3];
        for (i, &a) in Dimension::ALL.iter().enumerate() {
            for (j, &b) in Dimension::ALL.iter().enumerate() {
                m[i][j] = self.get(a, b);
            }
        }
        m
    }
}

/// Pearson correlations between the integer levels of each dimension pair,
/// over the questions that carry a complexity profile.
pub fn correlations(dataset: &Dataset) -> Result<CorrelationMatrix, EvalError> {
    let profiles: Vec<_> = dataset.questions.iter().filter_map(|q| q.complexity).collect();
    if profiles.is_empty() {
        return Err(EvalError::NoLabeledQuestions);
    }
    let column = |d: Dimension| -> Vec<f64> { profiles.iter().map(|p| f64::from(p.level(d).get())).collect() };
    let pairs = [(Dimension::Fkd, Dimension::Cci), (Dimension::Fkd, Dimension::Rc), (Dimension::Cci, Dimension::Rc)]
        .into_iter()
        .map(|(a, b)| match pearson(&column(a), &column(b)) {
            Ok(r) => PairCorrelation { pair: (a, b), r: Some(r), error: None },
            Err(e) => PairCorrelation { pair: (a, b), r: None, error: Some(e.to_string()) },
        })
        .collect();
    Ok(CorrelationMatrix { n: profiles.len(), pairs })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::benchmark::{ComplexityProfile, Level, Subspecialty, ValidationProfile};
    use crate::eval::RunMode;

    fn q(id: &str, sub: Option<Subspecialty>, levels: Option<(u8, u8, u8)>) -> Question {
        Question {
            id: id.into(),
            exam_id: if id.ends_with('1') { "exam-a".into() } else { "exam-b".into() },
            stem: "stem".into(),
            options: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            correct_index: 0,
            subspecialty: sub,
            complexity: levels.map(|(f, c, r)| {
                ComplexityProfile::new(Level::new(f).unwrap(), Level::new(c).unwrap(), Level::new(r).unwrap())
            }),
        }
    }

    fn dataset(qs: Vec<Question>) -> Dataset {
        Dataset::new("t", qs, ValidationProfile::Generic).unwrap()
    }

    fn result(id: &str, ok: bool) -> EvalResult {
        EvalResult::scored(id, Some(if ok { 0 } else { 1 }), 0, RunMode::Base)
    }

    #[test]
    fn two_subspecialties() {
        let ds = dataset(vec![
            q("q1", Some(Subspecialty::ALL[0]), None),
            q("q2", Some(Subspecialty::ALL[0]), None),
            q("q3", Some(Subspecialty::ALL[1]), None),
            q("q4", Some(Subspecialty::ALL[1]), None),
        ]);
        let rs = vec![result("q1", true), result("q2", true), result("q3", true), result("q4", false)];
        let t = breakdown(&rs, &ds, BreakdownKey::Subspecialty).unwrap();
        let acc: Vec<f64> = t.groups.iter().map(|g| g.metrics.accuracy).collect();
        assert_eq!(acc, vec![1.0, 0.5]);
        assert_eq!(t.labeled, 4);
        assert_eq!(t.unlabeled, 0);
    }

    #[test]
    fn single_group_matches_overall() {
        let ds = dataset((1..=5).map(|i| q(&format!("q{i}"), Some(Subspecialty::ALL[3]), None)).collect());
        let rs: Vec<_> = (1..=5).map(|i| result(&format!("q{i}"), i % 2 == 0)).collect();
        let t = breakdown(&rs, &ds, BreakdownKey::Subspecialty).unwrap();
        assert_eq!(t.groups.len(), 1);
        assert_eq!(t.groups[0].metrics, crate::eval::metrics(&rs).unwrap());
    }

    #[test]
    fn unlabeled_questions_are_counted_apart() {
        let ds = dataset(vec![q("q1", None, Some((1, 2, 3))), q("q2", None, None)]);
        let rs = vec![result("q1", true), result("q2", true)];
        let t = breakdown(&rs, &ds, BreakdownKey::Complexity(Dimension::Rc)).unwrap();
        assert_eq!((t.labeled, t.unlabeled), (1, 1));
        assert_eq!(t.groups[0].group, "L3");
        assert!(matches!(breakdown(&rs, &ds, BreakdownKey::Subspecialty), Err(EvalError::NoLabeledQuestions)));
        assert_eq!(breakdown(&rs, &ds, BreakdownKey::Exam).unwrap().groups.len(), 2);
    }

    #[test]
    fn constant_profiles_have_zero_variance() {
        let ds = dataset((1..=4).map(|i| q(&format!("q{i}"), None, Some((2, 2, 2)))).collect());
        let m = correlations(&ds).unwrap();
        assert_eq!(m.pairs.len(), 3);
        for p in &m.pairs {
            assert!(p.r.is_none());
            assert!(p.error.as_deref().unwrap().contains("variance"));
        }
    }

    #[test]
    fn correlation_matrix_is_symmetric() {
        let ds = dataset(vec![
            q("q1", None, Some((1, 1, 2))),
            q("q2", None, Some((2, 3, 3))),
            q("q3", None, Some((3, 2, 1))),
            q("q4", None, Some((1, 2, 2))),
        ]);
        let m = correlations(&ds).unwrap().matrix();
        for (i, row) in m.iter().enumerate() {
            assert_eq!(row[i], Some(1.0));
            for (j, cell) in row.iter().enumerate() {
                assert_eq!(*cell, m[j][i]);
            }
        }
        assert!(matches!(correlations(&dataset(vec![q("q1", None, None)])), Err(EvalError::NoLabeledQuestions)));
    }

    proptest! {
        #[test]
        fn groups_recompose(labels in proptest::collection::vec((proptest::option::of(0usize..13), any::<bool>()), 1..60)) {
            let qs: Vec<_> = labels.iter().enumerate().map(|(i, (s, _))| q(&format!("x{i}"), s.map(|k| Subspecialty::ALL[k]), None)).collect();
            let rs: Vec<_> = labels.iter().enumerate().map(|(i, (_, ok))| result(&format!("x{i}"), *ok)).collect();
            let ds = dataset(qs);
            match breakdown(&rs, &ds, BreakdownKey::Subspecialty) {
                Ok(t) => {
                    let want: usize = labels.iter().filter(|(s, ok)| s.is_some() && *ok).count();
                    prop_assert_eq!(t.groups.iter().map(|g| g.metrics.n_correct).sum::<usize>(), want);
                    prop_assert_eq!(t.groups.iter().map(|g| g.metrics.n).sum::<usize>(), t.labeled);
                    prop_assert_eq!(t.labeled + t.unlabeled, rs.len());
                }
                Err(e) => {
                    prop_assert!(matches!(e, EvalError::NoLabeledQuestions));
                    prop_assert!(labels.iter().all(|(s, _)| s.is_none()));
                }
            }
        }
    }
}
