use serde::{Deserialize, Serialize};

use super::stats::fisher_exact_two_sided;
use super::{EvalError, EvalResult};

/// Significance level for comparisons.
pub const ALPHA: f64 = 0.05;

/// Two methods' correct/incorrect counts and the Fisher p-value between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub method_a: String,
    pub method_b: String,
    /// Rows are methods A and B; columns are correct and incorrect.
    pub table: [[u64; 2]; 2],
    pub p_value: f64,
    pub significant: bool,
}

/// Compares `correct/n` counts. When every answer in both methods is correct
/// (or every one is wrong) the proportions are identical and p is 1.
pub fn compare_counts(method_a: &str, a: (u64, u64), method_b: &str, b: (u64, u64)) -> Result<ComparisonReport, EvalError> {
    let ((ok_a, n_a), (ok_b, n_b)) = (a, b);
    if n_a == 0 || n_b == 0 {
        return Err(EvalError::EmptyResults);
    }
    assert!(ok_a <= n_a && ok_b <= n_b, "more correct answers than questions");
    let table = [[ok_a, n_a - ok_a], [ok_b, n_b - ok_b]];
    let p_value = if ok_a + ok_b == 0 || ok_a + ok_b == n_a + n_b { 1.0 } else { fisher_exact_two_sided(table)? };
    Ok(ComparisonReport {
        method_a: method_a.to_string(),
        method_b: method_b.to_string(),
        table,
        p_value,
        significant: p_value < ALPHA,
    })
}

pub fn compare_methods(method_a: &str, a: &[EvalResult], method_b: &str, b: &[EvalResult]) -> Result<ComparisonReport, EvalError> {
    let count = |rs: &[EvalResult]| (rs.iter().filter(|r| r.correct).count() as u64, rs.len() as u64);
    compare_counts(method_a, count(a), method_b, count(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::RunMode;

    fn results(ok: usize, n: usize) -> Vec<EvalResult> {
        (0..n).map(|i| EvalResult::scored(&format!("q{i}"), Some(usize::from(i >= ok)), 0, RunMode::Base)).collect()
    }

    #[test]
    fn rows_are_methods() {
        let r = compare_methods("base", &results(246, 305), "rag", &results(266, 305)).unwrap();
        assert_eq!(r.table, [[246, 59], [266, 39]]);
        assert_eq!(r.table[0][0] + r.table[0][1], 305);
        assert!((0.015..=0.045).contains(&r.p_value), "{}", r.p_value);
        assert!(r.significant);
    }

    #[test]
    fn large_gap_is_tiny() {
        let r = compare_counts("a", (143, 305), "b", (272, 305)).unwrap();
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn identical_methods() {
        let a = results(7, 10);
        let r = compare_methods("a", &a, "a", &a).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
        assert_eq!(compare_counts("a", (5, 5), "b", (9, 9)).unwrap().p_value, 1.0);
        assert!(matches!(compare_methods("a", &[], "b", &a), Err(EvalError::EmptyResults)));
    }
}
