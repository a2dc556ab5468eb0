//! Fisher's exact test, Pearson correlation, and count recovery from rounded percentages.

use super::EvalError;

/// Tables whose point probability is within this relative margin of the
/// observed table's count as equally extreme.
pub const FISHER_RELATIVE_TOLERANCE: f64 = 1e-12;

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut t = Vec::with_capacity(n as usize + 1);
    t.push(0.0);
    let mut acc = 0.0f64;
    for i in 1..=n {
        acc += (i as f64).ln();
        t.push(acc);
    }
    t
}

/// Two-sided p-value for `[[a, b], [c, d]]`: the total point probability of
/// every table with the same margins that is no more likely than the observed one.
pub fn fisher_exact_two_sided(table: [[u64; 2]; 2]) -> Result<f64, EvalError> {
    let [[a, b], [c, d]] = table;
    let (r1, r2, c1, c2) = (a + b, c + d, a + c, b + d);
    if r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0 {
        return Err(EvalError::ZeroMargin);
    }
    let n = r1 + r2;
    let lf = ln_factorials(n);
    let lf = |k: u64| lf[k as usize];
    let mut margins = [lf(r1), lf(r2), lf(c1), lf(c2)];
    margins.sort_by(f64::total_cmp);
    let fixed = margins.iter().sum::<f64>() - lf(n);
    // Terms are summed in sorted order so that tables related by symmetry
    // produce bitwise-equal results.
    let ln_p = |x: u64| {
        let mut terms = [lf(x), lf(r1 - x), lf(c1 - x), lf(r2 + x - c1)];
        terms.sort_by(f64::total_cmp);
        fixed - terms.iter().sum::<f64>()
    };
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let cutoff = ln_p(a) + FISHER_RELATIVE_TOLERANCE.ln_1p();
    let mut all: Vec<f64> = (lo..=hi).map(ln_p).collect();
    all.sort_by(f64::total_cmp);
    // Normalizing by the total mass cancels rounding in the shared constant
    // and makes the all-tables case exactly 1.
    let top = *all.last().expect("at least one table");
    let mass = |lps: &mut dyn Iterator<Item = &f64>| lps.map(|&lp| (lp - top).exp()).sum::<f64>();
    let total = mass(&mut all.iter());
    let kept = mass(&mut all.iter().filter(|&&lp| lp <= cutoff));
    let p = kept / total;
    Ok(p.min(1.0))
}

/// Product-moment correlation, computed around the means.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(EvalError::TooFewPoints(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correct-answer counts out of `n` consistent with a percentage reported to
/// one decimal place. If no count rounds to it exactly, the two counts
/// bracketing `percent * n / 100` are returned.
pub fn infer_counts(percent: f64, n: u64) -> Vec<u64> {
    let nf = n as f64;
    let lo = ((percent - 0.05) / 100.0 * nf).ceil().max(0.0) as u64;
    let hi = ((percent + 0.05) / 100.0 * nf).floor().min(nf) as u64;
    if lo <= hi {
        return (lo..=hi).collect();
    }
    let exact = percent / 100.0 * nf;
    let (f, c) = (exact.floor() as u64, (exact.ceil() as u64).min(n));
    if f == c { vec![f] } else { vec![f, c] }
}

#[cfg(test)]
mod tests {
    use num_bigint::BigUint;
    use num_traits::{One, ToPrimitive};
    use proptest::prelude::*;

    use super::*;

    fn binom(n: u64, k: u64) -> BigUint {
        let mut r = BigUint::one();
        for i in 0..k {
            r = r * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        r
    }

    /// Exact enumeration over integer hypergeometric weights.
    fn oracle(table: [[u64; 2]; 2]) -> f64 {
        let [[a, b], [c, d]] = table;
        let (r1, r2, c1) = (a + b, c + d, a + c);
        let weight = |x: u64| binom(r1, x) * binom(r2, c1 - x);
        let observed = weight(a);
        let scale = BigUint::from(1_000_000_000_000u64);
        let limit = &observed * (&scale + BigUint::one());
        let total = binom(r1 + r2, c1);
        let mut sum = BigUint::from(0u32);
        for x in c1.saturating_sub(r2)..=r1.min(c1) {
            let w = weight(x);
            if &w * &scale <= limit {
                sum += w;
            }
        }
        // Ratio of two big integers with at least 64 quotient bits.
        let s = (total.bits() + 64).saturating_sub(sum.bits());
        let q = (&sum << s) / &total;
        q.to_f64().unwrap() * 2f64.powi(-(s as i32))
    }

    #[test]
    fn worked_tables() {
        assert!((fisher_exact_two_sided([[3, 1], [1, 3]]).unwrap() - 0.48571).abs() < 1e-4);
        assert_eq!(fisher_exact_two_sided([[10, 10], [10, 10]]).unwrap(), 1.0);
        assert!((fisher_exact_two_sided([[5, 0], [0, 5]]).unwrap() - 2.0 / 252.0).abs() < 1e-5);
        assert!((oracle([[3, 1], [1, 3]]) - 34.0 / 70.0).abs() < 1e-15);
        assert!(matches!(fisher_exact_two_sided([[0, 0], [1, 3]]), Err(EvalError::ZeroMargin)));
        assert!(matches!(fisher_exact_two_sided([[0, 4], [0, 3]]), Err(EvalError::ZeroMargin)));
    }

    #[test]
    fn pearson_cases() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]).unwrap() + 1.0).abs() < 1e-12);
        // Deviations (-1,0,1) and (-1,1,0): 1 / sqrt(2 * 2).
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(EvalError::LengthMismatch { .. })));
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(EvalError::ZeroVariance)));
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(EvalError::TooFewPoints(1))));
    }

    #[test]
    fn counts_from_percentages() {
        assert_eq!(infer_counts(80.5, 305), vec![245, 246]);
        assert_eq!(infer_counts(50.0, 10), vec![5]);
        assert_eq!(infer_counts(33.3, 3), vec![1]);
        for k in 0..=305u64 {
            let pct = (k as f64 * 1000.0 / 305.0).round() / 10.0;
            assert!(infer_counts(pct, 305).contains(&k), "{k} -> {pct}");
        }
    }

    fn table() -> impl Strategy<Value = [[u64; 2]; 2]> {
        (1u64..=60, 1u64..=60, 1u64..=60).prop_flat_map(|(r1, r2, c1)| {
            let c1 = c1.min(r1 + r2 - 1).max(1);
            let lo = c1.saturating_sub(r2);
            let hi = r1.min(c1);
            (lo..=hi).prop_map(move |a| [[a, r1 - a], [c1 - a, r2 - (c1 - a)]])
        })
    }

    proptest! {
        #[test]
        fn matches_enumeration(t in table()) {
            let p = fisher_exact_two_sided(t).unwrap();
            let o = oracle(t);
            prop_assert!(p > 0.0 && p <= 1.0);
            prop_assert!((p - o).abs() <= 1e-9 * o, "{t:?}: {p} vs {o}");
        }

        #[test]
        fn symmetric_under_swaps(t in table()) {
            let p = fisher_exact_two_sided(t).unwrap();
            let rows = [t[1], t[0]];
            let cols = [[t[0][1], t[0][0]], [t[1][1], t[1][0]]];
            prop_assert_eq!(p, fisher_exact_two_sided(rows).unwrap());
            prop_assert_eq!(p, fisher_exact_two_sided(cols).unwrap());
        }

        #[test]
        fn pearson_affine_invariant(
            xs in proptest::collection::vec(-100.0f64..100.0, 3..40),
            scale in 0.01f64..100.0,
            shift in -1000.0f64..1000.0,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let ys: Vec<f64> = xs.iter().map(|x| x + rng.gen_range(-50.0..50.0)).collect();
            let r = match pearson(&xs, &ys) { Ok(r) => r, Err(_) => return Ok(()) };
            let moved: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            prop_assert!((pearson(&moved, &ys).unwrap() - r).abs() <= 1e-12);
            let neg: Vec<f64> = ys.iter().map(|y| -y).collect();
            prop_assert!((pearson(&xs, &neg).unwrap() + r).abs() <= 1e-12);
        }
    }
}
