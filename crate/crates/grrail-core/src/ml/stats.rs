//! Rank statistics and the two significance tests the evaluation reports.

use crate::error::{Error, Result};

/// Standard normal CDF via the complementary error function (Chebyshev
/// fit, |error| < 1.2e-7 — plenty for p-values).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398
                                + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277))))))));
    let ans = t * poly.exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Midranks of the pooled sample, aligned with the input order.
fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

/// Mann-Whitney U (the U of `x`) with midranks for ties, plus a two-sided p
/// from the normal approximation with tie and continuity corrections.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidParam("both samples must be non-empty".into()));
    }
    let n1 = x.len() as f64;
    let n2 = y.len() as f64;
    let pooled: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
    let (ranks, tie_term) = midranks(&pooled);
    let r1: f64 = ranks[..x.len()].iter().sum();
    let u = r1 - n1 * (n1 + 1.0) / 2.0;

    let n = n1 + n2;
    let mean_u = n1 * n2 / 2.0;
    let var_u = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var_u <= 0.0 {
        return Ok((u, 1.0));
    }
    let d = u - mean_u;
    if d == 0.0 {
        return Ok((u, 1.0));
    }
    let z = (d - 0.5 * d.signum()) / var_u.sqrt();
    let p = (2.0 * (1.0 - normal_cdf(z.abs()))).clamp(0.0, 1.0);
    Ok((u, p))
}

/// Pooled two-proportion z-test from accuracies and group sizes. Successes
/// are reconstructed by rounding `acc * n`. When the pooled proportion is 0
/// or 1 the statistic is defined as 0 and `degenerate` is set.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ZTestResult {
    pub z: f64,
    pub p_value: f64,
    pub degenerate: bool,
}

pub fn two_proportion_z(acc1: f64, n1: usize, acc2: f64, n2: usize) -> Result<ZTestResult> {
    if n1 < 1 || n2 < 1 {
        return Err(Error::InvalidParam("group sizes must be >= 1".into()));
    }
    for (name, acc) in [("acc1", acc1), ("acc2", acc2)] {
        if !(0.0..=1.0).contains(&acc) {
            return Err(Error::InvalidParam(format!("{name} = {acc} outside [0, 1]")));
        }
    }
    let c1 = (acc1 * n1 as f64).round();
    let c2 = (acc2 * n2 as f64).round();
    let pooled = (c1 + c2) / (n1 + n2) as f64;
    if pooled <= 0.0 || pooled >= 1.0 {
        return Ok(ZTestResult { z: 0.0, p_value: 1.0, degenerate: true });
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let z = (acc1 - acc2) / se;
    let p = if z == 0.0 {
        1.0
    } else {
        (2.0 * (1.0 - normal_cdf(z.abs()))).clamp(0.0, 1.0)
    };
    Ok(ZTestResult { z, p_value: p, degenerate: false })
}

/// AUC by the rank formulation: the probability that a positive outranks a
/// negative, ties counted half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidParam("scores and labels must align".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let (ranks, _) = midranks(scores);
    let r_pos: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == 1)
        .map(|(&r, _)| r)
        .sum();
    let np = n_pos as f64;
    Ok((r_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normal_cdf_reference_points() {
        // the erfc fit is good to ~1.2e-7
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.959963985) - 0.975).abs() < 1e-6);
        assert!((normal_cdf(-1.0) - 0.15865525393).abs() < 1e-6);
    }

    #[test]
    fn mwu_complete_separation() {
        let (u, _) = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(u, 0.0);
        let (u, _) = mann_whitney_u(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(u, 9.0);
    }

    #[test]
    fn mwu_identical_samples_p_is_one() {
        let x = [2.0, 5.0, 5.0, 9.0];
        let (u, p) = mann_whitney_u(&x, &x).unwrap();
        assert_eq!(u, 8.0); // n1*n2/2
        assert_eq!(p, 1.0);
        // fully tied data: variance collapses to zero
        let (_, p) = mann_whitney_u(&[3.0; 5], &[3.0; 7]).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn mwu_u_matches_pairwise_count_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n1 = rng.random_range(1..30);
            let n2 = rng.random_range(1..30);
            // coarse grid to force ties
            let x: Vec<f64> = (0..n1).map(|_| rng.random_range(0..8) as f64).collect();
            let y: Vec<f64> = (0..n2).map(|_| rng.random_range(0..8) as f64).collect();
            let (u, _) = mann_whitney_u(&x, &y).unwrap();
            let mut oracle = 0.0;
            for &a in &x {
                for &b in &y {
                    if a > b {
                        oracle += 1.0;
                    } else if a == b {
                        oracle += 0.5;
                    }
                }
            }
            assert_eq!(u, oracle);
        }
    }

    #[test]
    fn ztest_paper_anchor() {
        let r = two_proportion_z(36.0 / 46.0, 46, 27.0 / 46.0, 46).unwrap();
        assert!((r.z - 2.019).abs() < 0.005, "z = {}", r.z);
        assert!(r.p_value >= 0.040 && r.p_value <= 0.047, "p = {}", r.p_value);
        assert!(!r.degenerate);
    }

    #[test]
    fn ztest_equal_accuracies_is_null() {
        let r = two_proportion_z(0.7, 50, 0.7, 50).unwrap();
        assert_eq!(r.z, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ztest_derived_value() {
        let r = two_proportion_z(64.0 / 86.0, 86, 47.0 / 86.0, 86).unwrap();
        assert!((r.z - 2.709).abs() < 0.01, "z = {}", r.z);
    }

    #[test]
    fn ztest_is_antisymmetric() {
        let a = two_proportion_z(0.8, 40, 0.6, 55).unwrap();
        let b = two_proportion_z(0.6, 55, 0.8, 40).unwrap();
        assert!((a.z + b.z).abs() < 1e-12);
        assert!((a.p_value - b.p_value).abs() < 1e-12);
    }

    #[test]
    fn ztest_degenerate_pool() {
        let r = two_proportion_z(0.0, 10, 0.0, 10).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.z, 0.0);
        let r = two_proportion_z(1.0, 10, 1.0, 10).unwrap();
        assert!(r.degenerate);
    }

    #[test]
    fn auc_perfect_and_reversed() {
        let labels = [0, 0, 1, 1];
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), 1.0);
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap(), 0.0);
        assert!(matches!(auc(&[0.5, 0.6], &[1, 1]), Err(Error::SingleClass)));
    }

    #[test]
    fn auc_matches_trapezoidal_roc_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n = 200;
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_range(0.0..1.0) < 0.4)).collect();
            if labels.iter().all(|&l| l == 0) || labels.iter().all(|&l| l == 1) {
                continue;
            }
            let got = auc(&scores, &labels).unwrap();
            // trapezoidal integration of the ROC curve over descending
            // unique thresholds
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
            let p = labels.iter().filter(|&&l| l == 1).count() as f64;
            let neg = n as f64 - p;
            let (mut tp, mut fp) = (0.0, 0.0);
            let (mut prev_tpr, mut prev_fpr) = (0.0, 0.0);
            let mut area = 0.0;
            let mut i = 0;
            while i < n {
                let thr = scores[order[i]];
                while i < n && scores[order[i]] == thr {
                    if labels[order[i]] == 1 {
                        tp += 1.0;
                    } else {
                        fp += 1.0;
                    }
                    i += 1;
                }
                let tpr = tp / p;
                let fpr = fp / neg;
                area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
                prev_tpr = tpr;
                prev_fpr = fpr;
            }
            assert!((got - area).abs() < 1e-12, "{got} vs {area}");
        }
    }

    #[test]
    fn auc_is_invariant_under_monotone_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 150;
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_range(0.0..1.0) < 0.5)).collect();
        let base = auc(&scores, &labels).unwrap();
        for transform in [|x: f64| x.ln(), |x: f64| x.powi(3), |x: f64| 10.0 * x + 2.0] {
            let t: Vec<f64> = scores.iter().map(|&s| transform(s)).collect();
            assert!((auc(&t, &labels).unwrap() - base).abs() < 1e-12);
        }
    }
}
