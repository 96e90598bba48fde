use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// `c(α)` of the two-sample Kolmogorov–Smirnov test at `α = 1%`.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    /// `c(α) √((n+m)/(nm))`.
    pub critical: f64,
    pub rejected: bool,
}

/// Two-sample Kolmogorov–Smirnov test at the 1% level. Ties and infinite
/// values are allowed.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::MonteCarlo("empty sample in the two-sample test".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut statistic) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = if a[i].total_cmp(&b[j]).is_le() { a[i] } else { b[j] };
        while i < a.len() && a[i].total_cmp(&x).is_eq() {
            i += 1;
        }
        while j < b.len() && b[j].total_cmp(&x).is_eq() {
            j += 1;
        }
        statistic = statistic.max((i as f64 / n - j as f64 / m).abs());
    }
    let critical = KS_CRITICAL_1PCT * ((n + m) / (n * m)).sqrt();
    Ok(KsResult { statistic, critical, rejected: statistic > critical })
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `|mean| ≤ k · se`, with a zero standard error requiring a zero mean.
pub(crate) fn within(mean: f64, se: f64, k: f64) -> bool {
    if se == 0.0 {
        mean.abs() <= 1e-12
    } else {
        mean.abs() <= k * se
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftBlock {
    pub from: usize,
    pub to: usize,
    pub mean_increment: f64,
    pub standard_error: f64,
    /// Two-sided normal p-value; 1 for a constant block.
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftTestReport {
    pub blocks: Vec<DriftBlock>,
    /// Per-block level after the Bonferroni correction.
    pub threshold: f64,
    pub passed: bool,
}

/// Tests `E[X_{t_{j+1}} − X_{t_j}] = 0` on consecutive observation times with
/// a Bonferroni-corrected two-sided z-test. `values[p][j]` is `X_{t_j}` on path `p`.
pub fn martingale_drift_test(values: &[Vec<f64>], alpha: f64) -> Result<DriftTestReport> {
    if values.len() < 2 {
        return Err(Error::MonteCarlo("at least two paths are required".into()));
    }
    let times = values[0].len();
    if times < 2 || values.iter().any(|v| v.len() != times) {
        return Err(Error::MonteCarlo("paths need the same two or more observation times".into()));
    }
    let normal = Normal::standard();
    let threshold = alpha / (times - 1) as f64;
    let mut blocks = Vec::with_capacity(times - 1);
    for j in 0..times - 1 {
        let increments: Vec<f64> = values.iter().map(|v| v[j + 1] - v[j]).collect();
        let (mean, se) = mean_and_se(&increments);
        let p_value = if se == 0.0 {
            if mean != 0.0 {
                return Err(Error::MonteCarlo(format!("degenerate variance with non-zero drift between times {j} and {}", j + 1)));
            }
            1.0
        } else {
            2.0 * normal.sf((mean / se).abs())
        };
        blocks.push(DriftBlock { from: j, to: j + 1, mean_increment: mean, standard_error: se, p_value });
    }
    let passed = blocks.iter().all(|b| b.p_value >= threshold);
    Ok(DriftTestReport { blocks, threshold, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn ks_statistic_matches_a_direct_computation() {
        let a = [0.1, 0.4, 0.7];
        let b = [0.2, 0.3, 0.9, 1.0];
        let r = ks_two_sample(&a, &b).unwrap();
        let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        let direct = a.iter().chain(&b).map(|&x| (ecdf(&a, x) - ecdf(&b, x)).abs()).fold(0.0, f64::max);
        assert_eq!(r.statistic, direct);
    }

    #[test]
    fn ks_rejects_shifted_samples_and_accepts_equal_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..2000).map(|_| rng.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..2000).map(|_| rng.sample(StandardNormal)).collect();
        let shifted: Vec<f64> = b.iter().map(|x| x + 0.5).collect();
        assert!(!ks_two_sample(&a, &b).unwrap().rejected);
        assert!(ks_two_sample(&a, &shifted).unwrap().rejected);
        let with_inf = [1.0, f64::INFINITY];
        assert_eq!(ks_two_sample(&with_inf, &with_inf).unwrap().statistic, 0.0);
    }

    #[test]
    fn drift_test_on_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let walks: Vec<Vec<f64>> = (0..4000)
            .map(|_| {
                let mut x = vec![0.0];
                for _ in 0..5 {
                    x.push(x.last().unwrap() + rng.sample::<f64, _>(StandardNormal));
                }
                x
            })
            .collect();
        assert!(martingale_drift_test(&walks, 0.01).unwrap().passed);
        let drifting: Vec<Vec<f64>> =
            walks.iter().map(|w| w.iter().enumerate().map(|(j, x)| x + 0.2 * j as f64).collect()).collect();
        assert!(!martingale_drift_test(&drifting, 0.01).unwrap().passed);
    }

    #[test]
    fn constant_process_passes_and_degenerate_drift_errors() {
        let constant = vec![vec![1.0; 4]; 10];
        assert!(martingale_drift_test(&constant, 0.01).unwrap().passed);
        let deterministic: Vec<Vec<f64>> = (0..10).map(|_| vec![0.0, 1.0]).collect();
        assert!(martingale_drift_test(&deterministic, 0.01).is_err());
    }
}
