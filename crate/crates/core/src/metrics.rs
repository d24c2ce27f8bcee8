//! Support-recovery error metrics and Monte Carlo aggregation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{CassError, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub exact_recovery: bool,
    pub set_difference: usize,
    /// `f64::INFINITY` marks a perfect reconstruction.
    pub psnr_db: Option<f64>,
    pub measurements: usize,
    pub energy: f64,
    pub elapsed_secs: f64,
}

impl TrialReport {
    pub fn new(truth: &[usize], estimate: &[usize], measurements: usize, energy: f64) -> Self {
        let d = set_difference(truth, estimate);
        TrialReport {
            exact_recovery: d == 0,
            set_difference: d,
            psnr_db: None,
            measurements,
            energy,
            elapsed_secs: 0.0,
        }
    }
}

/// `|S \ S_hat| + |S_hat \ S|`.
pub fn set_difference(truth: &[usize], estimate: &[usize]) -> usize {
    let a: BTreeSet<usize> = truth.iter().copied().collect();
    let b: BTreeSet<usize> = estimate.iter().copied().collect();
    a.symmetric_difference(&b).count()
}

/// `-10 log10(||x - x_hat||^2 / n)`; `+inf` when the two agree exactly.
pub fn psnr(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(CassError::DimensionMismatch {
            expected: x.len(),
            actual: x_hat.len(),
        });
    }
    let sq: f64 = x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    if sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * (sq / x.len() as f64).log10())
}

/// Wilson score interval for `successes / trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub failures: usize,
    /// Empirical P(S_hat != S).
    pub fwer: f64,
    pub fwer_ci: (f64, f64),
    pub mean_d: f64,
    /// Sample standard deviation of d.
    pub std_d: f64,
    pub mean_d_stderr: f64,
    pub mean_d_ci: (f64, f64),
    /// Mean over finite PSNR values.
    pub mean_psnr_db: Option<f64>,
    /// Reports whose PSNR was infinite and left out of the mean.
    pub psnr_excluded: usize,
    pub mean_measurements: f64,
    pub min_measurements: usize,
    pub max_measurements: usize,
    pub mean_energy: f64,
    pub max_energy: f64,
    pub min_energy: f64,
}

/// Sum after sorting, so the result does not depend on input order.
fn ordered_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.into_iter().sum()
}

pub fn aggregate(reports: &[TrialReport]) -> Result<Summary> {
    if reports.is_empty() {
        return Err(CassError::EmptyReports);
    }
    let trials = reports.len();
    let nf = trials as f64;
    let failures = reports.iter().filter(|r| !r.exact_recovery).count();

    let d_sum: u64 = reports.iter().map(|r| r.set_difference as u64).sum();
    let d_sq_sum: u64 = reports.iter().map(|r| (r.set_difference as u64).pow(2)).sum();
    let mean_d = d_sum as f64 / nf;
    let var_d = if trials > 1 {
        ((d_sq_sum as f64 - nf * mean_d * mean_d) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    let std_d = var_d.sqrt();
    let mean_d_stderr = std_d / nf.sqrt();

    let mut psnr_excluded = 0;
    let mut finite = Vec::new();
    for p in reports.iter().filter_map(|r| r.psnr_db) {
        if p.is_finite() {
            finite.push(p);
        } else {
            psnr_excluded += 1;
        }
    }
    let mean_psnr_db = if finite.is_empty() {
        None
    } else {
        let count = finite.len() as f64;
        Some(ordered_sum(finite) / count)
    };

    let m_sum: u64 = reports.iter().map(|r| r.measurements as u64).sum();
    let energies: Vec<f64> = reports.iter().map(|r| r.energy).collect();
    let max_energy = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_energy = energies.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(Summary {
        trials,
        failures,
        fwer: failures as f64 / nf,
        fwer_ci: wilson_interval(failures, trials, Z95),
        mean_d,
        std_d,
        mean_d_stderr,
        mean_d_ci: (mean_d - Z95 * mean_d_stderr, mean_d + Z95 * mean_d_stderr),
        mean_psnr_db,
        psnr_excluded,
        mean_measurements: m_sum as f64 / nf,
        min_measurements: reports.iter().map(|r| r.measurements).min().unwrap_or(0),
        max_measurements: reports.iter().map(|r| r.measurements).max().unwrap_or(0),
        mean_energy: ordered_sum(energies) / nf,
        max_energy,
        min_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    fn report(d: usize) -> TrialReport {
        TrialReport {
            exact_recovery: d == 0,
            set_difference: d,
            psnr_db: None,
            measurements: 10,
            energy: 1.0,
            elapsed_secs: 0.0,
        }
    }

    #[test]
    fn set_difference_examples() {
        assert_eq!(set_difference(&[1, 2], &[2, 1]), 0);
        assert_eq!(set_difference(&[1, 2], &[2, 3]), 2);
        assert_eq!(set_difference(&[1, 2, 3], &[4, 5, 6]), 6);
    }

    #[test]
    fn set_difference_is_a_metric_on_equal_size_subsets() {
        let universe = 6u32;
        let subsets: Vec<Vec<usize>> = (0u32..(1 << universe))
            .map(|mask| (0..universe as usize).filter(|i| mask & (1 << i) != 0).collect())
            .collect();
        for a in &subsets {
            for b in subsets.iter().filter(|b| b.len() == a.len()) {
                let dab = set_difference(a, b);
                assert_eq!(dab, set_difference(b, a));
                assert_eq!(dab == 0, a == b);
                assert_eq!(dab % 2, 0);
                assert!(dab <= 2 * a.len());
                for c in subsets.iter().filter(|c| c.len() == a.len()) {
                    assert!(set_difference(a, c) <= dab + set_difference(b, c));
                }
            }
        }
    }

    #[test]
    fn psnr_examples() {
        let x = vec![0.25; 100];
        assert_eq!(psnr(&x, &x).unwrap(), f64::INFINITY);
        let off: Vec<f64> = x.iter().map(|v| v + 1.0).collect();
        assert!(psnr(&x, &off).unwrap().abs() < 1e-12);
        let tenth: Vec<f64> = x.iter().map(|v| v + 0.1).collect();
        assert!((psnr(&x, &tenth).unwrap() - 20.0).abs() < 1e-9);
        assert!(psnr(&x, &x[..3]).is_err());
    }

    #[test]
    fn aggregate_basics() {
        let all_exact: Vec<_> = (0..5).map(|_| report(0)).collect();
        let s = aggregate(&all_exact).unwrap();
        assert_eq!((s.fwer, s.mean_d), (0.0, 0.0));

        let half: Vec<_> = (0..10).map(|i| report(if i % 2 == 0 { 2 } else { 0 })).collect();
        let s = aggregate(&half).unwrap();
        assert_eq!(s.mean_d, 1.0);
        assert_eq!(s.fwer, 0.5);
        assert!(s.fwer_ci.0 < 0.5 && s.fwer_ci.1 > 0.5);

        assert_eq!(aggregate(&[]), Err(CassError::EmptyReports));
    }

    #[test]
    fn infinite_psnr_is_excluded() {
        let mut rs: Vec<_> = (0..3).map(|_| report(0)).collect();
        rs[0].psnr_db = Some(f64::INFINITY);
        rs[1].psnr_db = Some(10.0);
        rs[2].psnr_db = Some(20.0);
        let s = aggregate(&rs).unwrap();
        assert_eq!(s.mean_psnr_db, Some(15.0));
        assert_eq!(s.psnr_excluded, 1);
    }

    #[test]
    fn wilson_covers_true_rate() {
        let mut rng = stream(8, Purpose::Signal, 0);
        let flags: Vec<_> = (0..2000).map(|_| report(if rng.gen_bool(0.1) { 2 } else { 0 })).collect();
        let s = aggregate(&flags).unwrap();
        assert!(s.fwer_ci.0 <= 0.1 && 0.1 <= s.fwer_ci.1, "{:?}", s.fwer_ci);
        let (lo, hi) = wilson_interval(0, 50, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
    }

    #[test]
    fn aggregate_is_order_invariant() {
        let mut rng = stream(9, Purpose::Signal, 0);
        let mut rs: Vec<_> = (0..200)
            .map(|_| {
                let mut r = report(2 * rng.gen_range(0..4));
                r.psnr_db = Some(rng.gen_range(5.0..40.0));
                r.energy = 1.0 + rng.gen::<f64>() * 1e-10;
                r
            })
            .collect();
        let a = aggregate(&rs).unwrap();
        rs.reverse();
        rs.swap(3, 150);
        assert_eq!(a, aggregate(&rs).unwrap());
    }

    #[test]
    fn mean_d_bounded_by_fwer() {
        let k = 4;
        let rs: Vec<_> = [0, 2, 8, 0, 4, 0, 6].iter().map(|&d| report(d)).collect();
        let s = aggregate(&rs).unwrap();
        assert!(s.mean_d <= 2.0 * k as f64 * s.fwer);
    }
}
