//! Non-adaptive comparators spending the same energy budget: direct
//! coordinate sensing and orthogonal matching pursuit over a Gaussian
//! ensemble.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::adaptive::{select_top_k, RecoveryResult};
use crate::config::Config;
use crate::dyadic::DyadicInterval;
use crate::error::{CassError, Result};
use crate::oracle::Oracle;
use crate::rng::NoiseSource;

/// Probes every coordinate once with amplitude `sqrt(M/n)` and keeps the
/// `k` largest magnitudes.
pub fn run_direct<N: NoiseSource>(oracle: &mut Oracle<N>, cfg: &Config) -> Result<RecoveryResult> {
    let n = cfg.n();
    if oracle.dimension() != n {
        return Err(CassError::DimensionMismatch {
            expected: n,
            actual: oracle.dimension(),
        });
    }
    let queries_before = oracle.ledger().queries();
    let spent_before = oracle.ledger().spent();
    let amplitude = (cfg.energy() / n as f64).sqrt();
    let scale = cfg.log2_n();
    let mut ys = Vec::with_capacity(n);
    for location in 1..=n {
        let probe = DyadicInterval::new(scale, location, n)?;
        ys.push((location, oracle.measure_interval(probe, amplitude)?));
    }
    let picked = select_top_k(&ys, cfg.k())?;
    Ok(RecoveryResult {
        support: picked.iter().map(|l| l - 1).collect(),
        estimates: picked.iter().map(|&l| ys[l - 1].1 / amplitude).collect(),
        measurements: oracle.ledger().queries() - queries_before,
        energy: oracle.ledger().spent() - spent_before,
        steps: Vec::new(),
    })
}

/// `m x n` sensing matrix with equal-norm columns and squared Frobenius
/// norm `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianEnsemble {
    matrix: DMatrix<f64>,
}

impl GaussianEnsemble {
    /// i.i.d. Gaussian entries, each column rescaled to norm `sqrt(M/n)`.
    pub fn draw<R: Rng + ?Sized>(m: usize, n: usize, energy: f64, rng: &mut R) -> Self {
        let mut matrix = DMatrix::<f64>::from_fn(m, n, |_, _| rng.sample(StandardNormal));
        let target = (energy / n as f64).sqrt();
        for mut col in matrix.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col *= target / norm;
            }
        }
        GaussianEnsemble { matrix }
    }

    /// `sqrt(M/n) I_n`: orthogonal columns, used to check OMP against plain
    /// top-k selection.
    pub fn scaled_identity(n: usize, energy: f64) -> Self {
        GaussianEnsemble {
            matrix: DMatrix::identity(n, n) * (energy / n as f64).sqrt(),
        }
    }

    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        GaussianEnsemble { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.matrix.norm_squared()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmpSolution {
    /// Selected columns in selection order.
    pub support: Vec<usize>,
    /// Final least-squares coefficients, aligned with `support`.
    pub coefficients: Vec<f64>,
    /// Residual norm after each iteration.
    pub residual_norms: Vec<f64>,
}

/// `k` greedy iterations: pick the column most correlated with the residual
/// (ties to the lower index), refit by least squares on the picked set.
pub fn omp(a: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> Result<OmpSolution> {
    if y.len() != a.nrows() {
        return Err(CassError::DimensionMismatch {
            expected: a.nrows(),
            actual: y.len(),
        });
    }
    if k > a.ncols() {
        return Err(CassError::TermCountOutOfRange { k, len: a.ncols() });
    }
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut chosen = vec![false; a.ncols()];
    let mut residual = y.clone();
    let mut coefficients = DVector::zeros(0);
    let mut residual_norms = Vec::with_capacity(k);

    for _ in 0..k {
        let corr = a.tr_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in corr.iter().enumerate() {
            if chosen[j] {
                continue;
            }
            let c = c.abs();
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((j, c));
            }
        }
        let (j, _) = best.expect("k <= n leaves a free column");
        chosen[j] = true;
        support.push(j);

        let sub = a.select_columns(&support);
        let gram = sub.tr_mul(&sub);
        let rhs = sub.tr_mul(y);
        let chol = gram.cholesky().ok_or(CassError::SingularFit)?;
        coefficients = chol.solve(&rhs);
        if coefficients.iter().any(|v| !v.is_finite()) {
            return Err(CassError::SingularFit);
        }
        residual = y - &sub * &coefficients;
        residual_norms.push(residual.norm());
    }

    Ok(OmpSolution {
        support,
        coefficients: coefficients.iter().copied().collect(),
        residual_norms,
    })
}

/// Acquires `m` dense measurements through a fresh ensemble and recovers
/// `k` terms with OMP.
pub fn run_omp<N: NoiseSource, R: Rng + ?Sized>(
    oracle: &mut Oracle<N>,
    cfg: &Config,
    m: usize,
    rng: &mut R,
) -> Result<RecoveryResult> {
    if m < cfg.k() {
        return Err(CassError::TooFewMeasurements {
            needed: cfg.k(),
            available: m,
        });
    }
    let ensemble = GaussianEnsemble::draw(m, cfg.n(), cfg.energy(), rng);
    run_omp_with_ensemble(oracle, cfg, &ensemble)
}

pub fn run_omp_with_ensemble<N: NoiseSource>(
    oracle: &mut Oracle<N>,
    cfg: &Config,
    ensemble: &GaussianEnsemble,
) -> Result<RecoveryResult> {
    if ensemble.cols() != cfg.n() || oracle.dimension() != cfg.n() {
        return Err(CassError::DimensionMismatch {
            expected: cfg.n(),
            actual: ensemble.cols(),
        });
    }
    let queries_before = oracle.ledger().queries();
    let spent_before = oracle.ledger().spent();
    let a = ensemble.matrix();
    let mut row = vec![0.0; a.ncols()];
    let mut y = DVector::zeros(a.nrows());
    for i in 0..a.nrows() {
        for (dst, src) in row.iter_mut().zip(a.row(i).iter()) {
            *dst = *src;
        }
        y[i] = oracle.measure_dense(&row)?;
    }
    let sol = omp(a, &y, cfg.k())?;
    Ok(RecoveryResult {
        support: sol.support,
        estimates: sol.coefficients,
        measurements: oracle.ledger().queries() - queries_before,
        energy: oracle.ledger().spent() - spent_before,
        steps: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::HiddenSignal;
    use crate::rng::{stream, NoiseStream, Purpose, Silent};

    #[test]
    fn ensemble_normalization() {
        let mut rng = stream(1, Purpose::Ensemble, 0);
        let e = GaussianEnsemble::draw(12, 64, 37.0, &mut rng);
        assert!((e.frobenius_sq() - 37.0).abs() <= 1e-9 * 37.0);
        let target = (37.0f64 / 64.0).sqrt();
        for col in e.matrix().column_iter() {
            assert!((col.norm() - target).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_noiseless_is_top_k() {
        let cfg = Config::new(16, 2, 16.0, 1.0).unwrap();
        let x = vec![0.0, 1.0, -3.0, 0.0, 2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5];
        let mut o = Oracle::new(HiddenSignal::from_coefficients(x), 16.0, Silent);
        let r = run_direct(&mut o, &cfg).unwrap();
        assert_eq!(r.support, vec![2, 4]);
        assert_eq!(r.estimates, vec![-3.0, 2.0]);
        assert_eq!(r.measurements, 16);
        assert!((r.energy - 16.0).abs() < 1e-9 * 16.0);
    }

    #[test]
    fn omp_on_identity_is_top_k() {
        let cfg = Config::new(8, 2, 8.0, 1.0).unwrap();
        let x = vec![0.5, 0.0, -2.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let mut o = Oracle::new(HiddenSignal::from_coefficients(x), 8.0, Silent);
        let r = run_omp_with_ensemble(&mut o, &cfg, &GaussianEnsemble::scaled_identity(8, 8.0)).unwrap();
        assert_eq!(r.support, vec![2, 5]);
        assert!((r.estimates[0] + 2.0).abs() < 1e-12);
        assert!((r.estimates[1] - 1.0).abs() < 1e-12);
        assert!((r.energy - 8.0).abs() < 1e-9 * 8.0);
    }

    #[test]
    fn omp_single_term_is_brute_force_argmax() {
        let n = 64;
        let cfg = Config::new(n, 1, n as f64, 1.0).unwrap();
        for trial in 0..20u64 {
            let mut rng = stream(5, Purpose::Ensemble, trial);
            let e = GaussianEnsemble::draw(12, n, n as f64, &mut rng);
            let mut x = vec![0.0; n];
            x[(trial as usize * 13) % n] = 1.7;
            let y = e.matrix() * DVector::from_vec(x.clone());
            let brute = (0..n)
                .map(|j| {
                    let c: f64 = (0..12).map(|i| e.matrix()[(i, j)] * y[i]).sum();
                    (j, c.abs())
                })
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
                .0;
            let mut o = Oracle::new(HiddenSignal::from_coefficients(x), n as f64, Silent);
            let r = run_omp_with_ensemble(&mut o, &cfg, &e).unwrap();
            assert_eq!(r.support, vec![brute]);
        }
    }

    #[test]
    fn omp_residuals_do_not_increase() {
        let n = 128;
        let cfg = Config::new(n, 8, n as f64, 1.0).unwrap();
        let mut rng = stream(6, Purpose::Ensemble, 0);
        let e = GaussianEnsemble::draw(48, n, n as f64, &mut rng);
        let x: Vec<f64> = (0..n).map(|i| if i % 17 == 3 { 4.0 } else { 0.0 }).collect();
        let mut o = Oracle::new(HiddenSignal::from_coefficients(x), n as f64, NoiseStream::new(1, 0));
        let mut y = DVector::zeros(48);
        let mut row = vec![0.0; n];
        for i in 0..48 {
            for (d, s) in row.iter_mut().zip(e.matrix().row(i).iter()) {
                *d = *s;
            }
            y[i] = o.measure_dense(&row).unwrap();
        }
        let sol = omp(e.matrix(), &y, cfg.k()).unwrap();
        assert_eq!(sol.residual_norms.len(), 8);
        let mut prev = y.norm();
        for r in &sol.residual_norms {
            assert!(*r <= prev + 1e-12);
            prev = *r;
        }
    }

    #[test]
    fn duplicate_columns_give_singular_fit() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let y = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(omp(&a, &y, 2), Err(CassError::SingularFit));
    }

    #[test]
    fn omp_requires_k_measurements() {
        let cfg = Config::new(16, 4, 16.0, 1.0).unwrap();
        let mut o = Oracle::new(HiddenSignal::from_coefficients(vec![0.0; 16]), 16.0, Silent);
        let mut rng = stream(1, Purpose::Ensemble, 0);
        assert!(run_omp(&mut o, &cfg, 3, &mut rng).is_err());
    }
}
