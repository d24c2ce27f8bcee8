//! Partition count, step count, energy normalizer and per-step amplitudes.

use crate::config::Config;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Number of first-step partitions, a power of two.
    pub ell0: usize,
    /// Number of steps, `log2(n / ell0) + 1`.
    pub steps: usize,
    /// Energy normalizer, `1 + (4k/ell0) * sum_{s=2}^{steps} s 2^-s`.
    pub gamma: f64,
    /// Sensing-vector amplitude on each step, `sqrt(M s / (gamma n))`.
    pub amplitudes: Vec<f64>,
    /// Interval width on each step, `n / (ell0 2^(s-1))`.
    pub support_widths: Vec<usize>,
}

impl Schedule {
    /// Scale (`log2` of the number of intervals) measured on step `s` (1-based).
    pub fn scale_at(&self, step: usize) -> u32 {
        self.ell0.trailing_zeros() + step as u32 - 1
    }

    /// Energy spent on step `s` (1-based) when run against dimension `n`.
    pub fn step_energy(&self, step: usize, k: usize) -> f64 {
        let count = if step == 1 { self.ell0 } else { 2 * k };
        let a = self.amplitudes[step - 1];
        count as f64 * self.support_widths[step - 1] as f64 * a * a
    }

    pub fn measurement_count(&self, k: usize) -> usize {
        self.ell0 + 2 * k * (self.steps - 1)
    }
}

/// Exponent `c = ceil(log2(k / epsilon))`, computed so that exact powers of
/// two are never pushed up by rounding and inexact quotients sitting on a
/// power of two round up.
fn ceil_log2_ratio(k: usize, epsilon: f64) -> u32 {
    let k = k as f64;
    let ratio = k / epsilon;
    let mut c = 0u32;
    while 2f64.powi(c as i32) < ratio {
        c += 1;
    }
    if 2f64.powi(c as i32) == ratio {
        // ratio rounded onto 2^c; k - ratio * epsilon < 0 means the true
        // quotient is below 2^c, > 0 means above.
        let residual = (-ratio).mul_add(epsilon, k);
        if residual > 0.0 {
            c += 1;
        }
    }
    c
}

pub fn make_schedule(cfg: &Config) -> Result<Schedule> {
    cfg.validate()?;
    let n = cfg.n();
    let k = cfg.k();
    let log2_n = cfg.log2_n();
    let c = ceil_log2_ratio(k, cfg.epsilon());
    let ell0 = if c + 2 >= log2_n {
        n
    } else {
        4usize << c
    };
    let steps = (n / ell0).trailing_zeros() as usize + 1;

    // Every term is a dyadic rational well inside f64 precision.
    let tail: f64 = (2..=steps).map(|s| s as f64 * 0.5f64.powi(s as i32)).sum();
    let gamma = 1.0 + (4 * k) as f64 / ell0 as f64 * tail;
    assert!(ell0 >= k, "selection must keep fewer intervals than measured");

    let scale = cfg.energy() / (gamma * n as f64);
    let amplitudes = (1..=steps).map(|s| (scale * s as f64).sqrt()).collect();
    let support_widths = (0..steps).map(|s| n / (ell0 << s)).collect();
    Ok(Schedule {
        ell0,
        steps,
        gamma,
        amplitudes,
        support_widths,
    })
}

/// `ell0 + 2k (steps - 1)`: measurements made by one CASS run.
pub fn measurement_count(cfg: &Config) -> Result<usize> {
    Ok(make_schedule(cfg)?.measurement_count(cfg.k()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::CassError;

    /// gamma as an exact fraction over 2^steps, summed with integers.
    fn gamma_rational(k: usize, ell0: usize, steps: usize) -> (u128, u128) {
        let den = 1u128 << steps;
        let tail: u128 = (2..=steps).map(|s| s as u128 * (den >> s)).sum();
        // 1 + (4k/ell0) tail/den, with ell0 | 4k*... handled by scaling den.
        let num = den * ell0 as u128 + 4 * k as u128 * tail;
        (num, den * ell0 as u128)
    }

    #[test]
    fn schedule_examples() {
        let s = make_schedule(&Config::new(1024, 4, 7.0, 1.0).unwrap()).unwrap();
        assert_eq!((s.ell0, s.steps), (16, 7));
        assert_eq!(s.gamma, 2.4296875);
        let (num, den) = gamma_rational(4, 16, 7);
        assert_eq!(num as f64 / den as f64, 2.4296875);

        let s = make_schedule(&Config::new(4, 1, 3.0, 1.0).unwrap()).unwrap();
        assert_eq!((s.ell0, s.steps, s.gamma), (4, 1, 1.0));

        let s = make_schedule(&Config::new(1024, 4, 1.0, 0.125).unwrap()).unwrap();
        assert_eq!((s.ell0, s.steps), (128, 4));
    }

    #[test]
    fn measurement_count_examples() {
        let m = |n, k, eps| measurement_count(&Config::new(n, k, 1.0, eps).unwrap()).unwrap();
        assert_eq!(m(1024, 4, 1.0), 64);
        assert_eq!(m(4, 1, 1.0), 4);
        assert_eq!(m(1024, 4, 0.125), 152);
    }

    #[test]
    fn ceil_log2_handles_dyadic_and_inexact_ratios() {
        assert_eq!(ceil_log2_ratio(4, 1.0), 2);
        assert_eq!(ceil_log2_ratio(4, 0.125), 5);
        assert_eq!(ceil_log2_ratio(1, 1.0), 0);
        assert_eq!(ceil_log2_ratio(3, 0.75), 2);
        assert_eq!(ceil_log2_ratio(4, 0.3), 4);
        // 1 / (1/3) rounds to exactly 3.0 in f64, but 1/0.333.. is slightly
        // above or below 3 depending on the rounding of epsilon.
        assert_eq!(ceil_log2_ratio(1, 1.0 / 3.0), 2);
        // 1/0.5000000000000001 is just below 2 -> c = 1.
        assert_eq!(ceil_log2_ratio(1, 0.5000000000000001), 1);
        // 1/0.49999999999999994 is just above 2 -> c = 2.
        assert_eq!(ceil_log2_ratio(1, 0.49999999999999994), 2);
    }

    #[test]
    fn gamma_matches_rational_oracle_on_grid() {
        for log_n in 0..=16u32 {
            let n = 1usize << log_n;
            for log_k in 0..=log_n {
                let k = 1usize << log_k;
                for eps in [1.0, 0.5, 0.25, 0.125, 1.0 / 64.0] {
                    let s = make_schedule(&Config::new(n, k, 1.0, eps).unwrap()).unwrap();
                    let (num, den) = gamma_rational(k, s.ell0, s.steps);
                    assert_eq!(s.gamma, num as f64 / den as f64, "n={n} k={k} eps={eps}");
                    assert!((1.0..=2.5).contains(&s.gamma));
                }
            }
        }
    }

    #[test]
    fn per_step_energy_sums_to_budget() {
        let cfg = Config::new(4096, 8, 313.5, 1.0).unwrap();
        let s = make_schedule(&cfg).unwrap();
        let energies: Vec<f64> = (1..=s.steps).map(|t| s.step_energy(t, cfg.k())).collect();
        let total: f64 = energies.iter().sum();
        assert!((total - cfg.energy()).abs() <= 1e-9 * cfg.energy());
        assert!((energies[0] - cfg.energy() / s.gamma).abs() < 1e-9);
        assert!(energies[1] < energies[0]);
        for w in energies[1..].windows(2) {
            assert!(w[1] < w[0]);
        }
        for t in 2..=s.steps {
            let expected = cfg.energy() / s.gamma * (4 * cfg.k()) as f64 / s.ell0 as f64
                * t as f64
                * 0.5f64.powi(t as i32);
            assert!((energies[t - 1] - expected).abs() < 1e-9 * cfg.energy());
        }
    }

    #[test]
    fn widths_halve_and_amplitudes_increase() {
        let s = make_schedule(&Config::new(2048, 4, 50.0, 0.5).unwrap()).unwrap();
        assert_eq!(*s.support_widths.last().unwrap(), 1);
        for w in s.support_widths.windows(2) {
            assert_eq!(w[1] * 2, w[0]);
        }
        for a in s.amplitudes.windows(2) {
            assert!(a[1] > a[0]);
        }
        assert_eq!(s.scale_at(1), s.ell0.trailing_zeros());
        assert_eq!(s.scale_at(s.steps), 11);
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut cfg = Config::new(8, 2, 1.0, 1.0).unwrap();
        assert!(make_schedule(&cfg).is_ok());
        cfg = serde_json::from_str(r#"{"n":12,"k":2,"energy":1.0,"epsilon":1.0,"seed":0}"#).unwrap();
        assert_eq!(make_schedule(&cfg), Err(CassError::DimensionNotPowerOfTwo(12)));
    }
}
