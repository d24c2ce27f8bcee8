//! Simulated measurement channel with an energy ledger.
//!
//! Recovery procedures only see an [`Oracle`]: they can ask for projections
//! of the hidden signal and read the ledger, never the signal itself.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{amplitude_for_snr, Config};
use crate::dyadic::DyadicInterval;
use crate::error::{CassError, Result};
use crate::rng::NoiseSource;

/// Relative slack allowed on the budget for floating accumulation.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    Nonnegative,
    RandomSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenSignal {
    coefficients: Vec<f64>,
    support: Vec<usize>,
    amplitude: f64,
    sign_mode: SignMode,
}

impl HiddenSignal {
    /// Builds a signal from explicit coefficients; the support is the set of
    /// nonzero positions and the amplitude the smallest nonzero magnitude.
    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        let support: Vec<usize> = coefficients
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        let amplitude = support
            .iter()
            .map(|&i| coefficients[i].abs())
            .fold(f64::INFINITY, f64::min);
        let sign_mode = if coefficients.iter().all(|v| *v >= 0.0) {
            SignMode::Nonnegative
        } else {
            SignMode::RandomSign
        };
        HiddenSignal {
            coefficients,
            support,
            amplitude: if amplitude.is_finite() { amplitude } else { 0.0 },
            sign_mode,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Sorted 0-based support.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn sign_mode(&self) -> SignMode {
        self.sign_mode
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Draws a k-sparse signal with uniformly random support whose nonzeros all
/// have magnitude `amplitude`.
pub fn make_signal_with_amplitude<R: Rng + ?Sized>(
    cfg: &Config,
    amplitude: f64,
    sign_mode: SignMode,
    rng: &mut R,
) -> HiddenSignal {
    let mut coefficients = vec![0.0; cfg.n()];
    let mut support = index::sample(rng, cfg.n(), cfg.k()).into_vec();
    support.sort_unstable();
    for &i in &support {
        coefficients[i] = match sign_mode {
            SignMode::Nonnegative => amplitude,
            SignMode::RandomSign => {
                if rng.gen::<bool>() {
                    amplitude
                } else {
                    -amplitude
                }
            }
        };
    }
    HiddenSignal {
        coefficients,
        support,
        amplitude,
        sign_mode,
    }
}

/// Draws a k-sparse signal whose nonzero magnitude reaches `snr_db`.
pub fn make_signal<R: Rng + ?Sized>(
    cfg: &Config,
    snr_db: f64,
    sign_mode: SignMode,
    rng: &mut R,
) -> HiddenSignal {
    let amplitude = amplitude_for_snr(snr_db, cfg.energy(), cfg.n());
    make_signal_with_amplitude(cfg, amplitude, sign_mode, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    budget: f64,
    spent: f64,
    queries: usize,
}

impl EnergyLedger {
    pub fn new(budget: f64) -> Self {
        EnergyLedger {
            budget,
            spent: 0.0,
            queries: 0,
        }
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn remaining(&self) -> f64 {
        self.budget - self.spent
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    fn charge(&mut self, charge: f64) -> Result<()> {
        if self.spent + charge > self.budget * (1.0 + BUDGET_TOLERANCE) {
            return Err(CassError::BudgetExceeded {
                budget: self.budget,
                spent: self.spent,
                charge,
            });
        }
        self.spent += charge;
        self.queries += 1;
        Ok(())
    }
}

pub struct Oracle<N> {
    signal: HiddenSignal,
    noise: N,
    ledger: EnergyLedger,
}

impl<N: NoiseSource> Oracle<N> {
    pub fn new(signal: HiddenSignal, budget: f64, noise: N) -> Self {
        Oracle {
            signal,
            noise,
            ledger: EnergyLedger::new(budget),
        }
    }

    pub fn dimension(&self) -> usize {
        self.signal.len()
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    /// `amplitude * sum_{i in interval} x_i + z`, charging `amplitude^2 |interval|`.
    pub fn measure_interval(&mut self, interval: DyadicInterval, amplitude: f64) -> Result<f64> {
        let n = self.dimension();
        let range = interval.range(n);
        if interval.scale() > n.trailing_zeros() || range.end > n {
            return Err(CassError::InvalidInterval {
                scale: interval.scale(),
                location: interval.location(),
                n,
            });
        }
        self.ledger
            .charge(amplitude * amplitude * range.len() as f64)?;
        let sum: f64 = self.signal.coefficients[range].iter().sum();
        Ok(amplitude * sum + self.noise.next_noise())
    }

    /// `<a, x> + z`, charging `||a||^2`.
    pub fn measure_dense(&mut self, a: &[f64]) -> Result<f64> {
        let n = self.dimension();
        if a.len() != n {
            return Err(CassError::DimensionMismatch {
                expected: n,
                actual: a.len(),
            });
        }
        self.ledger.charge(a.iter().map(|v| v * v).sum())?;
        let dot: f64 = a
            .iter()
            .zip(&self.signal.coefficients)
            .map(|(a, x)| a * x)
            .sum();
        Ok(dot + self.noise.next_noise())
    }
}
