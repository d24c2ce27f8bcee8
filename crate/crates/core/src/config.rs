//! Problem instance description and the closed-form amplitude thresholds.

use serde::{Deserialize, Serialize};

use crate::error::{CassError, Result};

/// Master seed used whenever a caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5EED_CA55;

/// A validated problem instance: dimension, sparsity, energy budget and
/// initial scale parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    n: usize,
    k: usize,
    energy: f64,
    epsilon: f64,
    seed: u64,
}

impl Config {
    pub fn new(n: usize, k: usize, energy: f64, epsilon: f64) -> Result<Self> {
        Self::with_seed(n, k, energy, epsilon, DEFAULT_SEED)
    }

    pub fn with_seed(n: usize, k: usize, energy: f64, epsilon: f64, seed: u64) -> Result<Self> {
        let cfg = Config {
            n,
            k,
            energy,
            epsilon,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Re-checks the invariants; useful after deserializing.
    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() {
            return Err(CassError::DimensionNotPowerOfTwo(self.n));
        }
        if !self.k.is_power_of_two() {
            return Err(CassError::SparsityNotPowerOfTwo(self.k));
        }
        if self.k > self.n {
            return Err(CassError::SparsityExceedsDimension {
                n: self.n,
                k: self.k,
            });
        }
        if !(self.energy.is_finite() && self.energy > 0.0) {
            return Err(CassError::InvalidEnergy(self.energy));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(CassError::InvalidEpsilon(self.epsilon));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Total sensing energy budget M.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn log2_n(&self) -> u32 {
        self.n.trailing_zeros()
    }
}

/// Smallest amplitude for which exact support recovery of a nonnegative
/// signal (with `epsilon = 1`) fails with probability at most `delta`:
/// `sqrt(20 (n/M) (ln k + ln(8/delta)))`.
pub fn min_amplitude_theorem1(cfg: &Config, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(CassError::InvalidDelta(delta));
    }
    let k = cfg.k() as f64;
    let ratio = cfg.n() as f64 / cfg.energy();
    Ok((20.0 * ratio * (k.ln() + (8.0 / delta).ln())).sqrt())
}

/// Amplitude above which the expected symmetric set difference of a
/// signed signal is at most `k * epsilon`:
/// `sqrt(20 (n/M) (ln k + 2 ln(8/epsilon)))`.
pub fn min_amplitude_theorem2(cfg: &Config) -> f64 {
    let k = cfg.k() as f64;
    let ratio = cfg.n() as f64 / cfg.energy();
    (20.0 * ratio * (k.ln() + 2.0 * (8.0 / cfg.epsilon()).ln())).sqrt()
}

/// `10 log10(x_k^2 M / n)`, the SNR of the k-th largest entry.
pub fn snr_db(x_k: f64, energy: f64, n: usize) -> Result<f64> {
    if !(x_k.is_finite() && x_k > 0.0) {
        return Err(CassError::InvalidAmplitude(x_k));
    }
    if !(energy.is_finite() && energy > 0.0) {
        return Err(CassError::InvalidEnergy(energy));
    }
    Ok(10.0 * (x_k * x_k * energy / n as f64).log10())
}

/// Inverse of [`snr_db`]: the amplitude reaching `snr_db` at energy `M`.
pub fn amplitude_for_snr(snr_db: f64, energy: f64, n: usize) -> f64 {
    (10f64.powf(snr_db / 10.0) * n as f64 / energy).sqrt()
}
