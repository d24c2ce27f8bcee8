//! Monte Carlo checks of the two recovery guarantees.

use serde::{Deserialize, Serialize};

use super::{run_trials, summarize, Algorithm, ResultRow, TrialSetup};
use crate::config::{min_amplitude_theorem1, min_amplitude_theorem2, Config};
use crate::error::{CassError, Result};
use crate::metrics::{aggregate, Summary};
use crate::oracle::{SignMode, BUDGET_TOLERANCE};
use crate::schedule::make_schedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Check {
    pub n: usize,
    pub k: usize,
    pub energy: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Multiplier on the threshold amplitude (1 = exactly at threshold).
    pub amplitude_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub pass: bool,
    pub threshold: f64,
    pub amplitude: f64,
    pub fwer: f64,
    pub fwer_ci: (f64, f64),
    pub failures: usize,
    pub trials: usize,
    /// `delta + 3 sqrt(delta (1 - delta) / trials)`.
    pub fwer_bound: f64,
    pub expected_measurements: usize,
    pub measurements_ok: bool,
    pub energy_ok: bool,
    pub row: ResultRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Check {
    pub n: usize,
    pub k: usize,
    pub energy: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub amplitude_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub pass: bool,
    pub threshold: f64,
    pub amplitude: f64,
    pub mean_d: f64,
    pub mean_d_stderr: f64,
    /// `k epsilon + 3 stderr`.
    pub mean_d_bound: f64,
    pub trials: usize,
    pub measurements: usize,
    /// `8k/epsilon + 2k log2(n/k)`.
    pub measurement_bound: f64,
    /// `4k/epsilon + 2k log2(n epsilon / 4k)` when `4k/epsilon` is a power
    /// of two not exceeding `n`.
    pub exact_measurements: Option<usize>,
    pub measurements_ok: bool,
    pub energy_ok: bool,
    pub row: ResultRow,
}

fn energy_audit(summary: &Summary, budget: f64) -> bool {
    (summary.max_energy - budget).abs() <= BUDGET_TOLERANCE * budget
        && (summary.min_energy - budget).abs() <= BUDGET_TOLERANCE * budget
}

/// Nonnegative signals with every nonzero at `factor` times the exact
/// recovery threshold, `epsilon = 1`.
pub fn verify_theorem1(check: &Theorem1Check, workers: usize) -> Result<Theorem1Report> {
    if check.trials == 0 {
        return Err(CassError::InvalidExperiment("trials must be positive".into()));
    }
    if !(check.amplitude_factor.is_finite() && check.amplitude_factor > 0.0) {
        return Err(CassError::InvalidAmplitude(check.amplitude_factor));
    }
    let cfg = Config::with_seed(check.n, check.k, check.energy, 1.0, check.seed)?;
    let threshold = min_amplitude_theorem1(&cfg, check.delta)?;
    let amplitude = threshold * check.amplitude_factor;
    let mut setup = TrialSetup::new(Algorithm::Cass, cfg, 0.0, SignMode::Nonnegative, check.seed, 0)?;
    setup.amplitude = amplitude;
    setup.snr_db = crate::config::snr_db(amplitude, cfg.energy(), cfg.n())?;

    let reports = run_trials(&setup, check.trials, workers)?;
    let summary = aggregate(&reports)?;
    let schedule = make_schedule(&cfg)?;
    let expected_measurements = schedule.measurement_count(cfg.k());
    let measurements_ok = reports.iter().all(|r| r.measurements == expected_measurements);
    let energy_ok = energy_audit(&summary, cfg.energy());
    let delta = check.delta;
    let fwer_bound = delta + 3.0 * (delta * (1.0 - delta) / check.trials as f64).sqrt();
    Ok(Theorem1Report {
        pass: summary.fwer <= fwer_bound && measurements_ok && energy_ok,
        threshold,
        amplitude,
        fwer: summary.fwer,
        fwer_ci: summary.fwer_ci,
        failures: summary.failures,
        trials: summary.trials,
        fwer_bound,
        expected_measurements,
        measurements_ok,
        energy_ok,
        row: summarize(&setup, &summary),
    })
}

/// Signed signals on a uniformly random support with every nonzero at
/// `factor` times the set-difference threshold.
pub fn verify_theorem2(check: &Theorem2Check, workers: usize) -> Result<Theorem2Report> {
    if check.trials == 0 {
        return Err(CassError::InvalidExperiment("trials must be positive".into()));
    }
    if !(check.amplitude_factor.is_finite() && check.amplitude_factor > 0.0) {
        return Err(CassError::InvalidAmplitude(check.amplitude_factor));
    }
    let cfg = Config::with_seed(check.n, check.k, check.energy, check.epsilon, check.seed)?;
    let threshold = min_amplitude_theorem2(&cfg);
    let amplitude = threshold * check.amplitude_factor;
    let mut setup = TrialSetup::new(Algorithm::Cass, cfg, 0.0, SignMode::RandomSign, check.seed, 0)?;
    setup.amplitude = amplitude;
    setup.snr_db = crate::config::snr_db(amplitude, cfg.energy(), cfg.n())?;

    let reports = run_trials(&setup, check.trials, workers)?;
    let summary = aggregate(&reports)?;
    let k = cfg.k() as f64;
    let measurement_bound = 8.0 * k / cfg.epsilon() + 2.0 * k * (cfg.n() as f64 / k).log2();
    let measurements = make_schedule(&cfg)?.measurement_count(cfg.k());
    let first_partitions = 4.0 * k / cfg.epsilon();
    let exact_measurements = if first_partitions.fract() == 0.0
        && (first_partitions as usize).is_power_of_two()
        && first_partitions <= cfg.n() as f64
    {
        let ell0 = first_partitions as usize;
        Some(ell0 + 2 * cfg.k() * (cfg.n() / ell0).trailing_zeros() as usize)
    } else {
        None
    };
    let measurements_ok = reports.iter().all(|r| {
        r.measurements == measurements
            && r.measurements as f64 <= measurement_bound
            && exact_measurements.is_none_or(|m| m == r.measurements)
    });
    let energy_ok = energy_audit(&summary, cfg.energy());
    let mean_d_bound = k * cfg.epsilon() + 3.0 * summary.mean_d_stderr;
    Ok(Theorem2Report {
        pass: summary.mean_d <= mean_d_bound && measurements_ok && energy_ok,
        threshold,
        amplitude,
        mean_d: summary.mean_d,
        mean_d_stderr: summary.mean_d_stderr,
        mean_d_bound,
        trials: summary.trials,
        measurements,
        measurement_bound,
        exact_measurements,
        measurements_ok,
        energy_ok,
        row: summarize(&setup, &summary),
    })
}
