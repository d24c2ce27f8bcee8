//! Seeded Monte Carlo experiments over CASS and the baselines.
//!
//! Every trial draws its signal, noise and (for OMP) ensemble from streams
//! keyed on `(seed, algorithm, sweep point, trial)`, never on the worker
//! that runs it, so results are identical for any worker count.

mod emit;
mod verify;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{run_direct, run_omp};
use crate::adaptive::{run_cass, RecoveryResult};
use crate::config::{amplitude_for_snr, Config, DEFAULT_SEED};
use crate::error::{CassError, Result};
use crate::metrics::{aggregate, psnr, Summary, TrialReport};
use crate::oracle::{make_signal_with_amplitude, HiddenSignal, Oracle, SignMode, BUDGET_TOLERANCE};
use crate::rng::{derive_seed, stream, NoiseStream, Purpose};
use crate::schedule::measurement_count;
use crate::wavelet::{best_k_term, haar_analyze, haar_synthesize, piecewise_constant, HaarCoefficients};

pub use emit::{emit_results, format_csv, format_json, read_json, ResultRow, CSV_COLUMNS};
pub use verify::{verify_theorem1, verify_theorem2, Theorem1Check, Theorem1Report, Theorem2Check, Theorem2Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Cass,
    Direct,
    Omp,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Cass => "cass",
            Algorithm::Direct => "direct",
            Algorithm::Omp => "omp",
        }
    }

    fn stream_tag(&self) -> u64 {
        match self {
            Algorithm::Cass => 1,
            Algorithm::Direct => 2,
            Algorithm::Omp => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    N,
    SnrDb,
    Epsilon,
}

/// How test signals are generated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalModel {
    /// Exactly k-sparse with equal magnitudes.
    #[default]
    Sparse,
    /// Piecewise-constant signal on [0, 1), sensed in the Haar domain.
    HaarPiecewise,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_epsilon() -> f64 {
    1.0
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// A sweep of one variable with every other parameter fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub n: usize,
    pub k: usize,
    /// Total sensing energy M; defaults to `n` at each point.
    #[serde(default, alias = "M")]
    pub energy: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub snr_db: f64,
    pub trials: usize,
    #[serde(default = "default_sign_mode")]
    pub sign_mode: SignMode,
    #[serde(default)]
    pub signal: SignalModel,
    /// OMP row count; defaults to the CASS measurement count at the point.
    #[serde(default)]
    pub omp_measurements: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_sign_mode() -> SignMode {
    SignMode::Nonnegative
}

/// Fully resolved parameters for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSetup {
    pub algorithm: Algorithm,
    pub cfg: Config,
    pub snr_db: f64,
    /// Nonzero magnitude for sparse signals.
    pub amplitude: f64,
    pub sign_mode: SignMode,
    pub signal: SignalModel,
    pub omp_measurements: usize,
    /// Seed every stream of this point is derived from.
    pub point_seed: u64,
}

impl TrialSetup {
    pub fn new(
        algorithm: Algorithm,
        cfg: Config,
        snr_db: f64,
        sign_mode: SignMode,
        master_seed: u64,
        point: u64,
    ) -> Result<Self> {
        Ok(TrialSetup {
            algorithm,
            cfg,
            snr_db,
            amplitude: amplitude_for_snr(snr_db, cfg.energy(), cfg.n()),
            sign_mode,
            signal: SignalModel::Sparse,
            omp_measurements: measurement_count(&cfg)?,
            point_seed: derive_seed(master_seed, &[algorithm.stream_tag(), point]),
        })
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CassError::InvalidExperiment("trials must be positive".into()));
        }
        if self.sweep_values.is_empty() {
            return Err(CassError::InvalidExperiment("sweep_values is empty".into()));
        }
        self.setups().map(|_| ())
    }

    /// Resolves and validates every sweep point before anything runs.
    pub fn setups(&self) -> Result<Vec<TrialSetup>> {
        self.sweep_values
            .iter()
            .enumerate()
            .map(|(point, &value)| {
                let (mut n, mut snr, mut eps) = (self.n, self.snr_db, self.epsilon);
                match self.sweep_variable {
                    SweepVariable::N => {
                        if !(value >= 1.0 && value.fract() == 0.0 && value <= (1u64 << 40) as f64) {
                            return Err(CassError::InvalidExperiment(format!("n = {value} is not a positive integer")));
                        }
                        n = value as usize;
                    }
                    SweepVariable::SnrDb => snr = value,
                    SweepVariable::Epsilon => eps = value,
                }
                if !snr.is_finite() {
                    return Err(CassError::InvalidExperiment(format!("snr_db = {snr} is not finite")));
                }
                let energy = self.energy.unwrap_or(n as f64);
                let cfg = Config::with_seed(n, self.k, energy, eps, self.seed)?;
                let mut setup = TrialSetup::new(self.algorithm, cfg, snr, self.sign_mode, self.seed, point as u64)?;
                setup.signal = self.signal;
                if let Some(m) = self.omp_measurements {
                    if m < self.k {
                        return Err(CassError::InvalidExperiment(format!(
                            "omp_measurements = {m} is below k = {}",
                            self.k
                        )));
                    }
                    setup.omp_measurements = m;
                }
                Ok(setup)
            })
            .collect()
    }
}

/// Truth, hidden signal, budget and the signal-domain reference used for PSNR.
struct Instance {
    truth: Vec<usize>,
    hidden: HiddenSignal,
    cfg: Config,
    haar_levels: Option<usize>,
    reference: Vec<f64>,
}

fn k_largest(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    let mut top = order[..k].to_vec();
    top.sort_unstable();
    top
}

fn draw_instance(setup: &TrialSetup, trial: u64) -> Result<Instance> {
    let mut rng = stream(setup.point_seed, Purpose::Signal, trial);
    match setup.signal {
        SignalModel::Sparse => {
            let hidden = make_signal_with_amplitude(&setup.cfg, setup.amplitude, setup.sign_mode, &mut rng);
            Ok(Instance {
                truth: hidden.support().to_vec(),
                reference: hidden.coefficients().to_vec(),
                hidden,
                cfg: setup.cfg,
                haar_levels: None,
            })
        }
        SignalModel::HaarPiecewise => {
            let n = setup.cfg.n();
            let x = piecewise_constant(n, 8, &mut rng);
            let c = haar_analyze(&x, None)?;
            let truth = k_largest(&c.data, setup.cfg.k());
            // Budget chosen so the RMS of the k largest coefficients sits at
            // snr_db. (The k-th largest alone can be zero when the pieces
            // happen to align with dyadic boundaries.)
            let top_sq: f64 = truth.iter().map(|&i| c.data[i] * c.data[i]).sum();
            let rms_sq = (top_sq / truth.len() as f64).max(f64::MIN_POSITIVE);
            let energy = 10f64.powf(setup.snr_db / 10.0) * n as f64 / rms_sq;
            let cfg = Config::with_seed(n, setup.cfg.k(), energy, setup.cfg.epsilon(), setup.cfg.seed())?;
            Ok(Instance {
                truth,
                hidden: HiddenSignal::from_coefficients(c.data),
                cfg,
                haar_levels: Some(c.levels),
                reference: x,
            })
        }
    }
}

/// Runs one trial: fresh signal, fresh oracle, fresh noise.
pub fn run_trial(setup: &TrialSetup, trial: u64) -> Result<TrialReport> {
    let started = Instant::now();
    let inst = draw_instance(setup, trial)?;
    let n = inst.cfg.n();
    let mut oracle = Oracle::new(inst.hidden, inst.cfg.energy(), NoiseStream::new(setup.point_seed, trial));
    let result: RecoveryResult = match setup.algorithm {
        Algorithm::Cass => run_cass(&mut oracle, &inst.cfg)?,
        Algorithm::Direct => run_direct(&mut oracle, &inst.cfg)?,
        Algorithm::Omp => {
            let mut erng = stream(setup.point_seed, Purpose::Ensemble, trial);
            match run_omp(&mut oracle, &inst.cfg, setup.omp_measurements, &mut erng) {
                Ok(r) => r,
                // A singular fit counts as a failed trial.
                Err(CassError::SingularFit) => {
                    let mut report = TrialReport::new(&inst.truth, &[], oracle.ledger().queries(), oracle.ledger().spent());
                    report.exact_recovery = false;
                    report.elapsed_secs = started.elapsed().as_secs_f64();
                    return Ok(report);
                }
                Err(e) => return Err(e),
            }
        }
    };
    let budget = inst.cfg.energy();
    if (result.energy - budget).abs() > BUDGET_TOLERANCE * budget {
        return Err(CassError::BudgetExceeded {
            budget,
            spent: result.energy,
            charge: 0.0,
        });
    }
    let mut report = TrialReport::new(&inst.truth, &result.support, result.measurements, result.energy);
    let estimate = result.reconstruct(n);
    let estimate = match inst.haar_levels {
        Some(levels) => haar_synthesize(&HaarCoefficients { data: estimate, levels })?,
        None => estimate,
    };
    report.psnr_db = Some(psnr(&inst.reference, &estimate)?);
    report.elapsed_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Best k-term PSNR of a Haar-domain instance; the reference a noiseless
/// direct measurement of every coefficient would reach.
pub fn best_k_term_psnr(setup: &TrialSetup, trial: u64) -> Result<f64> {
    let inst = draw_instance(setup, trial)?;
    let levels = inst.haar_levels.unwrap_or(0);
    let c = HaarCoefficients {
        data: inst.hidden.coefficients().to_vec(),
        levels,
    };
    let approx = best_k_term(&c, setup.cfg.k())?;
    let x_hat = if inst.haar_levels.is_some() {
        haar_synthesize(&approx)?
    } else {
        approx.data
    };
    psnr(&inst.reference, &x_hat)
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CassError::InvalidExperiment(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs `trials` independent trials of one setup. `workers = 0` uses the
/// global pool (all cores).
pub fn run_trials(setup: &TrialSetup, trials: usize, workers: usize) -> Result<Vec<TrialReport>> {
    with_workers(workers, || {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| run_trial(setup, t))
            .collect::<Result<Vec<_>>>()
    })?
}

pub fn summarize(setup: &TrialSetup, summary: &Summary) -> ResultRow {
    ResultRow {
        algorithm: setup.algorithm.name().to_string(),
        n: setup.cfg.n(),
        k: setup.cfg.k(),
        budget: setup.cfg.energy(),
        epsilon: setup.cfg.epsilon(),
        snr_db: setup.snr_db,
        trials: summary.trials,
        fwer: summary.fwer,
        fwer_ci_lo: summary.fwer_ci.0,
        fwer_ci_hi: summary.fwer_ci.1,
        mean_d: summary.mean_d,
        mean_d_stderr: summary.mean_d_stderr,
        mean_psnr_db: summary.mean_psnr_db,
        m: summary.max_measurements,
        energy: summary.mean_energy,
        seed: setup.cfg.seed(),
    }
}

/// Runs every sweep point and returns one row per point.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let setups = spec.setups()?;
    let mut rows = Vec::with_capacity(setups.len());
    for setup in &setups {
        let reports = run_trials(setup, spec.trials, workers)?;
        let summary = aggregate(&reports)?;
        let mut row = summarize(setup, &summary);
        if setup.signal == SignalModel::HaarPiecewise {
            // the budget is set per trial from the signal; report its mean
            row.budget = summary.mean_energy;
        }
        rows.push(row);
    }
    Ok(rows)
}
