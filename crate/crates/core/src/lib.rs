//! Adaptive sparse support recovery by compressive sense and search, with
//! direct-sensing and OMP baselines, orthonormal Haar transforms and a
//! seeded Monte Carlo harness.
//!
//! ```
//! use cass::{run_cass, Config, HiddenSignal, Oracle, Silent};
//!
//! let cfg = Config::new(8, 1, 8.0, 1.0).unwrap();
//! let mut x = vec![0.0; 8];
//! x[4] = 1.0;
//! let mut oracle = Oracle::new(HiddenSignal::from_coefficients(x), cfg.energy(), Silent);
//! let result = run_cass(&mut oracle, &cfg).unwrap();
//! assert_eq!(result.support, vec![4]);
//! assert_eq!(result.measurements, 6);
//! ```

pub mod adaptive;
pub mod baselines;

pub mod config;
pub mod dyadic;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod schedule;
pub mod wavelet;

pub use baselines::{omp, run_direct, run_omp, run_omp_with_ensemble, GaussianEnsemble, OmpSolution};
pub use adaptive::{bisect_survivors, run_cass, run_cass_with, select_top_k, CassOptions, RecoveryResult, StepRecord};
pub use config::{amplitude_for_snr, min_amplitude_theorem1, min_amplitude_theorem2, snr_db, Config, DEFAULT_SEED};
pub use dyadic::{dyadic_indices, DyadicInterval};
pub use error::{CassError, Result};
pub use metrics::{aggregate, psnr, set_difference, Summary, TrialReport};
pub use oracle::{make_signal, make_signal_with_amplitude, EnergyLedger, HiddenSignal, Oracle, SignMode};
pub use rng::{NoiseSource, NoiseStream, Replay, Silent};
pub use schedule::{make_schedule, measurement_count, Schedule};
pub use wavelet::{best_k_term, haar_analyze, haar_analyze_2d, haar_synthesize, haar_synthesize_2d, HaarCoefficients};
