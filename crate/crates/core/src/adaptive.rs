//! Compressive adaptive sense and search.
//!
//! Step 1 measures all `ell0` partitions at scale `log2 ell0`. Every later
//! step measures the two halves of each of the `k` intervals whose previous
//! measurement had the largest magnitude, with amplitudes that grow like
//! `sqrt(s)` while the widths halve. On the last step the intervals are
//! single indices and the `k` strongest become the support estimate.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::dyadic::DyadicInterval;
use crate::error::{CassError, Result};
use crate::oracle::Oracle;
use crate::rng::NoiseSource;
use crate::schedule::make_schedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub scale: u32,
    pub amplitude: f64,
    /// Measured locations (1-based), in measurement order.
    pub locations: Vec<usize>,
    pub values: Vec<f64>,
    /// Kept locations, strongest first.
    pub survivors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    /// Estimated support, 0-based, strongest first.
    pub support: Vec<usize>,
    /// Coefficient estimates aligned with `support`.
    pub estimates: Vec<f64>,
    pub measurements: usize,
    pub energy: f64,
    /// Per-step log; empty unless requested.
    pub steps: Vec<StepRecord>,
}

impl RecoveryResult {
    pub fn support_set(&self) -> BTreeSet<usize> {
        self.support.iter().copied().collect()
    }

    /// Dense length-`n` vector with the estimates placed on the support.
    pub fn reconstruct(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (&i, &v) in self.support.iter().zip(&self.estimates) {
            x[i] = v;
        }
        x
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CassOptions {
    pub keep_log: bool,
}

/// Locations of the `k` largest `|y|`, strongest first; equal magnitudes go
/// to the smaller location.
pub fn select_top_k(measurements: &[(usize, f64)], k: usize) -> Result<Vec<usize>> {
    if measurements.len() < k {
        return Err(CassError::TooFewMeasurements {
            needed: k,
            available: measurements.len(),
        });
    }
    let mut ranked: Vec<(usize, f64)> = measurements.to_vec();
    ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    Ok(ranked.into_iter().take(k).map(|(loc, _)| loc).collect())
}

/// Children `2l-1, 2l` of each survivor, in survivor order.
pub fn bisect_survivors(survivors: &[usize], scale: u32, finest_scale: u32) -> Result<Vec<usize>> {
    if scale >= finest_scale {
        return Err(CassError::BisectAtFinestScale(scale));
    }
    Ok(survivors
        .iter()
        .flat_map(|&l| [2 * l - 1, 2 * l])
        .collect())
}

pub fn run_cass<N: NoiseSource>(oracle: &mut Oracle<N>, cfg: &Config) -> Result<RecoveryResult> {
    run_cass_with(oracle, cfg, CassOptions::default())
}

pub fn run_cass_with<N: NoiseSource>(
    oracle: &mut Oracle<N>,
    cfg: &Config,
    opts: CassOptions,
) -> Result<RecoveryResult> {
    let schedule = make_schedule(cfg)?;
    let n = cfg.n();
    let k = cfg.k();
    if oracle.dimension() != n {
        return Err(CassError::DimensionMismatch {
            expected: n,
            actual: oracle.dimension(),
        });
    }
    let finest = cfg.log2_n();
    let queries_before = oracle.ledger().queries();
    let spent_before = oracle.ledger().spent();

    let mut active: Vec<usize> = (1..=schedule.ell0).collect();
    let mut steps = Vec::new();
    let mut last: Vec<(usize, f64)> = Vec::new();
    let mut survivors = Vec::new();

    for step in 1..=schedule.steps {
        let scale = schedule.scale_at(step);
        let amplitude = schedule.amplitudes[step - 1];
        last.clear();
        for &location in &active {
            let interval = DyadicInterval::new(scale, location, n)?;
            last.push((location, oracle.measure_interval(interval, amplitude)?));
        }
        survivors = select_top_k(&last, k)?;
        if opts.keep_log {
            steps.push(StepRecord {
                step,
                scale,
                amplitude,
                locations: active.clone(),
                values: last.iter().map(|m| m.1).collect(),
                survivors: survivors.clone(),
            });
        }
        if step < schedule.steps {
            active = bisect_survivors(&survivors, scale, finest)?;
        }
    }

    // Final intervals are singletons: location l is index l - 1, and the
    // estimate rescales its measurement by 1 / a_{s0}.
    let final_amplitude = *schedule.amplitudes.last().expect("at least one step");
    let estimates = survivors
        .iter()
        .map(|loc| {
            let y = last.iter().find(|m| m.0 == *loc).expect("survivor was measured").1;
            y / final_amplitude
        })
        .collect();
    Ok(RecoveryResult {
        support: survivors.iter().map(|l| l - 1).collect(),
        estimates,
        measurements: oracle.ledger().queries() - queries_before,
        energy: oracle.ledger().spent() - spent_before,
        steps,
    })
}
