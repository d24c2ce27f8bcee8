use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cass::harness::{
    emit_results, format_csv, format_json, run_experiment, verify_theorem1, verify_theorem2, Algorithm,
    ExperimentSpec, OutputFormat, ResultRow, SignalModel, SweepVariable, Theorem1Check, Theorem2Check,
};
use cass::{SignMode, DEFAULT_SEED};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cass-lab", version, about = "Monte Carlo experiments for adaptive sense-and-search recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; every trial stream derives from it.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Trials per point.
    #[arg(long)]
    trials: Option<usize>,
    /// Output file; results go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Cass,
    Direct,
    Omp,
}

impl From<Alg> for Algorithm {
    fn from(a: Alg) -> Self {
        match a {
            Alg::Cass => Algorithm::Cass,
            Alg::Direct => Algorithm::Direct,
            Alg::Omp => Algorithm::Omp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Signs {
    Nonnegative,
    RandomSign,
}

impl From<Signs> for SignMode {
    fn from(s: Signs) -> Self {
        match s {
            Signs::Nonnegative => SignMode::Nonnegative,
            Signs::RandomSign => SignMode::RandomSign,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Alg::Cass)]
    algorithm: Alg,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Total sensing energy; defaults to n at each point.
    #[arg(long)]
    energy: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Signs::Nonnegative)]
    sign_mode: Signs,
    /// OMP measurement count; defaults to the CASS count at each point.
    #[arg(long)]
    omp_measurements: Option<usize>,
    /// Sense approximately sparse piecewise-constant signals in the Haar domain.
    #[arg(long)]
    haar: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON spec.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check the exact-recovery guarantee for nonnegative signals.
    VerifyT1 {
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 1024.0)]
        energy: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Signal amplitude as a multiple of the threshold.
        #[arg(long, default_value_t = 1.0)]
        amplitude_factor: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Check the expected set-difference guarantee for signed signals.
    VerifyT2 {
        #[arg(long, default_value_t = 2048)]
        n: usize,
        #[arg(long, default_value_t = 32)]
        k: usize,
        #[arg(long, default_value_t = 2048.0)]
        energy: f64,
        #[arg(long, default_value_t = 0.125)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        amplitude_factor: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the dimension n at fixed SNR.
    SweepN {
        /// Dimensions to visit (powers of two).
        #[arg(long, value_delimiter = ',', default_values_t = vec![1024usize, 4096, 16384, 65536])]
        values: Vec<usize>,
        #[arg(long, default_value_t = 15.5)]
        snr_db: f64,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the SNR (dB) at fixed n.
    SweepSnr {
        #[arg(long, value_delimiter = ',', default_values_t = vec![6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0])]
        values: Vec<f64>,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        common: Common,
    },
}

fn write_rows(rows: &[ResultRow], common: &Common) -> Result<()> {
    match &common.out {
        Some(path) => emit_results(rows, common.format.into(), path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => match common.format {
            Format::Csv => print!("{}", format_csv(rows)?),
            Format::Json => println!("{}", format_json(rows)?),
        },
    }
    Ok(())
}

fn sweep_spec(
    variable: SweepVariable,
    values: Vec<f64>,
    n: usize,
    snr_db: f64,
    sweep: &SweepArgs,
    common: &Common,
) -> ExperimentSpec {
    ExperimentSpec {
        algorithm: sweep.algorithm.into(),
        sweep_variable: variable,
        sweep_values: values,
        n,
        k: sweep.k,
        energy: sweep.energy,
        epsilon: sweep.epsilon,
        snr_db,
        trials: common.trials.unwrap_or(1000),
        sign_mode: sweep.sign_mode.into(),
        signal: if sweep.haar {
            SignalModel::HaarPiecewise
        } else {
            SignalModel::Sparse
        },
        omp_measurements: sweep.omp_measurements,
        output: common.out.clone(),
        format: common.format.into(),
        seed: common.seed,
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { spec, common } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let mut parsed: ExperimentSpec =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", spec.display()))?;
            // command-line flags override the file
            if let Some(t) = common.trials {
                parsed.trials = t;
            }
            if common.seed != DEFAULT_SEED {
                parsed.seed = common.seed;
            }
            let mut common = common;
            if common.out.is_none() {
                common.out = parsed.output.clone();
                common.format = match parsed.format {
                    OutputFormat::Csv => Format::Csv,
                    OutputFormat::Json => Format::Json,
                };
            }
            let rows = run_experiment(&parsed, common.workers)?;
            write_rows(&rows, &common)?;
            Ok(true)
        }
        Command::VerifyT1 {
            n,
            k,
            energy,
            delta,
            amplitude_factor,
            common,
        } => {
            let report = verify_theorem1(
                &Theorem1Check {
                    n,
                    k,
                    energy,
                    delta,
                    trials: common.trials.unwrap_or(2000),
                    seed: common.seed,
                    amplitude_factor,
                },
                common.workers,
            )?;
            eprintln!(
                "{}: fwer={} ({} / {}) bound={:.6} ci=[{:.6}, {:.6}] x_min={:.6} m={} measurements_ok={} energy_ok={}",
                if report.pass { "PASS" } else { "FAIL" },
                report.fwer,
                report.failures,
                report.trials,
                report.fwer_bound,
                report.fwer_ci.0,
                report.fwer_ci.1,
                report.amplitude,
                report.expected_measurements,
                report.measurements_ok,
                report.energy_ok,
            );
            write_rows(std::slice::from_ref(&report.row), &common)?;
            Ok(report.pass)
        }
        Command::VerifyT2 {
            n,
            k,
            energy,
            epsilon,
            amplitude_factor,
            common,
        } => {
            let report = verify_theorem2(
                &Theorem2Check {
                    n,
                    k,
                    energy,
                    epsilon,
                    trials: common.trials.unwrap_or(1000),
                    seed: common.seed,
                    amplitude_factor,
                },
                common.workers,
            )?;
            eprintln!(
                "{}: mean_d={} stderr={:.6} bound={:.6} x_min={:.6} m={} (bound {:.1}, exact {:?}) measurements_ok={} energy_ok={}",
                if report.pass { "PASS" } else { "FAIL" },
                report.mean_d,
                report.mean_d_stderr,
                report.mean_d_bound,
                report.amplitude,
                report.measurements,
                report.measurement_bound,
                report.exact_measurements,
                report.measurements_ok,
                report.energy_ok,
            );
            write_rows(std::slice::from_ref(&report.row), &common)?;
            Ok(report.pass)
        }
        Command::SweepN {
            values,
            snr_db,
            sweep,
            common,
        } => {
            let Some(&first) = values.first() else {
                bail!("no dimensions given");
            };
            let values = values.iter().map(|&v| v as f64).collect();
            let spec = sweep_spec(SweepVariable::N, values, first, snr_db, &sweep, &common);
            write_rows(&run_experiment(&spec, common.workers)?, &common)?;
            Ok(true)
        }
        Command::SweepSnr {
            values,
            n,
            sweep,
            common,
        } => {
            let snr = values.first().copied().unwrap_or(0.0);
            let spec = sweep_spec(SweepVariable::SnrDb, values, n, snr, &sweep, &common);
            write_rows(&run_experiment(&spec, common.workers)?, &common)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
