//! CSV and JSON result tables.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::OutputFormat;
use crate::error::{CassError, Result};

pub const CSV_COLUMNS: [&str; 16] = [
    "algorithm",
    "n",
    "k",
    "M",
    "epsilon",
    "snr_db",
    "trials",
    "fwer",
    "fwer_ci_lo",
    "fwer_ci_hi",
    "mean_d",
    "mean_d_stderr",
    "mean_psnr_db",
    "m",
    "energy",
    "seed",
];

/// One aggregated sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "M")]
    pub budget: f64,
    pub epsilon: f64,
    pub snr_db: f64,
    pub trials: usize,
    pub fwer: f64,
    pub fwer_ci_lo: f64,
    pub fwer_ci_hi: f64,
    pub mean_d: f64,
    pub mean_d_stderr: f64,
    pub mean_psnr_db: Option<f64>,
    /// Measurements per trial.
    pub m: usize,
    /// Mean energy spent per trial.
    pub energy: f64,
    pub seed: u64,
}

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CassError::Io(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.n.to_string(),
            r.k.to_string(),
            num(r.budget),
            num(r.epsilon),
            num(r.snr_db),
            r.trials.to_string(),
            num(r.fwer),
            num(r.fwer_ci_lo),
            num(r.fwer_ci_hi),
            num(r.mean_d),
            num(r.mean_d_stderr),
            r.mean_psnr_db.map(num).unwrap_or_default(),
            r.m.to_string(),
            num(r.energy),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CassError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn format_json(rows: &[ResultRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| CassError::Io(e.to_string()))
}

pub fn emit_results(rows: &[ResultRow], format: OutputFormat, path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(CassError::InvalidExperiment("no rows to emit".into()));
    }
    let text = match format {
        OutputFormat::Csv => format_csv(rows)?,
        OutputFormat::Json => format_json(rows)? + "\n",
    };
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CassError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            algorithm: "cass".into(),
            n: 1024,
            k: 4,
            budget: 1024.0,
            epsilon: 1.0,
            snr_db: 15.5,
            trials: 100,
            fwer: 0.03,
            fwer_ci_lo: 0.0102,
            fwer_ci_hi: 0.0847,
            mean_d: 0.06,
            mean_d_stderr: 1.0 / 3.0,
            mean_psnr_db: None,
            m: 64,
            energy: 1024.0000000000002,
            seed: 42,
        }
    }

    #[test]
    fn csv_layout() {
        let text = format_csv(&[row()]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 16);
        assert_eq!(fields[11], "3.3333333333333331e-1");
        assert_eq!(fields[12], "");
        assert_eq!(fields[14].parse::<f64>().unwrap(), 1024.0000000000002);
    }

    #[test]
    fn json_round_trip() {
        let mut b = row();
        b.mean_psnr_db = Some(12.345678901234567);
        let rows = vec![row(), b];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit_results(&rows, OutputFormat::Json, &path).unwrap();
        assert_eq!(read_json(&path).unwrap(), rows);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"M\": 1024.0"));
    }

    #[test]
    fn empty_table_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        assert!(emit_results(&[], OutputFormat::Csv, &path).is_err());
        assert!(!path.exists());
    }
}
