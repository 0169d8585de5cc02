//! Result rows, confidence intervals, and CSV/JSON export.

use crate::error::Result;
use crate::sim::config::SimConfig;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Aggregates for one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrPointResult {
    pub snr_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    /// 95% Wilson score interval for the block error rate.
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Mean membership queries per trial, summed over all candidates.
    pub mean_queries: f64,
    /// Mean |offset| of the selected candidate over trials with a selection.
    pub mean_chosen_offset_magnitude: f64,
    /// Trials where every candidate exhausted its budget.
    pub abandon_count: u64,
}

/// 95% Wilson score interval for a binomial proportion. Works at the
/// extremes (0 or all errors) where the normal approximation fails.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64; // 97.5th percentile of the standard normal
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // The bound on the observed side is exact; rounding must not move it.
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// One output row; matches the documented CSV column order exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub snr_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_queries: f64,
    pub abandon_count: u64,
    pub method: String,
    pub detector: String,
    pub code: String,
    pub modulation: String,
    pub sigma_e2: f64,
    pub k_factor: f64,
    pub seed: u64,
}

impl ResultRow {
    pub fn new(cfg: &SimConfig, point: &SnrPointResult) -> Self {
        ResultRow {
            snr_db: point.snr_db,
            trials: point.trials,
            block_errors: point.block_errors,
            bler: point.bler,
            ci_lo: point.ci_lo,
            ci_hi: point.ci_hi,
            mean_queries: point.mean_queries,
            abandon_count: point.abandon_count,
            method: cfg.method.to_string(),
            detector: cfg.detector.to_string(),
            code: cfg.code.label(),
            modulation: cfg.modulation.clone(),
            sigma_e2: cfg.sigma_e2,
            k_factor: cfg.k_factor,
            seed: cfg.seed,
        }
    }
}

pub fn write_csv<W: Write>(writer: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for record in r.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}

pub fn write_json<W: Write>(writer: W, rows: &[ResultRow]) -> Result<()> {
    serde_json::to_writer_pretty(writer, rows)
        .map_err(|e| crate::error::Error::Io(e.to_string()))
}

pub fn read_json<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    serde_json::from_reader(reader).map_err(|e| crate::error::Error::Io(e.to_string()))
}
