use std::collections::BTreeMap;

use serde::Serialize;

use super::JumpRecord;
use crate::spectral::gc_symmetry_point;
use crate::{Error, Result};

/// Minimal number of windows at ±K for the K to enter the table.
pub const MIN_COUNT: u64 = 10;

#[derive(Debug, Clone, Serialize)]
pub struct FtRow {
    pub k: i64,
    pub count_pos: u64,
    pub count_neg: u64,
    /// ln(p_K / p_{−K}).
    pub log_ratio: f64,
    /// s₀K, absent when n̄ = 0.
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FtTable {
    pub window: f64,
    pub n_windows: u64,
    pub negative_windows: u64,
    pub rows: Vec<FtRow>,
    /// Requested K with fewer than [`MIN_COUNT`] windows on either side.
    pub omitted: Vec<i64>,
    /// Weighted least-squares slope of ln(p_K/p_{−K}) against K through the
    /// origin, weights 1/(1/n_K + 1/n_{−K}).
    pub slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub s0: Option<f64>,
}

/// Net counts in consecutive windows of length `window`, starting after the
/// burn-in of each record.
pub fn window_counts(records: &[JumpRecord], window: f64, burn_in_fraction: f64) -> Vec<i64> {
    let mut out = Vec::new();
    for r in records {
        let start = burn_in_fraction * r.total_time;
        let n = ((r.total_time - start) / window).floor();
        if !(n >= 1.0) {
            continue;
        }
        let n = n as usize;
        let mut counts = vec![0i64; n];
        for e in &r.events {
            if e.time <= start {
                continue;
            }
            let idx = ((e.time - start) / window).floor() as usize;
            if idx < n {
                counts[idx] += e.weight as i64;
            }
        }
        out.extend(counts);
    }
    out
}

/// Windowed estimate of p_K/p_{−K} for K = 1..=k_max.
pub fn empirical_ft(
    records: &[JumpRecord],
    k_max: i64,
    window: f64,
    burn_in_fraction: f64,
) -> Result<FtTable> {
    if records.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if !(window > 0.0) {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("must be > 0 (got {window})"),
        });
    }
    let counts = window_counts(records, window, burn_in_fraction);
    let mut freq: BTreeMap<i64, u64> = BTreeMap::new();
    for &k in &counts {
        *freq.entry(k).or_default() += 1;
    }
    let s0 = gc_symmetry_point(records[0].params.nbar).ok();
    let mut rows = Vec::new();
    let mut omitted = Vec::new();
    for k in 1..=k_max {
        let pos = freq.get(&k).copied().unwrap_or(0);
        let neg = freq.get(&-k).copied().unwrap_or(0);
        if pos < MIN_COUNT || neg < MIN_COUNT {
            omitted.push(k);
            continue;
        }
        rows.push(FtRow {
            k,
            count_pos: pos,
            count_neg: neg,
            log_ratio: (pos as f64 / neg as f64).ln(),
            predicted: s0.map(|s0| s0 * k as f64),
        });
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for r in &rows {
        let w = 1.0 / (1.0 / r.count_pos as f64 + 1.0 / r.count_neg as f64);
        let k = r.k as f64;
        sxy += w * k * r.log_ratio;
        sxx += w * k * k;
    }
    let (slope, slope_stderr) = if rows.is_empty() {
        (None, None)
    } else {
        (Some(sxy / sxx), Some(1.0 / sxx.sqrt()))
    };
    Ok(FtTable {
        window,
        n_windows: counts.len() as u64,
        negative_windows: counts.iter().filter(|&&k| k < 0).count() as u64,
        rows,
        omitted,
        slope,
        slope_stderr,
        s0,
    })
}
