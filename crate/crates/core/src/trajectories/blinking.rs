use serde::Serialize;

use super::JumpRecord;
use super::stationary_jump_rate;
use crate::spin_algebra::ModelParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Active,
    Inactive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub phase: Phase,
}

/// Classify consecutive windows by their total jump rate and merge runs of
/// equal label. The last window absorbs the remainder of the record.
pub fn blinking_segments(r: &JumpRecord, window: f64, rate_threshold: f64) -> Result<Vec<Segment>> {
    if !(window > 0.0) {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("must be > 0 (got {window})"),
        });
    }
    if window > r.total_time {
        return Err(Error::WindowTooLong {
            window,
            total_time: r.total_time,
        });
    }
    let n = (r.total_time / window).floor() as usize;
    let mut counts = vec![0u64; n];
    for e in &r.events {
        let idx = ((e.time / window).floor() as usize).min(n - 1);
        counts[idx] += 1;
    }
    let mut segments: Vec<Segment> = Vec::new();
    for (i, &count) in counts.iter().enumerate() {
        let start = i as f64 * window;
        let end = if i + 1 == n { r.total_time } else { (i + 1) as f64 * window };
        let phase = if count as f64 / (end - start) >= rate_threshold {
            Phase::Active
        } else {
            Phase::Inactive
        };
        match segments.last_mut() {
            Some(last) if last.phase == phase => last.end = end,
            _ => segments.push(Segment { start, end, phase }),
        }
    }
    Ok(segments)
}

/// Half the mean jump rate of the active phase without single-spin damping.
pub fn blink_threshold(p: &ModelParams) -> Result<f64> {
    Ok(0.5 * stationary_jump_rate(&p.collective_only())?)
}
