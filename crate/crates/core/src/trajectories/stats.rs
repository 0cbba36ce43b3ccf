use serde::Serialize;

use super::JumpRecord;
use crate::{Error, Result};

/// Net count Σ weights of events strictly after `from_time`.
pub fn net_count(r: &JumpRecord, from_time: f64) -> i64 {
    r.events
        .iter()
        .filter(|e| e.time > from_time)
        .map(|e| e.weight as i64)
        .sum()
}

/// Net jump rate after an absolute burn-in time.
pub fn net_activity(r: &JumpRecord, burn_in: f64) -> Result<f64> {
    if !(r.total_time > burn_in) {
        return Err(Error::EmptyWindow {
            total_time: r.total_time,
            burn_in,
        });
    }
    Ok(net_count(r, burn_in) as f64 / (r.total_time - burn_in))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Binning {
    FreedmanDiaconis,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `counts.len() + 1` increasing edges; the last bin is closed.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let n = self.counts.len();
        if n == 0 || x < self.edges[0] || x > self.edges[n] {
            return None;
        }
        let idx = self.edges.partition_point(|&e| e <= x).saturating_sub(1);
        Some(idx.min(n - 1))
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

const MAX_BINS: usize = 10_000;

pub fn histogram(values: &[f64], binning: Binning) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    if hi == lo {
        return Ok(Histogram {
            edges: vec![lo - 0.5, lo + 0.5],
            counts: vec![values.len() as u64],
        });
    }
    let n_bins = match binning {
        Binning::Fixed(n) => n.max(1),
        Binning::FreedmanDiaconis => {
            let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
            let width = 2.0 * iqr / (values.len() as f64).cbrt();
            if width > 0.0 {
                ((hi - lo) / width).ceil() as usize
            } else {
                (values.len() as f64).sqrt().ceil() as usize
            }
        }
    }
    .clamp(1, MAX_BINS);
    let width = (hi - lo) / n_bins as f64;
    let edges: Vec<f64> = (0..=n_bins)
        .map(|i| if i == n_bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0u64; n_bins];
    for &v in values {
        let idx = (((v - lo) / width).floor() as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// (first bin, last bin, count) of a plateau in the histogram.
type Plateau = (usize, usize, u64);

/// Plateaus that rise above both neighbours.
fn peaks(counts: &[u64]) -> Vec<Plateau> {
    let mut runs: Vec<Plateau> = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.2 == c => run.1 = i,
            _ => runs.push((i, i, c)),
        }
    }
    (0..runs.len())
        .filter(|&r| {
            let c = runs[r].2;
            let left = if r > 0 { runs[r - 1].2 } else { 0 };
            let right = runs.get(r + 1).map_or(0, |x| x.2);
            c > 0 && c > left && c > right
        })
        .map(|r| runs[r])
        .collect()
}

fn two_largest_peaks(h: &Histogram) -> Option<(Plateau, Plateau)> {
    let mut ps = peaks(&h.counts);
    if ps.len() < 2 {
        return None;
    }
    ps.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)));
    let (a, b) = (ps[0], ps[1]);
    Some(if a.0 < b.0 { (a, b) } else { (b, a) })
}

/// Lowest count between the two largest peaks divided by the smaller peak:
/// 0 for well-separated modes, 1 when the histogram has a single peak.
pub fn bimodality_ratio(h: &Histogram) -> f64 {
    match two_largest_peaks(h) {
        None => 1.0,
        Some((left, right)) => {
            let valley = h.counts[left.1 + 1..right.0]
                .iter()
                .copied()
                .min()
                .unwrap_or(left.2.min(right.2));
            valley as f64 / left.2.min(right.2) as f64
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleStats {
    /// Per-trajectory net rate after burn-in, in record order.
    pub activities: Vec<f64>,
    pub histogram: Histogram,
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    /// std / √N.
    pub std_error: f64,
    /// Fraction of trajectories with zero net count after burn-in.
    pub zero_fraction: f64,
    /// Mean over trajectories with nonzero net count.
    pub active_mean: f64,
    pub bimodality: f64,
    /// Centres of the two largest histogram modes (ascending); a single
    /// entry when unimodal.
    pub modes: Vec<f64>,
}

impl EnsembleStats {
    pub fn is_bimodal(&self, max_ratio: f64) -> bool {
        self.modes.len() == 2 && self.bimodality < max_ratio
    }
}

/// Reduce records (in index order) to activity statistics. Burn-in is a
/// fraction of each record's total time.
pub fn ensemble_stats(
    records: &[JumpRecord],
    burn_in_fraction: f64,
    binning: Binning,
) -> Result<EnsembleStats> {
    if records.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(Error::InvalidParameter {
            name: "burn_in_fraction",
            reason: format!("must lie in [0, 1) (got {burn_in_fraction})"),
        });
    }
    let activities: Vec<f64> = records
        .iter()
        .map(|r| net_activity(r, burn_in_fraction * r.total_time))
        .collect::<Result<_>>()?;
    stats_from_activities(activities, binning)
}

pub(crate) fn stats_from_activities(activities: Vec<f64>, binning: Binning) -> Result<EnsembleStats> {
    let n = activities.len();
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let mean = activities.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        activities.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let std = var.sqrt();
    let zeros = activities.iter().filter(|&&a| a == 0.0).count();
    let nonzero: Vec<f64> = activities.iter().copied().filter(|&a| a != 0.0).collect();
    let active_mean = if nonzero.is_empty() {
        0.0
    } else {
        nonzero.iter().sum::<f64>() / nonzero.len() as f64
    };
    let histogram = histogram(&activities, binning)?;
    let centers = histogram.centers();
    let modes = match two_largest_peaks(&histogram) {
        Some((a, b)) => vec![
            0.5 * (centers[a.0] + centers[a.1]),
            0.5 * (centers[b.0] + centers[b.1]),
        ],
        None => {
            let top = peaks(&histogram.counts)
                .into_iter()
                .max_by_key(|p| p.2)
                .map(|p| 0.5 * (centers[p.0] + centers[p.1]));
            top.into_iter().collect()
        }
    };
    Ok(EnsembleStats {
        bimodality: bimodality_ratio(&histogram),
        histogram,
        mean,
        std,
        std_error: std / (n as f64).sqrt(),
        zero_fraction: zeros as f64 / n as f64,
        active_mean,
        modes,
        activities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::ModelParams;
    use crate::trajectories::JumpEvent;
    use proptest::prelude::*;

    fn record(events: Vec<(f64, i8)>, total_time: f64) -> JumpRecord {
        JumpRecord {
            seed: 0,
            stream: 0,
            initial_state: vec![],
            events: events
                .into_iter()
                .map(|(time, weight)| JumpEvent {
                    time,
                    channel: 0,
                    weight,
                })
                .collect(),
            total_time,
            dark_trapped: false,
            params: ModelParams::reference(),
        }
    }

    #[test]
    fn activity_of_quiet_and_neutral_records() {
        assert_eq!(net_activity(&record(vec![], 100.0), 10.0).unwrap(), 0.0);
        let neutral = record(vec![(20.0, 0), (30.0, 0)], 100.0);
        assert_eq!(net_activity(&neutral, 10.0).unwrap(), 0.0);
        let mixed = record(vec![(5.0, 1), (20.0, 1), (30.0, -1), (40.0, 1)], 100.0);
        assert!((net_activity(&mixed, 10.0).unwrap() - 1.0 / 90.0).abs() < 1e-15);
        assert!(net_activity(&mixed, 100.0).is_err());
    }

    #[test]
    fn bimodal_histogram() {
        let mut v = vec![0.0; 25];
        v.extend((0..75).map(|i| 1.0 + 0.001 * (i % 7) as f64));
        let s = stats_from_activities(v, Binning::FreedmanDiaconis).unwrap();
        assert!(s.is_bimodal(0.5), "{:?}", s.histogram);
        assert_eq!(s.zero_fraction, 0.25);
        assert!(s.modes[0] < 0.5 && s.modes[1] > 0.5);
    }

    #[test]
    fn single_peak_ratio_is_one() {
        let h = Histogram {
            edges: vec![0.0, 1.0, 2.0, 3.0],
            counts: vec![1, 5, 2],
        };
        assert_eq!(bimodality_ratio(&h), 1.0);
        assert_eq!(h.bin_of(3.0), Some(2));
        assert_eq!(h.bin_of(0.0), Some(0));
        assert_eq!(h.bin_of(-1.0), None);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(ensemble_stats(&[], 0.1, Binning::FreedmanDiaconis).is_err());
    }

    proptest! {
        #[test]
        fn histogram_conserves_counts(values in prop::collection::vec(-5.0f64..5.0, 1..300)) {
            let h = histogram(&values, Binning::FreedmanDiaconis).unwrap();
            prop_assert_eq!(h.counts.iter().sum::<u64>(), values.len() as u64);
            prop_assert!(h.edges.windows(2).all(|w| w[1] > w[0]));
            let s = stats_from_activities(values.clone(), Binning::Fixed(7)).unwrap();
            let se = s.std / (values.len() as f64).sqrt();
            prop_assert!((s.std_error - se).abs() <= 1e-15 * se.max(1.0));
        }
    }
}
