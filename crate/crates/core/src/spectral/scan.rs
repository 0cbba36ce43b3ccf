use rayon::prelude::*;
use serde::Serialize;

use super::{activity_probe, dynamical_free_energy, ONE_SIDED_OFFSET};
use crate::spin_algebra::ModelParams;
use crate::{Error, Result};

/// Step of the unchecked central difference used on degenerate grid points.
const SCAN_FD_STEP: f64 = 1e-5;
/// Step used while bisecting a kink bracket.
const REFINE_FD_STEP: f64 = 1e-8;

/// A non-analytic point of θ(s) with the one-sided activities around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kink {
    pub s_star: f64,
    pub k_minus: f64,
    pub k_plus: f64,
    /// k_plus − k_minus.
    pub delta_k: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub s_values: Vec<f64>,
    pub theta: Vec<f64>,
    pub activity: Vec<f64>,
    pub kinks: Vec<Kink>,
    /// Model the scan was computed for; enables eigensolver refinement of
    /// kink candidates.
    #[serde(skip)]
    pub params: Option<ModelParams>,
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::InvalidGrid(format!(
            "need at least 3 points, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidGrid("non-finite grid point".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Tabulate θ and k over the grid and annotate kinks.
pub fn theta_scan(p: &ModelParams, grid: &[f64]) -> Result<ScanResult> {
    check_grid(grid)?;
    let points: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&s| {
            let theta = dynamical_free_energy(p, s)?;
            let k = activity_probe(p, s, SCAN_FD_STEP)?;
            Ok((theta, k))
        })
        .collect::<Result<_>>()?;
    let mut scan = ScanResult {
        s_values: grid.to_vec(),
        theta: points.iter().map(|x| x.0).collect(),
        activity: points.iter().map(|x| x.1).collect(),
        kinks: Vec::new(),
        params: Some(*p),
    };
    scan.kinks = detect_kinks(&scan, default_jump_threshold(&scan))?;
    Ok(scan)
}

/// 5% of the largest |k| on the grid.
pub fn default_jump_threshold(scan: &ScanResult) -> f64 {
    let kmax = scan.activity.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    (0.05 * kmax).max(1e-12)
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Locate jumps in k(s).
///
/// Brackets come from [`step_runs`], where a span counts as bent if it
/// touches a point whose second divided difference of θ exceeds ten times
/// the median. When the scan carries its model parameters each bracket is
/// refined down to the kinks it contains. Kinks closer together than the grid
/// spacing can still cancel against the smooth slope in the sampled k and go
/// unseen.
pub fn detect_kinks(scan: &ScanResult, jump_threshold: f64) -> Result<Vec<Kink>> {
    let s = &scan.s_values;
    let theta = &scan.theta;
    let k = &scan.activity;
    let n = s.len();
    if n < 3 || theta.len() != n || k.len() != n {
        return Ok(Vec::new());
    }
    let mut curvature = vec![0.0; n];
    for i in 1..n - 1 {
        let left = (theta[i] - theta[i - 1]) / (s[i] - s[i - 1]);
        let right = (theta[i + 1] - theta[i]) / (s[i + 1] - s[i]);
        curvature[i] = (2.0 * (right - left) / (s[i + 1] - s[i - 1])).abs();
    }
    let floor = 10.0 * median(curvature[1..n - 1].to_vec());

    let dk: Vec<f64> = (0..n - 1).map(|i| k[i + 1] - k[i]).collect();
    let brackets = step_runs(&dk, jump_threshold, |a, b| (a..=b + 1).any(|j| curvature[j] > floor));

    let mut kinks: Vec<Kink> = Vec::new();
    for (a, b) in brackets {
        let b = b + 1;
        match &scan.params {
            None => kinks.push(Kink {
                s_star: 0.5 * (s[a] + s[b]),
                k_minus: k[a],
                k_plus: k[b],
                delta_k: k[b] - k[a],
            }),
            Some(p) => {
                for kink in refine(p, s[a], s[b], jump_threshold)? {
                    if kinks.last().is_none_or(|last| kink.s_star - last.s_star > ONE_SIDED_OFFSET) {
                        kinks.push(kink);
                    }
                }
            }
        }
    }
    Ok(kinks)
}

/// Runs `(first, last)` of consecutive intervals, given the steps `dk` of k
/// across them, that hold a kink candidate. A span of one or two intervals
/// qualifies when its total step exceeds the threshold and it is either
/// `bent` or its step stands out from the intervals just outside it by more
/// than the threshold. Two-interval spans catch a kink sitting on a grid
/// point, whose step is split between its neighbours.
fn step_runs(dk: &[f64], jump_threshold: f64, bent: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let m = dk.len();
    let span_flag = |a: usize, b: usize| {
        let total: f64 = dk[a..=b].iter().sum();
        if total.abs() <= jump_threshold {
            return false;
        }
        let outside: Vec<f64> = [a.checked_sub(1), (b + 1 < m).then_some(b + 1)]
            .into_iter()
            .flatten()
            .map(|j| dk[j])
            .collect();
        let local = if outside.is_empty() {
            0.0
        } else {
            outside.iter().sum::<f64>() / outside.len() as f64
        };
        bent(a, b) || (total - (b - a + 1) as f64 * local).abs() > jump_threshold
    };
    let mut flagged = vec![false; m];
    for i in 0..m {
        if span_flag(i, i) {
            flagged[i] = true;
        }
        if i + 1 < m && span_flag(i, i + 1) {
            flagged[i] = true;
            flagged[i + 1] = true;
        }
    }
    let mut runs = Vec::new();
    let mut i = 0;
    while i < m {
        if flagged[i] {
            let start = i;
            while i + 1 < m && flagged[i + 1] {
                i += 1;
            }
            runs.push((start, i));
        }
        i += 1;
    }
    runs
}

/// Subintervals per refinement level.
const REFINE_SPLIT: usize = 8;
/// Bracket width at which refinement stops.
const REFINE_WIDTH: f64 = 1e-7;

/// Zoom into a bracket: split it, keep the runs of subintervals flagged by
/// [`step_runs`], and repeat on each run. The smooth part
/// of a step shrinks with the subinterval while a jump does not, so smooth
/// crossovers die out and several kinks in one bracket are all found.
fn refine(p: &ModelParams, lo: f64, hi: f64, jump_threshold: f64) -> Result<Vec<Kink>> {
    let mut found = Vec::new();
    let mut pending = vec![(lo, hi, 0usize)];
    while let Some((lo, hi, depth)) = pending.pop() {
        // below ~10·REFINE_FD_STEP the central differences on the degenerate
        // side smear the jump; the ±1e-6 confirmation needs no more than this
        if hi - lo <= REFINE_WIDTH * lo.abs().max(hi.abs()).max(1.0) || depth >= 40 {
            if let Some(kink) = confirm(p, 0.5 * (lo + hi), jump_threshold)? {
                found.push(kink);
            }
            continue;
        }
        let pts = uniform_grid(lo, hi, REFINE_SPLIT + 1);
        let k = pts
            .iter()
            .map(|&x| activity_probe(p, x, REFINE_FD_STEP))
            .collect::<Result<Vec<_>>>()?;
        let dk: Vec<f64> = k.windows(2).map(|w| w[1] - w[0]).collect();
        // half the threshold while searching: the slope next to a jump eats
        // into its excess, and confirmation applies the full threshold
        let search = 0.5 * jump_threshold;
        let runs = step_runs(&dk, search, |_, _| false);
        if runs.first() == Some(&(0, REFINE_SPLIT - 1)) {
            // nothing localised; refine every subinterval on its own
            pending.extend(pts.windows(2).map(|w| (w[0], w[1], depth + 1)));
            continue;
        }
        let mut in_run = [false; REFINE_SPLIT];
        for &(a, b) in &runs {
            in_run[a..=b].fill(true);
            pending.push((pts[a], pts[b + 1], depth + 1));
        }
        // a step that still reaches the threshold may be smooth variation
        // masking a jump (two nearby kinks can add up to the smooth slope)
        for j in (0..REFINE_SPLIT).filter(|&j| !in_run[j] && dk[j].abs() > search) {
            pending.push((pts[j], pts[j + 1], depth + 1));
        }
    }
    found.sort_by(|a, b| a.s_star.total_cmp(&b.s_star));
    // a kink on a subinterval boundary is reached from both sides
    found.dedup_by(|b, a| b.s_star - a.s_star <= ONE_SIDED_OFFSET);
    Ok(found)
}

/// Keep s* only if the one-sided activities at s* ± 1e-6 differ by more than
/// the threshold, which separates true kinks from steep smooth crossovers.
fn confirm(p: &ModelParams, s_star: f64, jump_threshold: f64) -> Result<Option<Kink>> {
    let k_minus = activity_probe(p, s_star - ONE_SIDED_OFFSET, REFINE_FD_STEP)?;
    let k_plus = activity_probe(p, s_star + ONE_SIDED_OFFSET, REFINE_FD_STEP)?;
    let delta_k = k_plus - k_minus;
    Ok((delta_k.abs() > jump_threshold).then_some(Kink {
        s_star,
        k_minus,
        k_plus,
        delta_k,
    }))
}

/// s₀ = ln((n̄+1)/n̄).
pub fn gc_symmetry_point(nbar: f64) -> Result<f64> {
    if nbar > 0.0 && nbar.is_finite() {
        Ok(((nbar + 1.0) / nbar).ln())
    } else {
        Err(Error::SymmetryUndefined(format!(
            "s0 = ln((nbar+1)/nbar) requires nbar > 0 (got {nbar})"
        )))
    }
}

/// max over the grid of |θ(s) − θ(s₀ − s)|.
pub fn gc_residual(p: &ModelParams, grid: &[f64]) -> Result<f64> {
    let s0 = gc_symmetry_point(p.nbar)?;
    let diffs: Vec<f64> = grid
        .par_iter()
        .map(|&s| Ok((dynamical_free_energy(p, s)? - dynamical_free_energy(p, s0 - s)?).abs()))
        .collect::<Result<_>>()?;
    Ok(diffs.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(s: Vec<f64>, theta: Vec<f64>, activity: Vec<f64>) -> ScanResult {
        ScanResult {
            s_values: s,
            theta,
            activity,
            kinks: Vec::new(),
            params: None,
        }
    }

    #[test]
    fn linear_theta_has_no_kinks() {
        let s = uniform_grid(-1.0, 1.0, 21);
        let theta = s.iter().map(|x| 0.3 - 2.0 * x).collect();
        let k = vec![2.0; 21];
        assert!(detect_kinks(&synthetic(s, theta, k), 0.01).unwrap().is_empty());
    }

    #[test]
    fn synthetic_corner_is_found() {
        let s = uniform_grid(-1.0, 1.0, 21);
        let theta: Vec<f64> = s.iter().map(|&x| if x < 0.0 { -x } else { 0.0 }).collect();
        let k: Vec<f64> = s.iter().map(|&x| if x < 0.0 { 1.0 } else if x == 0.0 { 0.5 } else { 0.0 }).collect();
        let kinks = detect_kinks(&synthetic(s, theta, k), 0.1).unwrap();
        assert_eq!(kinks.len(), 1);
        assert!(kinks[0].s_star.abs() < 0.1 + 1e-12);
        assert!((kinks[0].delta_k + 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        let p = ModelParams::reference();
        assert!(theta_scan(&p, &[0.0, 0.1]).is_err());
        assert!(theta_scan(&p, &[0.0, 0.2, 0.1]).is_err());
    }

    #[test]
    fn symmetry_point() {
        assert!((gc_symmetry_point(1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((gc_symmetry_point(5.0).unwrap() - 0.182_321_556_793_954_6).abs() < 1e-15);
        assert!(matches!(gc_symmetry_point(0.0), Err(Error::SymmetryUndefined(_))));
        let p = ModelParams::reference();
        assert!(gc_residual(&p, &[0.0, 0.1]).is_err());
    }

    #[test]
    fn inactive_side_kink_at_origin() {
        let p = ModelParams::reference();
        let scan = theta_scan(&p, &uniform_grid(-1.0, 1.0, 41)).unwrap();
        assert_eq!(scan.kinks.len(), 1, "{:?}", scan.kinks);
        let kink = scan.kinks[0];
        assert!(kink.s_star.abs() < 1e-6);
        assert!(kink.k_minus > 0.5);
        assert!(kink.k_plus.abs() < 1e-6);
    }

    #[test]
    fn second_kink_at_symmetry_point() {
        let p = ModelParams::reference().with_nbar(2.0);
        let s0 = (1.5f64).ln();
        let scan = theta_scan(&p, &uniform_grid(-0.5, 1.0, 31)).unwrap();
        assert_eq!(scan.kinks.len(), 2, "{:?}", scan.kinks);
        assert!(scan.kinks[0].s_star.abs() < 1e-6);
        assert!((scan.kinks[1].s_star - s0).abs() < 1e-6);
    }

    #[test]
    fn kink_on_a_grid_point() {
        let p = ModelParams::reference().with_nbar(5.0);
        let scan = theta_scan(&p, &uniform_grid(-1.0, 1.0, 41)).unwrap();
        assert_eq!(scan.kinks.len(), 2, "{:?}", scan.kinks);
        assert!(scan.kinks[0].s_star.abs() < 1e-6);
        assert!((scan.kinks[1].s_star - gc_symmetry_point(5.0).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn two_kinks_in_one_bracket() {
        // spacing 0.2 puts both kinks (0 and 0.182) inside one bracket whose
        // steps in k are dominated by the smooth slope
        let p = ModelParams::reference().with_nbar(5.0);
        let scan = theta_scan(&p, &uniform_grid(-1.0, 1.0, 11)).unwrap();
        assert_eq!(scan.kinks.len(), 2, "{:?}", scan.kinks);
        assert!(scan.kinks[0].s_star.abs() < 1e-6);
        assert!((scan.kinks[1].s_star - gc_symmetry_point(5.0).unwrap()).abs() < 1e-6);
    }
}
