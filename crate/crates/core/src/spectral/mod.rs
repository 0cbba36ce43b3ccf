//! Large-deviation quantities from the spectrum of the tilted generator.
//!
//! θ(s) is the eigenvalue of W_s with the largest real part and the activity
//! is k(s) = −θ′(s). Two independent routes to k are provided: a
//! finite-difference route on θ and a first-order perturbation route using
//! the leading left/right eigenvectors.

mod dark;
mod scan;
mod steady;

pub use dark::{dark_subspace, DarkSubspace};
pub use scan::{
    default_jump_threshold, detect_kinks, gc_residual, gc_symmetry_point, theta_scan,
    uniform_grid, Kink, ScanResult,
};
pub use steady::{null_space_dimension, stationary_limit, steady_state, SteadyState};

use crate::linalg;
use crate::liouvillian::{self, LDIM};
use crate::spin_algebra::ModelParams;
use crate::{CMat, Error, Result, C64};

/// Eigenvalues whose real parts lie this close to the maximum are tied.
const REAL_TIE: f64 = 1e-9;
/// Largest admissible imaginary part of the leading eigenvalue.
const IMAG_TOL: f64 = 1e-8;
/// Minimal distance to the rest of the spectrum for a simple leading eigenvalue.
pub const GAP_TOL: f64 = 1e-10;
/// Offset used for one-sided activities around a kink.
pub const ONE_SIDED_OFFSET: f64 = 1e-6;
pub const DEFAULT_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct Leading {
    pub value: f64,
    /// Distance in the complex plane to the nearest other eigenvalue.
    pub gap: f64,
    pub spectrum: Vec<C64>,
}

fn leading_of(matrix: &CMat, s: f64) -> Result<Leading> {
    let spectrum = linalg::eigenvalues(matrix)?;
    let max_re = spectrum
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    // at γ = 0 dark coherences tie with the real leading eigenvalue; prefer the
    // most nearly real member of the tie
    let tie = REAL_TIE * max_re.abs().max(1.0);
    let (idx, lead) = spectrum
        .iter()
        .enumerate()
        .filter(|(_, z)| z.re >= max_re - tie)
        .min_by(|a, b| a.1.im.abs().total_cmp(&b.1.im.abs()))
        .map(|(i, z)| (i, *z))
        .ok_or_else(|| Error::Eigensolver("empty spectrum".into()))?;
    if lead.im.abs() > IMAG_TOL {
        return Err(Error::NonRealLeading { s, imag: lead.im });
    }
    let gap = spectrum
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != idx)
        .map(|(_, z)| (z - lead).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(Leading {
        value: lead.re,
        gap,
        spectrum,
    })
}

/// Leading eigenvalue of W_s together with its spectral gap.
pub fn leading_eigenvalue(p: &ModelParams, s: f64) -> Result<Leading> {
    let w = liouvillian::tilt_generator(p, s)?;
    leading_of(&w.matrix, s)
}

/// θ(s): the largest real part of the spectrum of W_s (checked to be real).
pub fn dynamical_free_energy(p: &ModelParams, s: f64) -> Result<f64> {
    Ok(leading_eigenvalue(p, s)?.value)
}

fn central_difference(p: &ModelParams, s: f64, h: f64) -> Result<f64> {
    let plus = dynamical_free_energy(p, s + h)?;
    let minus = dynamical_free_energy(p, s - h)?;
    Ok(-(plus - minus) / (2.0 * h))
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "h",
            reason: format!("finite-difference step must be > 0 (got {h})"),
        })
    }
}

/// k(s) = −[θ(s+h) − θ(s−h)]/(2h).
///
/// The stencil is rejected when it straddles a kink. For smooth θ the
/// symmetric slope jump J(h) = [θ(s+h) − 2θ(s) + θ(s−h)]/h halves together
/// with h; across a kink it does not. The ratio is tested on the pairs
/// (h, h/2) and (h/2, h/4), since a single pair can be fooled by a kink
/// about a third of the way out.
pub fn activity_fd(p: &ModelParams, s: f64, h: f64) -> Result<f64> {
    check_step(h)?;
    let t0 = dynamical_free_energy(p, s)?;
    let jumps: Vec<(f64, f64, f64)> = [h, h / 2.0, h / 4.0]
        .into_iter()
        .map(|step| {
            let tp = dynamical_free_energy(p, s + step)?;
            let tm = dynamical_free_energy(p, s - step)?;
            Ok(((tp - 2.0 * t0 + tm) / step, tp, tm))
        })
        .collect::<Result<_>>()?;
    let noise = |step: f64| (1e-12 * t0.abs().max(1.0) / step).max(1e-8);
    for (i, step) in [h, h / 2.0].into_iter().enumerate() {
        let (wide, narrow) = (jumps[i].0, jumps[i + 1].0);
        if wide.abs() > noise(step) && (narrow / wide - 0.5).abs() > 0.15 {
            return Err(Error::KinkStraddle {
                lo: s - h,
                hi: s + h,
            });
        }
    }
    let (_, tp, tm) = jumps[0];
    Ok(-(tp - tm) / (2.0 * h))
}

/// k(s) from first-order perturbation of the leading eigenvalue:
/// −⟨l|∂ₛW_s|r⟩/⟨l|r⟩.
pub fn activity_hf(p: &ModelParams, s: f64) -> Result<f64> {
    let w = liouvillian::tilt_generator(p, s)?;
    let lead = leading_of(&w.matrix, s)?;
    if lead.gap < GAP_TOL {
        return Err(Error::DegenerateLeading { s, gap: lead.gap });
    }
    let shifted = &w.matrix - linalg::scale_re(&linalg::identity(LDIM), lead.value);
    let parts = linalg::svd(&shifted)?;
    let last = LDIM - 1;
    let left = linalg::col_to_vec(&parts.u, last);
    let right = linalg::col_to_vec(&parts.v, last);
    let d = liouvillian::tilt_derivative(p, s);
    let d_right = linalg::mat_vec(&d, &right);
    let num: C64 = left.iter().zip(&d_right).map(|(l, x)| l.conj() * x).sum();
    let den: C64 = left.iter().zip(&right).map(|(l, r)| l.conj() * r).sum();
    if den.norm() < 1e-14 {
        return Err(Error::DegenerateLeading { s, gap: lead.gap });
    }
    Ok(-(num / den).re)
}

/// Finite-difference activity with Richardson extrapolation
/// (4·D(h/2) − D(h))/3 whenever the plain stencil disagrees with the
/// perturbative value by more than 1e-6.
pub fn activity_fd_refined(p: &ModelParams, s: f64, h: f64) -> Result<f64> {
    let plain = activity_fd(p, s, h)?;
    match activity_hf(p, s) {
        Ok(hf) if (plain - hf).abs() <= 1e-6 => Ok(plain),
        Err(Error::DegenerateLeading { .. }) => Ok(plain),
        Err(e) => Err(e),
        Ok(_) => {
            let half = central_difference(p, s, h / 2.0)?;
            Ok((4.0 * half - plain) / 3.0)
        }
    }
}

/// Activity used inside scans and kink refinement: perturbative where the
/// leading eigenvalue is simple, otherwise an unchecked central difference.
pub(crate) fn activity_probe(p: &ModelParams, s: f64, h: f64) -> Result<f64> {
    match activity_hf(p, s) {
        Err(Error::DegenerateLeading { .. }) => central_difference(p, s, h),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{all_channels, collective_pair};

    fn model(nbar: f64, gamma: f64) -> ModelParams {
        ModelParams::reference().with_nbar(nbar).with_gamma_single(gamma * 0.05)
    }

    #[test]
    fn theta_vanishes_at_zero_bias() {
        for nbar in [0.0, 1.0, 5.0] {
            for g in [0.0, 0.01] {
                let t = dynamical_free_energy(&model(nbar, g), 0.0).unwrap();
                assert!(t.abs() < 1e-10, "nbar={nbar} g={g}: {t}");
            }
        }
    }

    #[test]
    fn inactive_phase_pins_theta_for_positive_bias() {
        let p = model(0.0, 0.0);
        for s in [0.1, 0.5, 2.0] {
            assert!(dynamical_free_energy(&p, s).unwrap().abs() < 1e-10);
        }
        assert!(dynamical_free_energy(&p, -0.1).unwrap() > 1e-3);
    }

    #[test]
    fn hf_matches_stationary_current() {
        let p = model(2.0, 0.01);
        let ss = steady_state(&p).unwrap();
        let (lower, raise) = collective_pair(&p);
        let pm = &raise.matrix * &lower.matrix;
        let mp = &lower.matrix * &raise.matrix;
        let expected = 2.0
            * p.gamma_coll
            * ((p.nbar + 1.0) * ss.rho.expectation(&pm).re - p.nbar * ss.rho.expectation(&mp).re);
        let hf = activity_hf(&p, 0.0).unwrap();
        assert!((hf - expected).abs() < 1e-9 * expected.abs(), "{hf} vs {expected}");
        // same quantity from the channel table
        let from_channels: f64 = all_channels(&p)
            .iter()
            .map(|ch| {
                let ldl = &linalg::adjoint(&ch.operator.matrix) * &ch.operator.matrix;
                ch.count_weight as f64 * ch.rate * ss.rho.expectation(&ldl).re
            })
            .sum();
        assert!((hf - from_channels).abs() < 1e-9 * hf.abs());
    }

    #[test]
    fn degenerate_leading_is_reported() {
        let err = activity_hf(&model(0.0, 0.0), 0.5).unwrap_err();
        assert!(matches!(err, Error::DegenerateLeading { .. }), "{err}");
    }

    #[test]
    fn straddling_stencil_is_rejected() {
        let p = model(0.0, 0.0);
        let err = activity_fd(&p, 2e-5, 1e-4).unwrap_err();
        assert!(matches!(err, Error::KinkStraddle { .. }));
        assert!(activity_fd(&p, 0.5, 1e-4).unwrap().abs() < 1e-8);
        assert!(activity_fd(&p, 0.0, -1.0).is_err());
    }

    #[test]
    fn activity_grows_for_negative_bias() {
        let p = model(0.0, 0.0);
        let k1 = activity_fd(&p, -0.2, 1e-4).unwrap();
        let k2 = activity_fd(&p, -0.6, 1e-4).unwrap();
        assert!(k1 > 0.0 && k2 > k1);
    }

    #[test]
    fn thermal_imbalance_can_reverse_current() {
        // large n̄ with strong single-spin damping drives net absorption
        let p = ModelParams::reference().with_nbar(20.0).with_gamma_single(0.05);
        let k = activity_hf(&p, 0.0).unwrap();
        assert!(k < 0.0, "{k}");
    }
}
