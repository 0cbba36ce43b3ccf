use crate::linalg;
use crate::liouvillian::{self, DensityMatrix, Superoperator, LDIM};
use crate::spin_algebra::{ModelParams, DIM};
use crate::{CMat, Error, Result, C64};

/// Relative singular-value cutoff for rank decisions.
const RANK_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// Dimension of ker W. 1 when the steady state is unique.
    pub null_dimension: usize,
}

fn kernel_split(w: &Superoperator) -> Result<(usize, CMat, CMat)> {
    let parts = linalg::svd(&w.matrix)?;
    let smax = parts.s[0].max(f64::MIN_POSITIVE);
    let rank = parts.s.iter().filter(|&&s| s > RANK_CUTOFF * smax).count();
    let d = LDIM - rank;
    Ok((
        d,
        parts.u.subcols(rank, d).to_owned(),
        parts.v.subcols(rank, d).to_owned(),
    ))
}

pub fn null_space_dimension(w: &Superoperator) -> Result<usize> {
    Ok(kernel_split(w)?.0)
}

/// Long-time limit of the evolution started from `rho0`: the spectral
/// projection R (L†R)⁻¹ L† vec(ρ₀) onto ker W. Returns the state and dim ker W.
pub fn stationary_limit(p: &ModelParams, rho0: &CMat) -> Result<(CMat, usize)> {
    let w = liouvillian::build_generator(p)?;
    let (d, left, right) = kernel_split(&w)?;
    if d == 0 {
        return Err(Error::NoUniqueSteadyState {
            dimension: 0,
            reason: "generator has no null vector".into(),
        });
    }
    let x = liouvillian::vectorize(rho0)?;
    let lx: Vec<C64> = linalg::mat_vec(&linalg::adjoint(&left), &x);
    let overlap = &linalg::adjoint(&left) * &right;
    let coeffs = linalg::mat_vec(&linalg::inverse(&overlap), &lx);
    let v = linalg::mat_vec(&right, &coeffs);
    let m = liouvillian::unvectorize(&v)?;
    // rounding cleanup: exact limit is Hermitian with unit trace
    let herm = linalg::scale_re(&(&m + linalg::adjoint(&m)), 0.5);
    let tr = linalg::trace(&herm).re;
    Ok((linalg::scale_re(&herm, 1.0 / tr), d))
}

/// Stationary state of W. Unique when single-spin damping is on; with γ = 0
/// the dark subspace makes ker W larger and the returned state is the limit
/// reached from the maximally mixed state.
pub fn steady_state(p: &ModelParams) -> Result<SteadyState> {
    if p.gamma_coll == 0.0 && p.gamma_single == 0.0 {
        return Err(Error::NoUniqueSteadyState {
            dimension: DIM,
            reason: "closed dynamics: every Hamiltonian eigenstate is stationary".into(),
        });
    }
    let (rho, d) = stationary_limit(p, &DensityMatrix::maximally_mixed().matrix)?;
    if p.gamma_single > 0.0 && d > 1 {
        return Err(Error::NoUniqueSteadyState {
            dimension: d,
            reason: "single-spin damping should connect all states".into(),
        });
    }
    Ok(SteadyState {
        rho: DensityMatrix::new(rho)?,
        null_dimension: d,
    })
}
