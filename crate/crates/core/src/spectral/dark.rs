use serde::Serialize;

use crate::linalg;
use crate::liouvillian::collective_pair;
use crate::spin_algebra::{self, Direction, ModelParams, DIM};
use crate::{CMat, Result, C64};

const RANK_CUTOFF: f64 = 1e-10;

/// Largest Ĥ-invariant subspace annihilated by both collective jumps.
#[derive(Debug, Clone, Serialize)]
pub struct DarkSubspace {
    /// Orthonormal basis vectors, each an eigenvector of Ĥ restricted to the
    /// subspace.
    pub basis: Vec<Vec<(f64, f64)>>,
    pub dimension: usize,
    /// Ĥ eigenvalue ε of each basis vector.
    pub energies: Vec<f64>,
    /// Smallest singular value of σ₋¹ restricted to the subspace; positive
    /// means no dark vector is annihilated by σ₋¹.
    pub site1_lowering_min_sv: f64,
    /// Smallest singular value of [σ₊¹; σ₋¹]; positive means their kernels
    /// intersect trivially.
    pub site1_kernel_min_sv: f64,
}

impl DarkSubspace {
    pub fn vectors(&self) -> Vec<Vec<C64>> {
        self.basis
            .iter()
            .map(|v| v.iter().map(|&(re, im)| C64::new(re, im)).collect())
            .collect()
    }

    pub fn projector(&self) -> CMat {
        let vs = self.vectors();
        CMat::from_fn(DIM, DIM, |i, j| vs.iter().map(|v| v[i] * v[j].conj()).sum())
    }

    pub fn no_vector_annihilated_by_site1_lowering(&self) -> bool {
        self.dimension == 0 || self.site1_lowering_min_sv > RANK_CUTOFF
    }

    pub fn site1_kernels_intersect_trivially(&self) -> bool {
        self.site1_kernel_min_sv > RANK_CUTOFF
    }
}

fn smallest_sv(m: &CMat) -> Result<f64> {
    let sv = linalg::singular_values(m)?;
    let smax = sv.first().copied().unwrap_or(0.0).max(1.0);
    // a tall matrix has min(rows, cols) singular values; fewer than cols
    // means a guaranteed kernel
    if sv.len() < m.ncols() {
        return Ok(0.0);
    }
    Ok(sv.last().copied().unwrap_or(0.0) / smax)
}

pub fn dark_subspace(p: &ModelParams) -> Result<DarkSubspace> {
    let h = spin_algebra::build_hamiltonian(p).matrix;
    let (lower, raise) = collective_pair(p);
    let stacked = linalg::vstack(&[&raise.matrix, &lower.matrix]);
    let mut v = linalg::null_space(&stacked, RANK_CUTOFF)?;

    // shrink to the largest Ĥ-invariant subspace
    while v.ncols() > 0 {
        let proj = &v * linalg::adjoint(&v);
        let leak = (linalg::identity(DIM) - proj) * &h * &v;
        let keep = if linalg::max_abs(&leak) <= RANK_CUTOFF * linalg::max_abs(&h) {
            linalg::identity(v.ncols())
        } else {
            linalg::null_space(&leak, RANK_CUTOFF)?
        };
        if keep.ncols() == v.ncols() {
            break;
        }
        v = &v * &keep;
    }

    let dimension = v.ncols();
    let (energies, basis) = if dimension > 0 {
        let restricted = linalg::adjoint(&v) * &h * &v;
        let restricted = linalg::scale_re(&(&restricted + linalg::adjoint(&restricted)), 0.5);
        let (evals, evecs) = linalg::hermitian_eigen(&restricted)?;
        (evals, &v * &evecs)
    } else {
        (Vec::new(), v)
    };

    let s1_lower = spin_algebra::ladder(1, Direction::Lower, p.convention)?.matrix;
    let s1_raise = spin_algebra::ladder(1, Direction::Raise, p.convention)?.matrix;
    let site1_lowering_min_sv = if dimension > 0 {
        smallest_sv(&(&s1_lower * &basis))?
    } else {
        f64::INFINITY
    };
    let site1_kernel_min_sv = smallest_sv(&linalg::vstack(&[&s1_raise, &s1_lower]))?;

    Ok(DarkSubspace {
        basis: (0..dimension)
            .map(|j| {
                linalg::col_to_vec(&basis, j)
                    .into_iter()
                    .map(|z| (z.re, z.im))
                    .collect()
            })
            .collect(),
        dimension,
        energies,
        site1_lowering_min_sv,
        site1_kernel_min_sv,
    })
}
