//! Thin helpers over `faer` for the small dense problems in this crate.

use faer::Mat;

use crate::{CMat, Error, Result, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: &CMat) -> CMat {
    a.transpose().to_owned()
}

pub fn conj(a: &CMat) -> CMat {
    a.conjugate().to_owned()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kron(b)
}

pub fn scale(a: &CMat, k: C64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * k)
}

pub fn scale_re(a: &CMat, k: f64) -> CMat {
    scale(a, c(k, 0.0))
}

/// Largest entry modulus.
pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

pub fn hermiticity_defect(a: &CMat) -> f64 {
    max_abs_diff(a, &adjoint(a))
}

pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

pub fn col_to_vec(a: &CMat, j: usize) -> Vec<C64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

pub fn column(v: &[C64]) -> CMat {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn mat_vec(a: &CMat, v: &[C64]) -> Vec<C64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}

/// Stack matrices with equal column count on top of each other.
pub fn vstack(blocks: &[&CMat]) -> CMat {
    let ncols = blocks[0].ncols();
    let nrows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(nrows, ncols);
    let mut r0 = 0;
    for b in blocks {
        for j in 0..ncols {
            for i in 0..b.nrows() {
                out[(r0 + i, j)] = b[(i, j)];
            }
        }
        r0 += b.nrows();
    }
    out
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    a.eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Eigenvalues and right eigenvectors (as columns).
pub fn eigen(a: &CMat) -> Result<(Vec<C64>, CMat)> {
    let evd = a.eigen().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let vals = evd.S().column_vector().iter().copied().collect();
    Ok((vals, evd.U().to_owned()))
}

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let vals = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((vals, evd.U().to_owned()))
}

pub struct SvdParts {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(a: &CMat) -> Result<SvdParts> {
    let svd = a.svd().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    Ok(SvdParts {
        u: svd.U().to_owned(),
        s: svd.S().column_vector().iter().map(|z| z.re).collect(),
        v: svd.V().to_owned(),
    })
}

pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Orthonormal basis (columns) of the right null space, with singular values
/// at or below `rel_cutoff * σ_max` treated as zero.
pub fn null_space(a: &CMat, rel_cutoff: f64) -> Result<CMat> {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return Ok(identity(n));
    }
    let parts = svd(a)?;
    let smax = parts.s.first().copied().unwrap_or(0.0);
    let cutoff = rel_cutoff * smax.max(f64::MIN_POSITIVE);
    let rank = parts.s.iter().filter(|&&s| s > cutoff).count();
    Ok(parts.v.subcols(rank, n - rank).to_owned())
}

pub fn inverse(a: &CMat) -> CMat {
    use faer::linalg::solvers::Solve;
    a.partial_piv_lu().solve(identity(a.nrows()))
}
