//! Vectorized Lindblad generator and its counting-field tilt.
//!
//! Operators ρ on the 8-dimensional space are flattened by stacking columns:
//! entry ρ[i, j] lives at index `i + 8 j`, so that vec(AρB) = (Bᵀ ⊗ A) vec(ρ).

use faer::Mat;

use crate::linalg::{self, c};
use crate::spin_algebra::{self, Direction, ModelParams, SpinOperator, DIM, SITES};
use crate::{CMat, Error, Result, C64};

pub const LDIM: usize = DIM * DIM;

/// Physical state on the three-spin space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub matrix: CMat,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian, unit trace, positive semidefinite
    /// (all to 1e-10).
    pub fn new(matrix: CMat) -> Result<Self> {
        check_square(&matrix, DIM)?;
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr - c(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let (evals, _) = linalg::hermitian_eigen(&matrix)?;
        if let Some(&min) = evals.first() {
            if min < -1e-10 {
                return Err(Error::InvalidDensityMatrix(format!(
                    "negative eigenvalue {min:e}"
                )));
            }
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: linalg::scale_re(&linalg::identity(DIM), 1.0 / DIM as f64),
        }
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        if psi.len() != DIM {
            return Err(Error::DimensionMismatch {
                expected: DIM.to_string(),
                found: psi.len().to_string(),
            });
        }
        let n2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let m = Mat::from_fn(DIM, DIM, |i, j| psi[i] * psi[j].conj() / n2);
        Ok(Self { matrix: m })
    }

    /// ⟨A⟩ = tr(Aρ).
    pub fn expectation(&self, a: &CMat) -> C64 {
        linalg::trace(&(a * &self.matrix))
    }
}

/// Generator acting on vectorized operators.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub matrix: CMat,
    /// Counting field the generator was tilted with (0 when untilted).
    pub bias: f64,
    pub params: Option<ModelParams>,
}

impl Superoperator {
    fn bare(matrix: CMat) -> Self {
        Self {
            matrix,
            bias: 0.0,
            params: None,
        }
    }

    pub fn zero() -> Self {
        Self::bare(Mat::zeros(LDIM, LDIM))
    }

    /// ⟨⟨I| G, the image of the trace functional. Zero for trace-preserving G.
    pub fn trace_row(&self) -> Vec<C64> {
        (0..LDIM)
            .map(|col| (0..DIM).map(|d| self.matrix[(d + DIM * d, col)]).sum())
            .collect()
    }
}

/// Collapse channel in standard form: rate · (L•L† − ½{L†L, •}).
#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub operator: SpinOperator,
    pub rate: f64,
    /// Contribution of one jump to the net count K.
    pub count_weight: i8,
    pub kind: ChannelKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    CollectiveEmission,
    CollectiveAbsorption,
    SiteEmission(usize),
    SiteAbsorption(usize),
}

impl ChannelKind {
    pub fn label(self) -> String {
        match self {
            ChannelKind::CollectiveEmission => "coll_emit".into(),
            ChannelKind::CollectiveAbsorption => "coll_absorb".into(),
            ChannelKind::SiteEmission(i) => format!("site{i}_emit"),
            ChannelKind::SiteAbsorption(i) => format!("site{i}_absorb"),
        }
    }
}

fn check_square(m: &CMat, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

pub fn vectorize(rho: &CMat) -> Result<Vec<C64>> {
    check_square(rho, DIM)?;
    let mut v = Vec::with_capacity(LDIM);
    for j in 0..DIM {
        for i in 0..DIM {
            v.push(rho[(i, j)]);
        }
    }
    Ok(v)
}

pub fn unvectorize(v: &[C64]) -> Result<CMat> {
    if v.len() != LDIM {
        return Err(Error::DimensionMismatch {
            expected: LDIM.to_string(),
            found: v.len().to_string(),
        });
    }
    Ok(Mat::from_fn(DIM, DIM, |i, j| v[i + DIM * j]))
}

/// vec(L•R) = (Rᵀ ⊗ L) vec(•).
fn sandwich(left: &CMat, right: &CMat) -> CMat {
    linalg::kron(&linalg::transpose(right), left)
}

fn left_mul(a: &CMat) -> CMat {
    sandwich(a, &linalg::identity(DIM))
}

fn right_mul(b: &CMat) -> CMat {
    sandwich(&linalg::identity(DIM), b)
}

/// Superoperator of the recycling term L•L†.
pub fn recycling(l: &SpinOperator) -> CMat {
    sandwich(&l.matrix, &linalg::adjoint(&l.matrix))
}

/// 𝒟[L]• = 2L•L† − {L†L, •}.
pub fn dissipator(l: &SpinOperator) -> Superoperator {
    let ldl = &linalg::adjoint(&l.matrix) * &l.matrix;
    let m = linalg::scale_re(&recycling(l), 2.0) - left_mul(&ldl) - right_mul(&ldl);
    Superoperator::bare(m)
}

/// −i[H, •]; rejects non-Hermitian H.
pub fn commutator_part(h: &SpinOperator) -> Result<Superoperator> {
    let defect = linalg::hermiticity_defect(&h.matrix);
    let scale = linalg::max_abs(&h.matrix).max(1.0);
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let m = left_mul(&h.matrix) - right_mul(&h.matrix);
    Ok(Superoperator::bare(linalg::scale(&m, c(0.0, -1.0))))
}

/// Collective emission and absorption operators σ₋, σ₊.
pub fn collective_pair(p: &ModelParams) -> (SpinOperator, SpinOperator) {
    (
        spin_algebra::collective_jump(Direction::Lower, p.convention),
        spin_algebra::collective_jump(Direction::Raise, p.convention),
    )
}

/// All dissipative channels of the model in standard form. Rates carry the
/// factor 2 of 𝒟, so rate·(L•L† − ½{L†L,•}) summed over channels reproduces
/// the dissipative part of [`build_generator`]. Zero-rate channels are kept.
pub fn all_channels(p: &ModelParams) -> Vec<JumpChannel> {
    let (lower, raise) = collective_pair(p);
    let mut out = vec![
        JumpChannel {
            operator: lower,
            rate: 2.0 * p.gamma_coll * (p.nbar + 1.0),
            count_weight: 1,
            kind: ChannelKind::CollectiveEmission,
        },
        JumpChannel {
            operator: raise,
            rate: 2.0 * p.gamma_coll * p.nbar,
            count_weight: -1,
            kind: ChannelKind::CollectiveAbsorption,
        },
    ];
    for site in 1..=SITES {
        out.push(JumpChannel {
            operator: spin_algebra::ladder(site, Direction::Lower, p.convention)
                .expect("valid site"),
            rate: 2.0 * p.gamma_single * (p.nbar + 1.0),
            count_weight: 0,
            kind: ChannelKind::SiteEmission(site),
        });
        out.push(JumpChannel {
            operator: spin_algebra::ladder(site, Direction::Raise, p.convention)
                .expect("valid site"),
            rate: 2.0 * p.gamma_single * p.nbar,
            count_weight: 0,
            kind: ChannelKind::SiteAbsorption(site),
        });
    }
    out
}

/// W = −i[Ĥ,•] + Γ(n̄+1)𝒟[σ₋] + Γn̄𝒟[σ₊] + γ(n̄+1)Σᵢ𝒟[σ₋ⁱ] + γn̄Σᵢ𝒟[σ₊ⁱ].
pub fn build_generator(p: &ModelParams) -> Result<Superoperator> {
    p.validate()?;
    let h = spin_algebra::build_hamiltonian(p);
    let mut m = commutator_part(&h)?.matrix;
    for ch in all_channels(p) {
        if ch.rate > 0.0 {
            // rate already includes the factor 2 that 𝒟 carries
            m += linalg::scale_re(&dissipator(&ch.operator).matrix, ch.rate / 2.0);
        }
    }
    Ok(Superoperator {
        matrix: m,
        bias: 0.0,
        params: Some(*p),
    })
}

/// ∂W_s/∂s for the counted collective channels.
pub fn tilt_derivative(p: &ModelParams, s: f64) -> CMat {
    let (lower, raise) = collective_pair(p);
    let emit = 2.0 * p.gamma_coll * (p.nbar + 1.0);
    let absorb = 2.0 * p.gamma_coll * p.nbar;
    let mut m = linalg::scale_re(&recycling(&lower), -emit * (-s).exp());
    if absorb > 0.0 {
        m += linalg::scale_re(&recycling(&raise), absorb * s.exp());
    }
    m
}

/// W_s = W + V_s with the collective recycling terms weighted by e^{∓s}.
/// Single-spin channels are never tilted.
pub fn tilt_generator(p: &ModelParams, s: f64) -> Result<Superoperator> {
    if !s.is_finite() {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("must be finite (got {s})"),
        });
    }
    let mut w = build_generator(p)?;
    if s != 0.0 {
        let (lower, raise) = collective_pair(p);
        let emit = 2.0 * p.gamma_coll * (p.nbar + 1.0);
        let absorb = 2.0 * p.gamma_coll * p.nbar;
        w.matrix += linalg::scale_re(&recycling(&lower), emit * (-s).exp_m1());
        if absorb > 0.0 {
            w.matrix += linalg::scale_re(&recycling(&raise), absorb * s.exp_m1());
        }
    }
    w.bias = s;
    Ok(w)
}

/// Evaluate G[ρ] through the vectorized representation.
pub fn apply_generator(g: &Superoperator, rho: &CMat) -> Result<CMat> {
    check_square(&g.matrix, LDIM)?;
    let v = vectorize(rho)?;
    unvectorize(&linalg::mat_vec(&g.matrix, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, max_abs_diff};
    use crate::spin_algebra::{Convention, Direction};

    #[test]
    fn vectorize_identity() {
        let v = vectorize(&DensityMatrix::maximally_mixed().matrix).unwrap();
        for (k, z) in v.iter().enumerate() {
            let diag = k % (DIM + 1) == 0;
            assert_eq!(z.re, if diag { 0.125 } else { 0.0 });
        }
        assert!(vectorize(&linalg::identity(3)).is_err());
        assert!(unvectorize(&[c(0.0, 0.0); 10]).is_err());
    }

    #[test]
    fn toy_dissipator_on_single_spin() {
        // 2×2 check of 2L•L† − {L†L,•} with L the halved lowering operator
        let l = Mat::from_fn(2, 2, |i, j| if i == 1 && j == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let up = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let ldl = &linalg::adjoint(&l) * &l;
        let out = linalg::scale_re(&(&l * &up * linalg::adjoint(&l)), 2.0) - &ldl * &up - &up * &ldl;
        assert_eq!(out[(1, 1)], c(2.0, 0.0));
        assert_eq!(out[(0, 0)], c(-2.0, 0.0));
    }

    #[test]
    fn dissipator_of_zero_is_zero() {
        assert_eq!(max_abs(&dissipator(&SpinOperator::zero()).matrix), 0.0);
    }

    #[test]
    fn commutator_of_identity_vanishes() {
        let g = commutator_part(&SpinOperator::identity()).unwrap();
        assert_eq!(max_abs(&g.matrix), 0.0);
        let bad = spin_algebra::ladder(1, Direction::Lower, Convention::Unhalved).unwrap();
        assert!(matches!(commutator_part(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn tilt_at_zero_is_exact() {
        let p = ModelParams::reference().with_nbar(2.0).with_gamma_single(0.0005);
        let w = build_generator(&p).unwrap();
        let w0 = tilt_generator(&p, 0.0).unwrap();
        assert_eq!(max_abs_diff(&w.matrix, &w0.matrix), 0.0);
    }

    #[test]
    fn absorption_tilt_vanishes_without_thermal_occupation() {
        let p = ModelParams::reference();
        let w = build_generator(&p).unwrap();
        let ws = tilt_generator(&p, 0.7).unwrap();
        let (lower, _) = collective_pair(&p);
        let emit = 2.0 * p.gamma_coll;
        let expected = &w.matrix + linalg::scale_re(&recycling(&lower), emit * (-0.7f64).exp_m1());
        assert!(max_abs_diff(&ws.matrix, &expected) < 1e-14);
    }

    #[test]
    fn large_bias_removes_recycling() {
        let p = ModelParams::reference();
        let w = build_generator(&p).unwrap();
        let (lower, _) = collective_pair(&p);
        let no_jump = &w.matrix - linalg::scale_re(&recycling(&lower), 2.0 * p.gamma_coll);
        let ws = tilt_generator(&p, 60.0).unwrap();
        assert!(max_abs_diff(&ws.matrix, &no_jump) < 1e-12);
    }

    #[test]
    fn closed_dynamics_spectrum_is_imaginary() {
        let mut p = ModelParams::reference();
        p.gamma_coll = 0.0;
        let w = build_generator(&p).unwrap();
        for ev in linalg::eigenvalues(&w.matrix).unwrap() {
            assert!(ev.re.abs() < 1e-10, "{ev}");
        }
    }

    #[test]
    fn rejects_nonfinite_bias() {
        assert!(tilt_generator(&ModelParams::reference(), f64::NAN).is_err());
    }

    #[test]
    fn channel_weights() {
        let p = ModelParams::reference().with_nbar(5.0).with_gamma_single(0.0005);
        let chans = all_channels(&p);
        assert_eq!(chans.len(), 8);
        for ch in &chans {
            let expected = match ch.kind {
                ChannelKind::CollectiveEmission => 1,
                ChannelKind::CollectiveAbsorption => -1,
                _ => 0,
            };
            assert_eq!(ch.count_weight, expected);
        }
    }
}
