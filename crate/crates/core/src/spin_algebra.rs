//! Hilbert-space operators for three spin-1/2 sites.
//!
//! Basis states are |s₁s₂s₃⟩ with σ_z|↑⟩ = +|↑⟩. The basis index is the binary
//! number b₁b₂b₃ with b = 0 for ↑ and spin 1 most significant, so |↑↑↑⟩ is
//! index 0 and |↓↓↓⟩ is index 7.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, c};
use crate::{CMat, Error, Result, C64};

pub const SITES: usize = 3;
pub const DIM: usize = 8;

/// Normalization of the single-site ladder operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// σ± = (σx ± iσy)/2.
    Halved,
    /// σ± = σx ± iσy, as written for the spin-flip operators of the model.
    #[default]
    Unhalved,
}

impl Convention {
    /// Multiplier applied to σx ± iσy.
    pub fn factor(self) -> f64 {
        match self {
            Convention::Halved => 0.5,
            Convention::Unhalved => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Halved => "halved",
            Convention::Unhalved => "unhalved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Raise,
    Lower,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Raise => Direction::Lower,
            Direction::Lower => Direction::Raise,
        }
    }
}

/// Physical and convention parameters of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Transverse field α.
    pub alpha: f64,
    /// Longitudinal field B.
    pub b_field: f64,
    /// Collective damping rate Γ.
    pub gamma_coll: f64,
    /// Single-spin damping rate γ.
    #[serde(default)]
    pub gamma_single: f64,
    /// Thermal occupation n̄ of the bath.
    #[serde(default)]
    pub nbar: f64,
    #[serde(default)]
    pub convention: Convention,
}

impl ModelParams {
    pub fn new(
        alpha: f64,
        b_field: f64,
        gamma_coll: f64,
        gamma_single: f64,
        nbar: f64,
        convention: Convention,
    ) -> Result<Self> {
        let p = Self {
            alpha,
            b_field,
            gamma_coll,
            gamma_single,
            nbar,
            convention,
        };
        p.validate()?;
        if b_field >= alpha / 2.0 {
            log::warn!(
                "b_field = {b_field} is not small compared to alpha = {alpha}; \
                 the model is meant for B << alpha"
            );
        }
        Ok(p)
    }

    /// α = 10, B = 0.5, Γ = 0.05, γ = 0, n̄ = 0, unhalved ladders.
    pub fn reference() -> Self {
        Self {
            alpha: 10.0,
            b_field: 0.5,
            gamma_coll: 0.05,
            gamma_single: 0.0,
            nbar: 0.0,
            convention: Convention::Unhalved,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite (got {v})"),
                })
            }
        };
        finite("alpha", self.alpha)?;
        finite("b_field", self.b_field)?;
        finite("gamma_coll", self.gamma_coll)?;
        finite("gamma_single", self.gamma_single)?;
        finite("nbar", self.nbar)?;
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must be > 0 (got {})", self.alpha),
            });
        }
        for (name, v) in [
            ("gamma_coll", self.gamma_coll),
            ("gamma_single", self.gamma_single),
            ("nbar", self.nbar),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be >= 0 (got {v})"),
                });
            }
        }
        Ok(())
    }

    pub fn with_nbar(mut self, nbar: f64) -> Self {
        self.nbar = nbar;
        self
    }

    pub fn with_gamma_single(mut self, gamma_single: f64) -> Self {
        self.gamma_single = gamma_single;
        self
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    /// Copy with the single-spin channels switched off.
    pub fn collective_only(self) -> Self {
        self.with_gamma_single(0.0)
    }
}

/// Operator on the three-spin Hilbert space.
#[derive(Debug, Clone)]
pub struct SpinOperator {
    pub matrix: CMat,
    pub hermitian_hint: bool,
}

impl SpinOperator {
    pub fn new(matrix: CMat, hermitian_hint: bool) -> Result<Self> {
        if matrix.nrows() != DIM || matrix.ncols() != DIM {
            return Err(Error::DimensionMismatch {
                expected: format!("{DIM}x{DIM}"),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        if hermitian_hint {
            let defect = linalg::hermiticity_defect(&matrix);
            if defect >= 1e-12 {
                return Err(Error::NotHermitian(defect));
            }
        }
        Ok(Self {
            matrix,
            hermitian_hint,
        })
    }

    pub fn zero() -> Self {
        Self {
            matrix: Mat::zeros(DIM, DIM),
            hermitian_hint: true,
        }
    }

    pub fn identity() -> Self {
        Self {
            matrix: linalg::identity(DIM),
            hermitian_hint: true,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: linalg::adjoint(&self.matrix),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        linalg::mat_vec(&self.matrix, psi)
    }

    pub fn mul(&self, other: &SpinOperator) -> SpinOperator {
        SpinOperator {
            matrix: &self.matrix * &other.matrix,
            hermitian_hint: false,
        }
    }
}

/// Standard 2×2 Pauli matrix.
pub fn pauli(axis: Axis) -> CMat {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let entries = match axis {
        Axis::X => [[z, one], [one, z]],
        Axis::Y => [[z, -i], [i, z]],
        Axis::Z => [[one, z], [z, -one]],
    };
    Mat::from_fn(2, 2, |r, col| entries[r][col])
}

fn check_site(site: usize) -> Result<()> {
    if (1..=SITES).contains(&site) {
        Ok(())
    } else {
        Err(Error::SiteOutOfRange(site))
    }
}

/// Place a single-site operator on `site` (1-based), identity elsewhere.
pub fn embed(op: &CMat, site: usize) -> Result<SpinOperator> {
    check_site(site)?;
    if op.nrows() != 2 || op.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2x2".into(),
            found: format!("{}x{}", op.nrows(), op.ncols()),
        });
    }
    let id = linalg::identity(2);
    let mut out = linalg::identity(1);
    for k in 1..=SITES {
        out = linalg::kron(&out, if k == site { op } else { &id });
    }
    let hermitian = linalg::hermiticity_defect(op) < 1e-14;
    Ok(SpinOperator {
        matrix: out,
        hermitian_hint: hermitian,
    })
}

/// Pairs summed in the Ising term: the triangle has all three bonds.
pub const BONDS: [(usize, usize); 3] = [(1, 2), (2, 3), (1, 3)];

/// Ĥ = α Σ σxⁱ + Σ_bonds σxⁱσxʲ − B Σ σzⁱ.
pub fn build_hamiltonian(p: &ModelParams) -> SpinOperator {
    let sx = pauli(Axis::X);
    let sz = pauli(Axis::Z);
    let mut h: CMat = Mat::zeros(DIM, DIM);
    for site in 1..=SITES {
        let x = embed(&sx, site).expect("valid site").matrix;
        let z = embed(&sz, site).expect("valid site").matrix;
        h = h + linalg::scale_re(&x, p.alpha) - linalg::scale_re(&z, p.b_field);
    }
    for (i, j) in BONDS {
        let xi = embed(&sx, i).expect("valid site").matrix;
        let xj = embed(&sx, j).expect("valid site").matrix;
        h += &xi * &xj;
    }
    // symmetrize away rounding so the Hermitian hint is exact
    let h = linalg::scale_re(&(&h + linalg::adjoint(&h)), 0.5);
    SpinOperator {
        matrix: h,
        hermitian_hint: true,
    }
}

/// Single-site spin flip σ±ʲ in the chosen convention.
pub fn ladder(site: usize, dir: Direction, conv: Convention) -> Result<SpinOperator> {
    let sign = match dir {
        Direction::Raise => 1.0,
        Direction::Lower => -1.0,
    };
    let sx = pauli(Axis::X);
    let sy = pauli(Axis::Y);
    let op = linalg::scale_re(&(sx + linalg::scale(&sy, c(0.0, sign))), conv.factor());
    let mut emb = embed(&op, site)?;
    emb.hermitian_hint = false;
    Ok(emb)
}

/// Collective jump σ± = σ±¹(σ±² − σ±³).
pub fn collective_jump(dir: Direction, conv: Convention) -> SpinOperator {
    let l1 = ladder(1, dir, conv).expect("valid site");
    let l2 = ladder(2, dir, conv).expect("valid site");
    let l3 = ladder(3, dir, conv).expect("valid site");
    SpinOperator {
        matrix: &l1.matrix * (&l2.matrix - &l3.matrix),
        hermitian_hint: false,
    }
}

/// Permutation exchanging sites 2 and 3.
pub fn swap23() -> SpinOperator {
    let mut m: CMat = Mat::zeros(DIM, DIM);
    for idx in 0..DIM {
        let b1 = idx >> 2 & 1;
        let b2 = idx >> 1 & 1;
        let b3 = idx & 1;
        let swapped = b1 << 2 | b3 << 1 | b2;
        m[(swapped, idx)] = c(1.0, 0.0);
    }
    SpinOperator {
        matrix: m,
        hermitian_hint: true,
    }
}

/// Basis vector for the product state given as spins (true = ↑) on sites 1..3.
pub fn product_state(up: [bool; 3]) -> Vec<C64> {
    let idx = up
        .iter()
        .fold(0usize, |acc, &u| acc << 1 | usize::from(!u));
    let mut v = vec![c(0.0, 0.0); DIM];
    v[idx] = c(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, max_abs_diff, trace};

    fn cm(rows: [[f64; 2]; 2]) -> CMat {
        Mat::from_fn(2, 2, |i, j| c(rows[i][j], 0.0))
    }

    #[test]
    fn pauli_matrices() {
        assert_eq!(max_abs_diff(&pauli(Axis::X), &cm([[0.0, 1.0], [1.0, 0.0]])), 0.0);
        assert_eq!(max_abs_diff(&pauli(Axis::Z), &cm([[1.0, 0.0], [0.0, -1.0]])), 0.0);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let p = pauli(axis);
            assert!(max_abs_diff(&(&p * &p), &linalg::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn embedding() {
        let sx = pauli(Axis::X);
        let e = embed(&sx, 1).unwrap();
        let id2 = linalg::identity(2);
        let expected = linalg::kron(&linalg::kron(&sx, &id2), &id2);
        assert_eq!(max_abs_diff(&e.matrix, &expected), 0.0);
        let id = embed(&id2, 2).unwrap();
        assert_eq!(max_abs_diff(&id.matrix, &linalg::identity(8)), 0.0);
        assert_eq!(trace(&embed(&pauli(Axis::Z), 3).unwrap().matrix).norm(), 0.0);
        assert!(matches!(embed(&sx, 0), Err(Error::SiteOutOfRange(0))));
        assert!(matches!(embed(&sx, 4), Err(Error::SiteOutOfRange(4))));
        assert!(embed(&linalg::identity(3), 1).is_err());
    }

    #[test]
    fn hamiltonian_is_traceless_and_hermitian() {
        let h = build_hamiltonian(&ModelParams::reference());
        assert!(trace(&h.matrix).norm() < 1e-12);
        assert!(linalg::hermiticity_defect(&h.matrix) < 1e-12);
    }

    #[test]
    fn lowering_action() {
        let l = ladder(1, Direction::Lower, Convention::Halved).unwrap();
        let out = l.apply(&product_state([true, true, true]));
        let expected = product_state([false, true, true]);
        assert!(out.iter().zip(&expected).all(|(a, b)| (a - b).norm() < 1e-15));
        assert!(max_abs(&(&l.matrix * &l.matrix)) == 0.0);
    }

    #[test]
    fn convention_scaling() {
        let u = ladder(2, Direction::Raise, Convention::Unhalved).unwrap();
        let h = ladder(2, Direction::Raise, Convention::Halved).unwrap();
        assert_eq!(max_abs_diff(&u.matrix, &linalg::scale_re(&h.matrix, 2.0)), 0.0);
        let cu = collective_jump(Direction::Lower, Convention::Unhalved);
        let ch = collective_jump(Direction::Lower, Convention::Halved);
        assert!(max_abs_diff(&ch.matrix, &linalg::scale_re(&cu.matrix, 0.25)) < 1e-15);
    }

    #[test]
    fn collective_jump_actions() {
        let down = collective_jump(Direction::Lower, Convention::Unhalved);
        let out = down.apply(&product_state([false, false, false]));
        assert!(out.iter().all(|z| z.norm() == 0.0));
        assert_eq!(max_abs(&(&down.matrix * &down.matrix)), 0.0);

        let half = collective_jump(Direction::Lower, Convention::Halved);
        let out = half.apply(&product_state([true, true, true]));
        let a = product_state([false, false, true]);
        let b = product_state([false, true, false]);
        for k in 0..DIM {
            assert!((out[k] - (a[k] - b[k])).norm() < 1e-15);
        }
    }

    #[test]
    fn swap_symmetries() {
        let p = ModelParams::reference();
        let h = build_hamiltonian(&p).matrix;
        let s = swap23().matrix;
        assert!(max_abs(&(&h * &s - &s * &h)) < 1e-12);
        for dir in [Direction::Raise, Direction::Lower] {
            let j = collective_jump(dir, Convention::Unhalved).matrix;
            assert!(max_abs_diff(&(&s * &j * &s), &linalg::scale_re(&j, -1.0)) < 1e-14);
        }
        let up = collective_jump(Direction::Raise, Convention::Halved).matrix;
        let down = collective_jump(Direction::Lower, Convention::Halved).matrix;
        assert!(max_abs_diff(&up, &linalg::adjoint(&down)) < 1e-14);
    }

    #[test]
    fn param_validation() {
        assert!(ModelParams::new(10.0, 0.5, 0.05, 0.0, 0.0, Convention::Unhalved).is_ok());
        let err = ModelParams::new(10.0, 0.5, 0.05, 0.0, -1.0, Convention::Unhalved).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "nbar", .. }));
        assert!(ModelParams::new(0.0, 0.5, 0.05, 0.0, 0.0, Convention::Unhalved).is_err());
        assert!(ModelParams::new(1.0, 0.5, -0.05, 0.0, 0.0, Convention::Unhalved).is_err());
        assert!(ModelParams::new(1.0, 0.5, 0.05, 0.0, f64::NAN, Convention::Unhalved).is_err());
        // warns only
        assert!(ModelParams::new(1.0, 0.9, 0.05, 0.0, 0.0, Convention::Unhalved).is_ok());
    }
}
