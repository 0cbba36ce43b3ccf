use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("site {0} out of range (expected 1, 2 or 3)")]
    SiteOutOfRange(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("operator is not Hermitian (max |A - A^†| = {0:e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("dense eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("leading eigenvalue at s = {s} is not real (imaginary part {imag:e})")]
    NonRealLeading { s: f64, imag: f64 },

    #[error("leading eigenvalue at s = {s} is degenerate (spectral gap {gap:e})")]
    DegenerateLeading { s: f64, gap: f64 },

    #[error(
        "finite-difference stencil [{lo}, {hi}] straddles a kink; use one-sided evaluation"
    )]
    KinkStraddle { lo: f64, hi: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("symmetry point undefined: {0}")]
    SymmetryUndefined(String),

    #[error("no unique steady state: {reason} (null-space dimension {dimension})")]
    NoUniqueSteadyState { dimension: usize, reason: String },

    #[error("empty observation window: total time {total_time} <= burn-in {burn_in}")]
    EmptyWindow { total_time: f64, burn_in: f64 },

    #[error("window {window} longer than trajectory ({total_time})")]
    WindowTooLong { window: f64, total_time: f64 },

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("non-decomposable no-jump propagator: {0}")]
    Propagator(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl Error {
    /// Process exit code: 2 for invalid input, 3 for failed numerical checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Eigensolver(_)
            | Error::NonRealLeading { .. }
            | Error::DegenerateLeading { .. }
            | Error::KinkStraddle { .. }
            | Error::NoUniqueSteadyState { .. }
            | Error::Propagator(_)
            | Error::CheckFailed(_) => 3,
            _ => 2,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::SiteOutOfRange(_) => "site_out_of_range",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotHermitian(_) => "not_hermitian",
            Error::InvalidDensityMatrix(_) => "invalid_density_matrix",
            Error::Eigensolver(_) => "eigensolver",
            Error::NonRealLeading { .. } => "non_real_leading",
            Error::DegenerateLeading { .. } => "degenerate_leading",
            Error::KinkStraddle { .. } => "kink_straddle",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::SymmetryUndefined(_) => "symmetry_undefined",
            Error::NoUniqueSteadyState { .. } => "no_unique_steady_state",
            Error::EmptyWindow { .. } => "empty_window",
            Error::WindowTooLong { .. } => "window_too_long",
            Error::EmptyEnsemble => "empty_ensemble",
            Error::Propagator(_) => "propagator",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::CheckFailed(_) => "check_failed",
        }
    }
}
