//! Large-deviation and quantum-jump toolkit for three spin-1/2 sites with a
//! collective, bath-driven spin-flip channel.
//!
//! The crate is organised bottom-up:
//!
//! * [`spin_algebra`] builds the 8-dimensional Hilbert-space operators.
//! * [`liouvillian`] assembles the 64×64 Lindblad generator and its tilted
//!   (counting-field) deformation.
//! * [`spectral`] extracts θ(s), the activity k(s), kinks, the
//!   Gallavotti–Cohen residual, steady states and the dark subspace.
//! * [`trajectories`] samples quantum-jump trajectories and reduces them into
//!   activity statistics and fluctuation-theorem tables.
//! * [`cli`] ties everything together behind a config-driven command line.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod liouvillian;
pub mod spectral;
pub mod spin_algebra;
pub mod trajectories;

pub use error::{Error, Result};
pub use liouvillian::{DensityMatrix, JumpChannel, Superoperator};
pub use spectral::{DarkSubspace, Kink, ScanResult, SteadyState};
pub use spin_algebra::{Convention, Direction, ModelParams, SpinOperator};
pub use trajectories::{EnsembleStats, JumpEvent, JumpRecord, Stop};

/// Complex scalar used throughout.
pub type C64 = faer::c64;
/// Dense complex matrix.
pub type CMat = faer::Mat<C64>;
