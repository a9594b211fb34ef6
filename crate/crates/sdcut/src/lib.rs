//! Penalized semidefinite relaxation for binary quadratic programs (BQPs).
//!
//! The pipeline: build a [`model::Relaxation`] from a [`model::BqpProblem`]
//! and its lifted constraints, maximize the simplified dual with
//! [`solver::solve_dual`] (one partial eigendecomposition per iteration),
//! recover the primal matrix as a low-rank factor, and round it to a binary
//! solution with [`rounding`]. [`spectral`] baselines and the exhaustive
//! [`oracle`] make every bound checkable at desk scale.
//!
//! All randomness in the crate flows through `ChaCha8Rng` seeded from caller
//! supplied `u64` seeds, so results are reproducible across platforms.

pub use nalgebra;

pub mod boxqn;
pub mod builders;
pub mod mmio;
pub mod model;
pub mod oracle;
pub mod rounding;
pub mod solver;
pub mod spectral;
pub mod symlin;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
