//! Structured symmetric linear algebra: matrix containers, full and partial
//! eigendecomposition, and projections onto/off the p.s.d. cone.

mod constraint;
mod eig;
mod operator;

pub use constraint::{inner_lowrank, ConstraintMatrix};
pub use eig::{
    eig_full, negative_part, psd_project, EigOptions, EigenFactor, PrimalFactor, RANK_TOL,
};
pub use operator::SymmetricOperator;
