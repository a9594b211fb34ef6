//! Exhaustive brute-force BQP solver for desk-scale ground truth.

use nalgebra::DVector;

use crate::model::{quad_value, BqpProblem, ConstraintSpec, Domain};
use crate::{Error, Result};

/// Hard enumeration cap: 2^22 candidates.
pub const ORACLE_CAP: usize = 22;

/// Tolerance for exact lifted constraint checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub best_x: DVector<f64>,
    pub best_value: f64,
    pub feasible_count: u64,
}

/// Enumerates every domain vector, checks the lifted constraints on x x^T
/// exactly (absolute tolerance 1e-9), and returns the feasible minimizer.
/// Ties go to the lexicographically smallest vector visited.
///
/// Sign-vector problems are enumerated over x[0] = +1 only: every lifted
/// constraint is a function of x x^T, so feasibility and objective are
/// invariant under global negation and each feasible point counts its twin.
/// The returned representative has x[0] = +1.
pub fn brute_force(problem: &BqpProblem, constraints: &[ConstraintSpec]) -> Result<OracleResult> {
    let n = problem.n();
    if n > ORACLE_CAP {
        return Err(Error::OracleCap(n));
    }
    for c in constraints {
        c.matrix.check_dim(n)?;
    }
    let feasible = |x: &DVector<f64>| {
        constraints.iter().all(|c| c.violation_at(x) <= FEASIBILITY_TOL)
    };
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut feasible_count = 0u64;
    // Both domains pin the first coordinate, leaving n-1 free. Ascending
    // counters visit vectors in lexicographic order (high bit first), so
    // strict improvement keeps the lexicographically smallest optimum.
    let free = n - 1;
    let (lo, hi) = match problem.domain {
        Domain::PlusMinusOne => (-1.0, 1.0),
        Domain::HomogenizedZeroOne { .. } => (0.0, 1.0),
    };
    let per_hit = match problem.domain {
        Domain::PlusMinusOne => 2,
        Domain::HomogenizedZeroOne { .. } => 1,
    };
    let mut x = DVector::from_element(n, 1.0);
    for c in 0u64..(1u64 << free) {
        for i in 0..free {
            x[i + 1] = if c >> (free - 1 - i) & 1 == 1 { hi } else { lo };
        }
        if !feasible(&x) {
            continue;
        }
        feasible_count += per_hit;
        let value = quad_value(&problem.a, &x);
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((x.clone(), value));
        }
    }
    match best {
        Some((best_x, best_value)) => {
            debug_assert!(problem.check_domain(&best_x).is_ok());
            Ok(OracleResult { best_x, best_value, feasible_count })
        }
        None => Err(Error::EmptyFeasible),
    }
}
