//! The penalized-relaxation dual solver. The simplified dual
//!
//! `max_u  -1/(4 sigma) |C(u)_-|_F^2 - u.b - sigma eta^2`,   `C(u) = A + sum_i u_i B_i`
//!
//! with `u >= 0` on inequality coordinates, is maximized by running the
//! box-constrained quasi-Newton minimizer on its negation. Each evaluation
//! costs one partial eigendecomposition of C(u), warm-started from the
//! previous one; the optimal primal matrix is then read off the negative
//! eigenpairs at the maximizer.

use std::cell::{Cell, RefCell};

use nalgebra::DVector;

use crate::boxqn::{self, Bounds, QnOptions, QnStatus};
use crate::model::{Relaxation, Sense};
use crate::symlin::{
    inner_lowrank, negative_part, EigOptions, EigenFactor, PrimalFactor, SymmetricOperator,
};
use crate::{Error, Result};

/// One outer-iteration snapshot: the dual value, projected-gradient norm,
/// cumulative eigendecomposition count, and the negative-eigenpair count
/// of the latest factor.
#[derive(Clone, Copy, Debug)]
pub struct TraceRow {
    pub iteration: usize,
    pub value: f64,
    pub pg_norm: f64,
    pub eig_calls: usize,
    pub negative_count: usize,
}

impl TraceRow {
    pub const CSV_HEADER: &'static str = "iteration,value,pg_norm,eig_calls,negative_count";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.iteration, self.value, self.pg_norm, self.eig_calls, self.negative_count
        )
    }
}

/// The maximizer of the simplified dual together with everything needed to
/// recover and audit the primal solution.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub u: DVector<f64>,
    /// Dual value at `u`: a lower bound on the penalized primal, hence on
    /// the binary optimum.
    pub bound: f64,
    /// Negative eigenpairs of C(u), evaluated at the returned `u`.
    pub neg_factor: EigenFactor,
    pub iterations: usize,
    pub eig_calls: usize,
    pub status: QnStatus,
    pub pg_norm: f64,
    pub trace: Vec<TraceRow>,
}

/// Per-constraint feasibility report for a recovered primal matrix.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// Stored (equalities-first) constraint order.
    pub violations: Vec<f64>,
    pub max_equality: f64,
    pub max_inequality: f64,
}

/// Evaluates the dual objective and its gradient at `u`, returning the
/// eigenfactor of C(u)'s negative part for reuse as the next warm start.
/// Exactly one partial eigendecomposition per call.
pub fn dual_value_grad(
    relax: &Relaxation,
    u: &DVector<f64>,
    warm: Option<&EigenFactor>,
) -> Result<(f64, DVector<f64>, EigenFactor)> {
    let m = relax.m();
    if u.len() != m {
        return Err(Error::Dimension {
            context: "dual_value_grad",
            expected: m,
            got: u.len(),
        });
    }
    let c = if m == 0 {
        relax.a.clone()
    } else {
        let terms: Vec<(f64, crate::symlin::ConstraintMatrix)> = relax
            .constraints
            .iter()
            .zip(u.iter())
            .map(|(c, w)| (*w, c.matrix.clone()))
            .collect();
        SymmetricOperator::composite(relax.a.clone(), terms)?
    };
    let factor = negative_part(&c, &EigOptions::default(), warm)?;

    let quarter = 1.0 / (4.0 * relax.sigma);
    let half = 1.0 / (2.0 * relax.sigma);
    let mut value = -quarter * factor.fro_norm_sq() - relax.sigma * relax.eta * relax.eta;
    let mut grad = DVector::zeros(m);
    for (i, cons) in relax.constraints.iter().enumerate() {
        value -= u[i] * cons.b;
        grad[i] = -half * inner_lowrank(&cons.matrix, &factor)? - cons.b;
    }
    Ok((value, grad, factor))
}

/// Maximizes the simplified dual. `u0` defaults to zero, the natural first
/// iterate (C(0) = A). Every iteration reuses the previous eigenfactor as a
/// warm start; the returned bound and factor come from one final evaluation
/// at the maximizer, so they are mutually consistent.
pub fn solve_dual(
    relax: &Relaxation,
    opts: &QnOptions,
    u0: Option<&DVector<f64>>,
) -> Result<DualSolution> {
    let m = relax.m();
    let u_init = match u0 {
        Some(u) => {
            if u.len() != m {
                return Err(Error::Dimension {
                    context: "solve_dual initial point",
                    expected: m,
                    got: u.len(),
                });
            }
            u.clone()
        }
        None => DVector::zeros(m),
    };
    let bounds = Bounds::free_then_nonneg(relax.num_equalities, m);

    let warm: RefCell<Option<EigenFactor>> = RefCell::new(None);
    let eig_calls = Cell::new(0usize);
    let neg_count = Cell::new(0usize);
    let trace: RefCell<Vec<TraceRow>> = RefCell::new(Vec::new());

    let f_and_grad = |u: &DVector<f64>| -> Result<(f64, DVector<f64>)> {
        let prev = warm.borrow();
        let (value, grad, factor) = dual_value_grad(relax, u, prev.as_ref())?;
        drop(prev);
        eig_calls.set(eig_calls.get() + 1);
        neg_count.set(factor.count());
        *warm.borrow_mut() = Some(factor);
        Ok((-value, -grad))
    };
    let observer = |info: boxqn::IterationInfo<'_>| {
        trace.borrow_mut().push(TraceRow {
            iteration: info.iteration,
            value: -info.f,
            pg_norm: info.pg_norm,
            eig_calls: eig_calls.get(),
            negative_count: neg_count.get(),
        });
    };
    let res = boxqn::minimize_observed(f_and_grad, &u_init, &bounds, opts, observer)?;

    let final_warm = warm.into_inner();
    let (bound, _, neg_factor) = dual_value_grad(relax, &res.u, final_warm.as_ref())?;
    Ok(DualSolution {
        u: res.u,
        bound,
        neg_factor,
        iterations: res.iterations,
        eig_calls: eig_calls.get() + 1,
        status: res.status,
        pg_norm: res.pg_norm,
        trace: trace.into_inner(),
    })
}

/// Reads the optimal primal matrix off the dual solution:
/// `X* = sum_k (-lambda_k / (2 sigma)) p_k p_k^T` over the negative
/// eigenpairs of C(u*). An empty negative spectrum means C(u*) is p.s.d.
/// and X* is the zero matrix, returned with the degenerate flag set.
pub fn recover_primal(relax: &Relaxation, sol: &DualSolution) -> Result<PrimalFactor> {
    if sol.neg_factor.n() != relax.n() {
        return Err(Error::Dimension {
            context: "recover_primal",
            expected: relax.n(),
            got: sol.neg_factor.n(),
        });
    }
    if sol.neg_factor.count() == 0 {
        let mut zero = PrimalFactor::zero(relax.n());
        zero.objective = Some(0.0);
        return Ok(zero);
    }
    let scale = 2.0 * relax.sigma;
    let weights: Vec<f64> = sol.neg_factor.eigenvalues.iter().map(|l| -l / scale).collect();
    let mut factor = PrimalFactor::from_weighted(weights, sol.neg_factor.vectors.clone());
    let mut objective = 0.0;
    for k in 0..factor.count() {
        let p = factor.basis.column(k).clone_owned();
        objective += factor.weights[k] * relax.a.matvec(&p).dot(&p);
    }
    factor.objective = Some(objective);
    Ok(factor)
}

/// Constraint violations of a recovered primal matrix, in stored order:
/// `|<X,B> - b|` for equalities, `max(0, <X,B> - b)` for inequalities.
pub fn primal_residuals(relax: &Relaxation, x: &PrimalFactor) -> Result<ResidualReport> {
    if x.n() != relax.n() {
        return Err(Error::Dimension {
            context: "primal_residuals",
            expected: relax.n(),
            got: x.n(),
        });
    }
    let mut violations = Vec::with_capacity(relax.m());
    let mut max_equality = 0.0f64;
    let mut max_inequality = 0.0f64;
    for cons in &relax.constraints {
        let value = cons.matrix.inner_factors(&x.weights, &x.basis);
        let v = match cons.sense {
            Sense::Equality => {
                let v = (value - cons.b).abs();
                max_equality = max_equality.max(v);
                v
            }
            Sense::LessEq => {
                let v = (value - cons.b).max(0.0);
                max_inequality = max_inequality.max(v);
                v
            }
        };
        violations.push(v);
    }
    Ok(ResidualReport {
        violations,
        max_equality,
        max_inequality,
    })
}
