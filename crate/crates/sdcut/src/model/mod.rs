//! Problem representation: binary quadratic programs, lifted linear
//! constraints on X = x x^T, and assembly of the penalized relaxation.

use nalgebra::DVector;

use crate::symlin::{ConstraintMatrix, SymmetricOperator};
use crate::{Error, Result};

pub mod archive;

/// The working range for the penalty weight sigma. Smaller tightens the
/// bound at the cost of more iterations; outside this range callers should
/// expect either loose bounds or slow convergence.
pub const SIGMA_RANGE: (f64, f64) = (1e-4, 1e-2);

/// Domain of the decision vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// x in {-1, +1}^n.
    PlusMinusOne,
    /// Homogenized {0,1} problem: the vector is (1, z) with z in {0,1}^(n-1)
    /// and exactly `ones_budget` entries of z equal to one, so the lifted
    /// matrix has trace `ones_budget + 1`.
    HomogenizedZeroOne { ones_budget: usize },
}

/// A binary quadratic program `min x^T A x` over the declared domain.
/// Any linear term is already absorbed: homogenized problems carry it in
/// the first row and column of A.
#[derive(Clone, Debug)]
pub struct BqpProblem {
    pub a: SymmetricOperator,
    pub domain: Domain,
}

impl BqpProblem {
    pub fn new(a: SymmetricOperator, domain: Domain) -> Result<Self> {
        let n = a.n();
        if n == 0 {
            return Err(Error::InvalidArgument("problem dimension is zero".into()));
        }
        if let Domain::HomogenizedZeroOne { ones_budget } = domain {
            if ones_budget + 1 > n {
                return Err(Error::InvalidArgument(format!(
                    "ones budget {ones_budget} does not fit {} binary coordinates",
                    n - 1
                )));
            }
        }
        Ok(BqpProblem { a, domain })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// Trace of the lifted matrix at any feasible binary point: n for
    /// plus-minus-one problems, ones_budget + 1 for homogenized ones.
    pub fn trace_budget(&self) -> f64 {
        match self.domain {
            Domain::PlusMinusOne => self.n() as f64,
            Domain::HomogenizedZeroOne { ones_budget } => (ones_budget + 1) as f64,
        }
    }

    pub fn check_domain(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::Dimension {
                context: "domain check",
                expected: self.n(),
                got: x.len(),
            });
        }
        let ok = match self.domain {
            Domain::PlusMinusOne => x.iter().all(|v| *v == 1.0 || *v == -1.0),
            Domain::HomogenizedZeroOne { .. } => {
                x[0] == 1.0 && x.iter().skip(1).all(|v| *v == 0.0 || *v == 1.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "vector entries violate the declared binary domain".into(),
            ))
        }
    }

    /// x^T A x, which equals <x x^T, A>. Errors on domain violations.
    pub fn lift_value(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_domain(x)?;
        Ok(quad_value(&self.a, x))
    }
}

/// x^T A x without domain checks.
pub fn quad_value(a: &SymmetricOperator, x: &DVector<f64>) -> f64 {
    a.matvec(x).dot(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Equality,
    LessEq,
}

/// One lifted constraint `<X, B> = b` or `<X, B> <= b`. Greater-or-equal
/// inputs are negated on entry so the stored senses are only these two.
#[derive(Clone, Debug)]
pub struct ConstraintSpec {
    pub matrix: ConstraintMatrix,
    pub b: f64,
    pub sense: Sense,
}

impl ConstraintSpec {
    pub fn equality(matrix: ConstraintMatrix, b: f64) -> Self {
        ConstraintSpec {
            matrix,
            b,
            sense: Sense::Equality,
        }
    }

    pub fn less_eq(matrix: ConstraintMatrix, b: f64) -> Self {
        ConstraintSpec {
            matrix,
            b,
            sense: Sense::LessEq,
        }
    }

    /// `<X, B> >= b` stored as `<X, -B> <= -b`, keeping the dual box
    /// uniformly `u >= 0` on inequality coordinates. `n` fixes the ambient
    /// dimension for tags whose negation needs it.
    pub fn greater_eq(matrix: ConstraintMatrix, b: f64, n: usize) -> Self {
        ConstraintSpec {
            matrix: matrix.negated(n),
            b: -b,
            sense: Sense::LessEq,
        }
    }

    /// Violation of this constraint at a lifted binary point x x^T:
    /// |<X,B> - b| for equalities, max(0, <X,B> - b) for inequalities.
    pub fn violation_at(&self, x: &DVector<f64>) -> f64 {
        let val = self.matrix.quad_form(x);
        match self.sense {
            Sense::Equality => (val - self.b).abs(),
            Sense::LessEq => (val - self.b).max(0.0),
        }
    }
}

/// The penalized relaxation instance: objective A, constraints stored
/// equalities first, trace budget eta, and penalty weight sigma.
#[derive(Clone, Debug)]
pub struct Relaxation {
    pub a: SymmetricOperator,
    pub constraints: Vec<ConstraintSpec>,
    /// Constraints `0..num_equalities` are equalities, the rest `<=`.
    pub num_equalities: usize,
    pub eta: f64,
    pub sigma: f64,
    /// `order[k]` is the caller index of stored constraint k.
    pub order: Vec<usize>,
}

impl Relaxation {
    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn b_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.constraints.iter().map(|c| c.b))
    }

    pub fn sigma_in_working_range(&self) -> bool {
        self.sigma >= SIGMA_RANGE.0 && self.sigma <= SIGMA_RANGE.1
    }

    /// Maps per-constraint values back to the caller's constraint order.
    pub fn to_caller_order<T: Clone>(&self, stored: &[T]) -> Vec<T> {
        assert_eq!(stored.len(), self.order.len());
        let mut out: Vec<T> = stored.to_vec();
        for (k, &orig) in self.order.iter().enumerate() {
            out[orig] = stored[k].clone();
        }
        out
    }
}

/// Assembles the penalized relaxation: validates dimensions, reorders the
/// constraints equalities-first (stably, remembering the permutation), and
/// fixes eta from the problem domain.
pub fn build_relaxation(
    problem: &BqpProblem,
    constraints: Vec<ConstraintSpec>,
    sigma: f64,
) -> Result<Relaxation> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "penalty sigma must be positive, got {sigma}"
        )));
    }
    let n = problem.n();
    for c in &constraints {
        c.matrix.check_dim(n)?;
    }
    let mut order: Vec<usize> = (0..constraints.len()).collect();
    order.sort_by_key(|&i| match constraints[i].sense {
        Sense::Equality => 0,
        Sense::LessEq => 1,
    });
    let mut slots: Vec<Option<ConstraintSpec>> = constraints.into_iter().map(Some).collect();
    let reordered: Vec<ConstraintSpec> = order
        .iter()
        .map(|&i| slots[i].take().expect("permutation is a bijection"))
        .collect();
    let num_equalities = reordered
        .iter()
        .take_while(|c| c.sense == Sense::Equality)
        .count();
    Ok(Relaxation {
        a: problem.a.clone(),
        constraints: reordered,
        num_equalities,
        eta: problem.trace_budget(),
        sigma,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::RngExt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exchange2() -> SymmetricOperator {
        SymmetricOperator::sparse(2, vec![(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn eta_follows_the_domain() {
        let p = BqpProblem::new(exchange2(), Domain::PlusMinusOne).unwrap();
        let r = build_relaxation(&p, Vec::new(), 0.01).unwrap();
        assert_eq!(r.eta, 2.0);
        assert_eq!(r.m(), 0);

        // Homogenized registration sizing: K=2, L=3 lifts to dimension 7
        // and the trace budget is K + 1.
        let a = SymmetricOperator::zeros(7);
        let p = BqpProblem::new(a, Domain::HomogenizedZeroOne { ones_budget: 2 }).unwrap();
        let r = build_relaxation(&p, Vec::new(), 1e-3).unwrap();
        assert_eq!(r.eta, 3.0);
    }

    #[test]
    fn sigma_must_be_positive() {
        let p = BqpProblem::new(exchange2(), Domain::PlusMinusOne).unwrap();
        assert!(build_relaxation(&p, Vec::new(), 0.0).is_err());
        assert!(build_relaxation(&p, Vec::new(), -1.0).is_err());
        assert!(build_relaxation(&p, Vec::new(), f64::NAN).is_err());
        assert!(!build_relaxation(&p, Vec::new(), 0.5)
            .unwrap()
            .sigma_in_working_range());
        assert!(build_relaxation(&p, Vec::new(), 1e-3)
            .unwrap()
            .sigma_in_working_range());
    }

    #[test]
    fn constraint_dimensions_are_checked() {
        let p = BqpProblem::new(exchange2(), Domain::PlusMinusOne).unwrap();
        let bad = ConstraintSpec::equality(ConstraintMatrix::DiagUnit(5), 1.0);
        assert!(build_relaxation(&p, vec![bad], 1e-3).is_err());
    }

    #[test]
    fn equalities_come_first_and_the_order_round_trips() {
        let p = BqpProblem::new(SymmetricOperator::zeros(3), Domain::PlusMinusOne).unwrap();
        let cons = vec![
            ConstraintSpec::less_eq(ConstraintMatrix::DiagUnit(0), 1.0),
            ConstraintSpec::equality(ConstraintMatrix::DiagUnit(1), 2.0),
            ConstraintSpec::less_eq(ConstraintMatrix::DiagUnit(2), 3.0),
            ConstraintSpec::equality(ConstraintMatrix::DiagUnit(0), 4.0),
        ];
        let r = build_relaxation(&p, cons, 1e-3).unwrap();
        assert_eq!(r.num_equalities, 2);
        let stored_b: Vec<f64> = r.constraints.iter().map(|c| c.b).collect();
        assert_eq!(stored_b, vec![2.0, 4.0, 1.0, 3.0]);
        assert_eq!(r.to_caller_order(&stored_b), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn greater_eq_is_stored_negated() {
        // <X, E11> >= 0.5 becomes <X, -E11> <= -0.5.
        let c = ConstraintSpec::greater_eq(ConstraintMatrix::DiagUnit(0), 0.5, 2);
        assert_eq!(c.sense, Sense::LessEq);
        assert_eq!(c.b, -0.5);
        let d = c.matrix.to_dense(2);
        assert_eq!(d[(0, 0)], -1.0);
        assert_eq!(d[(1, 1)], 0.0);
    }

    #[test]
    fn lift_value_examples() {
        let a = SymmetricOperator::sparse(2, vec![(0, 1, 1.0)]).unwrap();
        let p = BqpProblem::new(a, Domain::PlusMinusOne).unwrap();
        let x = DVector::from_vec(vec![1.0, -1.0]);
        assert_eq!(p.lift_value(&x).unwrap(), -2.0);
        assert!(p.lift_value(&DVector::from_vec(vec![1.0, 0.5])).is_err());

        // The all-ones vector is in the kernel of any Laplacian.
        let w = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 0.5, 2.0, 0.5, 0.0]);
        let mut l = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    l[(i, j)] = -w[(i, j)];
                    l[(i, i)] += w[(i, j)];
                }
            }
        }
        let lap = BqpProblem::new(
            SymmetricOperator::dense(l).unwrap(),
            Domain::PlusMinusOne,
        )
        .unwrap();
        let e = DVector::from_element(3, 1.0);
        assert!(lap.lift_value(&e).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn lift_value_matches_explicit_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 6;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let x = DVector::from_iterator(
            n,
            (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }),
        );
        let mut direct = 0.0;
        for i in 0..n {
            for j in 0..n {
                direct += x[i] * m[(i, j)] * x[j];
            }
        }
        let p = BqpProblem::new(SymmetricOperator::dense(m).unwrap(), Domain::PlusMinusOne)
            .unwrap();
        assert!((p.lift_value(&x).unwrap() - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn feasible_lift_has_exact_trace_and_norm() {
        // X = x x^T for binary x: trace(X) = sum of x_i^2 = n and
        // |X|_F = |x|^2 = n, both exactly, so the penalty term vanishes.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 5;
        let x = DVector::from_iterator(
            n,
            (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }),
        );
        let xxt = &x * x.transpose();
        assert_eq!(xxt.trace(), n as f64);
        assert_eq!(xxt.norm(), n as f64);
    }

    #[test]
    fn homogenized_domain_checks_leading_one() {
        let p = BqpProblem::new(
            SymmetricOperator::zeros(3),
            Domain::HomogenizedZeroOne { ones_budget: 1 },
        )
        .unwrap();
        assert!(p.check_domain(&DVector::from_vec(vec![1.0, 0.0, 1.0])).is_ok());
        assert!(p.check_domain(&DVector::from_vec(vec![0.0, 0.0, 1.0])).is_err());
        assert!(p.check_domain(&DVector::from_vec(vec![1.0, -1.0, 1.0])).is_err());
        assert_eq!(p.trace_budget(), 2.0);
    }
}
