//! Property-based checks of the solver's structural invariants.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdcut::boxqn::QnOptions;
use sdcut::builders::{bisection_problem, random_graph};
use sdcut::model::{build_relaxation, BqpProblem, ConstraintSpec, Domain};
use sdcut::oracle::brute_force;
use sdcut::rounding::assignment_round;
use sdcut::solver::{dual_value_grad, recover_primal, solve_dual};
use sdcut::symlin::{
    eig_full, negative_part, psd_project, ConstraintMatrix, EigOptions, SymmetricOperator,
};

fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The p.s.d. and n.s.d. parts reassemble the original matrix.
    #[test]
    fn projection_parts_reassemble(n in 2usize..30, seed in any::<u64>()) {
        let m = random_symmetric(n, seed);
        let op = SymmetricOperator::dense(m.clone()).unwrap();
        let plus = psd_project(&op).unwrap();
        let minus = negative_part(&op, &EigOptions::default(), None).unwrap();
        let err = (plus.reconstruct() + minus.reconstruct() - &m).norm();
        prop_assert!(err <= 1e-8 * m.norm().max(1.0));
    }

    /// Warm-started and cold extractions agree on the negative spectrum.
    #[test]
    fn warm_and_cold_extractions_agree(n in 3usize..25, seed in any::<u64>()) {
        let m = random_symmetric(n, seed);
        let op = SymmetricOperator::dense(m.clone()).unwrap();
        let nearby = SymmetricOperator::dense(&m * 0.95).unwrap();
        let stale = negative_part(&nearby, &EigOptions::default(), None).unwrap();
        let cold = negative_part(&op, &EigOptions::default(), None).unwrap();
        let warm = negative_part(&op, &EigOptions::default(), Some(&stale)).unwrap();
        prop_assert_eq!(cold.count(), warm.count());
        for k in 0..cold.count() {
            prop_assert!((cold.eigenvalues[k] - warm.eigenvalues[k]).abs() <= 1e-7);
        }
    }

    /// Frobenius norm never exceeds the trace on the p.s.d. cone, with
    /// equality exactly on rank-one matrices.
    #[test]
    fn trace_dominates_frobenius_on_the_cone(n in 2usize..20, seed in any::<u64>(), eta in 0.5f64..20.0) {
        let g = random_symmetric(n, seed);
        let mut x = &g * g.transpose();
        let tr = x.trace();
        prop_assume!(tr > 1e-9);
        x *= eta / tr;
        prop_assert!(x.norm() <= eta + 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0f64));
        prop_assume!(v.norm() > 1e-6);
        let rank_one = (&v * v.transpose()) * (eta / v.norm_squared());
        prop_assert!((rank_one.norm() - eta).abs() <= 1e-9);
    }

    /// Constraint reordering is recorded and reversible.
    #[test]
    fn constraint_permutation_round_trips(seed in any::<u64>()) {
        let n = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = SymmetricOperator::dense(random_symmetric(n, seed)).unwrap();
        let problem = BqpProblem::new(a, Domain::PlusMinusOne).unwrap();
        // A shuffled mix of equalities and inequalities.
        let mut cons = Vec::new();
        for i in 0..n {
            let b = rng.random_range(-1.0..1.0);
            if rng.random::<bool>() {
                cons.push(ConstraintSpec::equality(ConstraintMatrix::DiagUnit(i), b));
            } else {
                cons.push(ConstraintSpec::less_eq(ConstraintMatrix::DiagUnit(i), b));
            }
        }
        let caller_b: Vec<f64> = cons.iter().map(|c| c.b).collect();
        let relax = build_relaxation(&problem, cons, 1e-3).unwrap();
        let stored_b = relax.b_vector();
        // order[k] names the caller position of stored row k.
        let stored: Vec<f64> = (0..relax.m()).map(|k| stored_b[k]).collect();
        let recovered = relax.to_caller_order(&stored);
        prop_assert_eq!(recovered, caller_b);
        // Equalities come first.
        prop_assert!(relax.order.len() == relax.m());
    }

    /// The dual gradient matches central finite differences.
    #[test]
    fn dual_gradient_matches_finite_differences(seed in any::<u64>()) {
        let n = 6;
        let w = random_graph(n, 0.8, seed).unwrap();
        let (problem, cons) = bisection_problem(&w).unwrap();
        let relax = build_relaxation(&problem, cons, 1e-3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let u = DVector::from_fn(relax.m(), |_, _| rng.random_range(0.0..0.5f64));
        let (_, grad, _) = dual_value_grad(&relax, &u, None).unwrap();
        let h = 1e-5;
        for i in 0..relax.m() {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += h;
            dn[i] -= h;
            let (fp, _, _) = dual_value_grad(&relax, &up, None).unwrap();
            let (fm, _, _) = dual_value_grad(&relax, &dn, None).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            let denom = fd.abs().max(grad[i].abs()).max(1.0);
            prop_assert!(
                (grad[i] - fd).abs() / denom <= 1e-5,
                "coordinate {}: grad {} vs fd {}", i, grad[i], fd
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Weak duality against the enumeration oracle on small bisections.
    #[test]
    fn dual_bound_never_exceeds_the_oracle(n in prop::sample::select(vec![4usize, 6, 8]), seed in any::<u64>()) {
        let w = random_graph(n, 0.9, seed).unwrap();
        let (problem, cons) = bisection_problem(&w).unwrap();
        let oracle = brute_force(&problem, &cons).unwrap();
        let relax = build_relaxation(&problem, cons, 1e-3).unwrap();
        let sol = solve_dual(&relax, &QnOptions::default(), None).unwrap();
        prop_assert!(sol.bound <= oracle.best_value + 1e-6);
    }

    /// The recovered primal obeys the trace-ball bound of the relaxation.
    #[test]
    fn recovered_primal_stays_in_the_ball(seed in any::<u64>(), sigma in 1e-4f64..1e-2) {
        let n = 6;
        let w = random_graph(n, 0.9, seed).unwrap();
        let (problem, cons) = bisection_problem(&w).unwrap();
        let relax = build_relaxation(&problem, cons, sigma).unwrap();
        let sol = solve_dual(&relax, &QnOptions::default(), None).unwrap();
        let x = recover_primal(&relax, &sol).unwrap();
        prop_assert!(x.fro_norm <= relax.eta + 1e-9, "|X|_F {} vs eta {}", x.fro_norm, relax.eta);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Assignment rounding always returns an injective in-range map.
    #[test]
    fn assignments_are_always_injective(
        k in 1usize..5,
        extra in 0usize..4,
        seed in any::<u64>(),
    ) {
        let l = k + extra;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let quality: Vec<f64> = (0..k * l).map(|_| rng.random_range(-1.0..1.0)).collect();
        let assign = assignment_round(&quality, k, l).unwrap();
        prop_assert_eq!(assign.len(), k);
        let mut seen = vec![false; l];
        for &j in &assign {
            prop_assert!(j < l);
            prop_assert!(!seen[j]);
            seen[j] = true;
        }
    }
}

/// Full-spectrum sanity: reconstruction from all eigenpairs.
#[test]
fn eig_full_reconstructs() {
    for seed in 0..5u64 {
        let m = random_symmetric(12, seed);
        let op = SymmetricOperator::dense(m.clone()).unwrap();
        let eig = eig_full(&op).unwrap();
        assert!((eig.reconstruct() - &m).norm() <= 1e-9 * m.norm().max(1.0));
    }
}
