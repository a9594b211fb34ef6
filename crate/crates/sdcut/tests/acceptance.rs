//! End-to-end acceptance suite. One test runs ten numbered criteria and
//! prints a PASS/FAIL line for each (visible with `--nocapture`); the test
//! fails if any criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sdcut::boxqn::QnOptions;
use sdcut::builders::{
    bisection_problem, lift_matching, random_graph, rbf_affinity, registration_constraints,
    registration_instance, two_cluster_dataset, ClusterKind, PointCloud, RegistrationInstance,
};
use sdcut::model::{build_relaxation, quad_value, BqpProblem, ConstraintSpec, Domain};
use sdcut::oracle::brute_force;
use sdcut::rounding::{
    assignment_round, gaussian_round, gaussian_scores, repeat_rng, threshold, RoundingOptions,
    ThresholdMode,
};
use sdcut::solver::{dual_value_grad, recover_primal, solve_dual};
use sdcut::spectral::{ncut, ratiocut, GraphMatrices};
use sdcut::symlin::{psd_project, ConstraintMatrix, SymmetricOperator};

fn er<T>(r: sdcut::Result<T>, ctx: &str) -> Result<T, String> {
    r.map_err(|e| format!("{ctx}: {e}"))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
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

/// Label agreement up to the global sign flip, in [0, 1].
fn sign_agreement(x: &DVector<f64>, labels: &[f64]) -> f64 {
    let same = x
        .iter()
        .zip(labels)
        .filter(|(a, b)| a.signum() == b.signum())
        .count();
    same.max(labels.len() - same) as f64 / labels.len() as f64
}

/// Criterion 1: dual gradient vs central finite differences on 100
/// randomized instances.
fn gradient_correctness() -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut coords = 0usize;
    for inst in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + inst);
        let n = rng.random_range(10..=20);
        let m = rng.random_range(3..=10);
        let sigma = if inst % 2 == 0 { 1e-2 } else { 1e-3 };
        let a = er(SymmetricOperator::dense(random_symmetric(&mut rng, n)), "objective")?;
        let problem = er(BqpProblem::new(a, Domain::PlusMinusOne), "problem")?;
        let mut cons = Vec::with_capacity(m);
        for j in 0..m {
            match j % 3 {
                0 => cons.push(ConstraintSpec::equality(
                    ConstraintMatrix::DiagUnit(rng.random_range(0..n)),
                    1.0,
                )),
                1 => {
                    let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0f64));
                    cons.push(ConstraintSpec::less_eq(
                        ConstraintMatrix::rank_one(v, 1.0),
                        rng.random_range(0.5..2.0),
                    ));
                }
                _ => {
                    let (a1, b1) = (rng.random_range(0..n), rng.random_range(0..n));
                    cons.push(ConstraintSpec::equality(
                        ConstraintMatrix::EntryPair(a1.min(b1), a1.max(b1)),
                        rng.random_range(-0.5..0.5),
                    ));
                }
            }
        }
        let relax = er(build_relaxation(&problem, cons, sigma), "relaxation")?;
        let u = DVector::from_fn(relax.m(), |k, _| {
            if k < relax.num_equalities {
                rng.random_range(-0.5..0.5f64)
            } else {
                rng.random_range(0.0..0.5f64)
            }
        });
        let (_, grad, _) = er(dual_value_grad(&relax, &u, None), "gradient")?;
        let h = 1e-5;
        for i in 0..relax.m() {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += h;
            dn[i] -= h;
            let (fp, _, _) = er(dual_value_grad(&relax, &up, None), "fd+")?;
            let (fm, _, _) = er(dual_value_grad(&relax, &dn, None), "fd-")?;
            let fd = (fp - fm) / (2.0 * h);
            let rel = (grad[i] - fd).abs() / fd.abs().max(grad[i].abs()).max(1.0);
            worst = worst.max(rel);
            coords += 1;
            if rel > 1e-5 {
                return Err(format!(
                    "instance {inst} coordinate {i}: gradient {} vs finite difference {} \
                     (relative error {rel:.2e} > 1e-5)",
                    grad[i], fd
                ));
            }
        }
    }
    Ok(format!("{coords} coordinates across 100 instances, worst relative error {worst:.1e}"))
}

/// Criterion 2: converged dual bound never exceeds the brute-force optimum.
fn weak_duality() -> Result<String, String> {
    let sizes = [8usize, 10, 12, 14];
    let mut worst_gap = f64::NEG_INFINITY;
    for inst in 0..50u64 {
        let n = sizes[(inst % 4) as usize];
        let w = er(random_graph(n, 0.5, 2_000 + inst), "graph")?;
        let (problem, cons) = er(bisection_problem(&w), "bisection")?;
        let oracle = er(brute_force(&problem, &cons), "oracle")?;
        let relax = er(build_relaxation(&problem, cons, 1e-3), "relaxation")?;
        let sol = er(solve_dual(&relax, &QnOptions::default(), None), "solve")?;
        let gap = sol.bound - oracle.best_value;
        worst_gap = worst_gap.max(gap);
        if gap > 1e-6 {
            return Err(format!(
                "instance {inst} (n={n}): bound {} exceeds oracle {} by {gap:.2e}",
                sol.bound, oracle.best_value
            ));
        }
    }
    Ok(format!("50 instances, worst bound-minus-oracle gap {worst_gap:.2e}"))
}

/// Criterion 3: sweeping sigma downward tightens the bound, shrinks the
/// rank, and costs more iterations, each monotone with ties.
fn sigma_sweep_trends() -> Result<String, String> {
    let w = er(random_graph(200, 0.5, 42), "graph")?;
    let (problem, cons) = er(bisection_problem(&w), "bisection")?;
    let sigmas = [1e-1, 5e-2, 1e-2, 1e-3, 1e-4];
    let mut rows = Vec::new();
    for &sigma in &sigmas {
        let relax = er(build_relaxation(&problem, cons.clone(), sigma), "relaxation")?;
        let sol = er(solve_dual(&relax, &QnOptions::default(), None), "solve")?;
        let x = er(recover_primal(&relax, &sol), "primal")?;
        rows.push((sigma, sol.bound, x.rank, sol.iterations));
    }
    for pair in rows.windows(2) {
        let (s0, b0, r0, i0) = pair[0];
        let (s1, b1, r1, i1) = pair[1];
        if b1 < b0 - 1e-9 {
            return Err(format!("bound decreased from {b0} (sigma {s0}) to {b1} (sigma {s1})"));
        }
        if r1 > r0 {
            return Err(format!("rank increased from {r0} (sigma {s0}) to {r1} (sigma {s1})"));
        }
        if i1 < i0 {
            return Err(format!(
                "iterations decreased from {i0} (sigma {s0}) to {i1} (sigma {s1})"
            ));
        }
    }
    let detail: Vec<String> = rows
        .iter()
        .map(|(s, b, r, i)| format!("sigma {s:.0e}: bound {b:.2}, rank {r}, iters {i}"))
        .collect();
    Ok(detail.join("; "))
}

/// Criterion 4: on the p.s.d. cone the Frobenius norm is dominated by the
/// trace, with equality exactly at rank one.
fn trace_ball_theorem() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4_000);
    let mut worst_slack = 0.0f64;
    let mut worst_eq = 0.0f64;
    for i in 0..1000 {
        let n = 2 + (i % 19);
        let g = random_symmetric(&mut rng, n);
        let mut x = &g * g.transpose();
        let eta = rng.random_range(0.5..20.0);
        let tr = x.trace();
        if tr <= 1e-12 {
            continue;
        }
        x *= eta / tr;
        let slack = x.norm() - eta;
        worst_slack = worst_slack.max(slack);
        if slack > 1e-9 {
            return Err(format!("instance {i}: |X|_F exceeds trace {eta} by {slack:.2e}"));
        }
    }
    for i in 0..1000 {
        let n = 2 + (i % 19);
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0f64));
        if v.norm() <= 1e-9 {
            continue;
        }
        let eta = rng.random_range(0.5..20.0);
        let x = (&v * v.transpose()) * (eta / v.norm_squared());
        let err = (x.norm() - eta).abs();
        worst_eq = worst_eq.max(err);
        if err > 1e-9 {
            return Err(format!("rank-one instance {i}: | |X|_F - eta | = {err:.2e}"));
        }
    }
    Ok(format!(
        "1000 + 1000 matrices; worst inequality slack {worst_slack:.1e}, worst rank-one gap {worst_eq:.1e}"
    ))
}

/// Criterion 5: the p.s.d. part is p.s.d., the remainder n.s.d., the parts
/// orthogonal, and no sampled p.s.d. candidate is Frobenius-closer.
fn projection_suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5_000);
    let mut worst_beat = f64::NEG_INFINITY;
    for i in 0..500 {
        let n = 4 + (i % 13);
        let m = random_symmetric(&mut rng, n);
        let op = er(SymmetricOperator::dense(m.clone()), "matrix")?;
        let plus = er(psd_project(&op), "projection")?;
        let mp = plus.reconstruct();
        let rest = &m - &mp;
        let eig_p = mp.clone().symmetric_eigen();
        let eig_r = rest.clone().symmetric_eigen();
        let min_p = eig_p.eigenvalues.min();
        let max_r = eig_r.eigenvalues.max();
        if min_p < -1e-9 {
            return Err(format!("instance {i}: M+ has eigenvalue {min_p:.2e}"));
        }
        if max_r > 1e-9 {
            return Err(format!("instance {i}: M - M+ has eigenvalue {max_r:.2e}"));
        }
        let cross = mp.dot(&rest);
        if cross.abs() > 1e-8 {
            return Err(format!("instance {i}: <M+, M - M+> = {cross:.2e}"));
        }
        // 200 p.s.d. candidates; none may sit closer to M than M+.
        let base_dist = rest.norm();
        for c in 0..200 {
            let cand = match c % 3 {
                0 => {
                    let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0f64));
                    let t = rng.random_range(0.0..0.5f64);
                    &mp + (&v * v.transpose()) * t
                }
                1 => &mp * rng.random_range(0.0..2.0f64),
                _ => {
                    let g = random_symmetric(&mut rng, n) * 0.2;
                    &mp + &g * g.transpose()
                }
            };
            let beat = base_dist - (&m - &cand).norm();
            worst_beat = worst_beat.max(beat);
            if beat > 1e-10 {
                return Err(format!(
                    "instance {i} candidate {c}: a p.s.d. matrix is {beat:.2e} closer than M+"
                ));
            }
        }
    }
    Ok(format!("500 matrices x 200 candidates; best challenger margin {worst_beat:.1e}"))
}

/// Criterion 6: on both synthetic datasets the solver's rounded cut matches
/// ground truth and is no worse than the spectral baselines.
fn two_cluster_recovery() -> Result<String, String> {
    let mut details = Vec::new();
    for kind in [ClusterKind::DensityImbalance, ClusterKind::WithOutlier] {
        let pc = two_cluster_dataset(kind, 6);
        let labels = pc.labels.clone().expect("generated labels");
        let w = er(rbf_affinity(&pc, 0.25, f64::INFINITY), "affinity")?;
        let g = er(GraphMatrices::new(w.clone()), "graph matrices")?;
        let (problem, cons) = er(bisection_problem(&w), "bisection")?;
        let relax = er(build_relaxation(&problem, cons, 1e-3), "relaxation")?;
        let sol = er(solve_dual(&relax, &QnOptions::default(), None), "solve")?;
        let xfac = er(recover_primal(&relax, &sol), "primal")?;
        let opts = RoundingOptions::new(&problem.a, 60);
        let rounded = er(gaussian_round(&xfac, &opts), "rounding")?;
        let agree = sign_agreement(&rounded.x, &labels);
        if agree < 0.95 {
            return Err(format!("{kind:?}: label agreement {agree:.3} < 0.95"));
        }
        let rc = threshold(&er(ratiocut(&g), "ratiocut")?, ThresholdMode::Median);
        let nc = threshold(&er(ncut(&g), "ncut")?, ThresholdMode::Median);
        let rc_obj = quad_value(&problem.a, &rc);
        let nc_obj = quad_value(&problem.a, &nc);
        if rounded.value > rc_obj + 1e-9 || rounded.value > nc_obj + 1e-9 {
            return Err(format!(
                "{kind:?}: cut {} worse than a spectral baseline (ratiocut {rc_obj}, ncut {nc_obj})",
                rounded.value
            ));
        }
        details.push(format!(
            "{kind:?}: agreement {agree:.3}, cut {:.2} vs ratiocut {rc_obj:.2} / ncut {nc_obj:.2}",
            rounded.value
        ));
    }
    Ok(details.join("; "))
}

/// Synthetic matching task: L uniform targets, K of them rigidly moved and
/// jittered into the source cloud. Returns the instance and the truth map.
fn registration_toy(seed: u64, k: usize, l: usize, noise_frac: f64) -> (RegistrationInstance, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: Vec<DVector<f64>> = (0..l)
        .map(|_| {
            DVector::from_column_slice(&[
                rng.random_range(0.0..10.0f64),
                rng.random_range(0.0..10.0f64),
            ])
        })
        .collect();
    let mut idx: Vec<usize> = (0..l).collect();
    for i in 0..k {
        let j = rng.random_range(i..l);
        idx.swap(i, j);
    }
    let truth = idx[..k].to_vec();
    let target = PointCloud::new(targets.clone(), None).expect("2-d targets");
    let extent = target.max_pairwise_distance();
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (cs, sn) = (theta.cos(), theta.sin());
    let (tx, ty) = (rng.random_range(-2.0..2.0f64), rng.random_range(-2.0..2.0f64));
    let noise = noise_frac * extent;
    let source: Vec<DVector<f64>> = truth
        .iter()
        .map(|&t| {
            let p = &targets[t];
            let gx: f64 = StandardNormal.sample(&mut rng);
            let gy: f64 = StandardNormal.sample(&mut rng);
            DVector::from_column_slice(&[
                cs * p[0] - sn * p[1] + tx + noise * gx,
                sn * p[0] + cs * p[1] + ty + noise * gy,
            ])
        })
        .collect();
    let source = PointCloud::new(source, None).expect("2-d source");
    let inst = registration_instance(source, target, -1.0, None, None).expect("valid instance");
    (inst, truth)
}

fn solve_matching(inst: &RegistrationInstance) -> Result<Vec<usize>, String> {
    let (k, l) = (inst.k(), inst.l());
    let problem = er(
        BqpProblem::new(inst.hhat.clone(), Domain::HomogenizedZeroOne { ones_budget: k }),
        "problem",
    )?;
    let cons = registration_constraints(k, l);
    let relax = er(build_relaxation(&problem, cons, 1e-3), "relaxation")?;
    let opts = QnOptions { pg_tol: 1e-4, max_iters: 600, ..Default::default() };
    let sol = er(solve_dual(&relax, &opts, None), "solve")?;
    let x = er(recover_primal(&relax, &sol), "primal")?;
    let mut quality = vec![0.0; k * l];
    for i in 0..k {
        for j in 0..l {
            quality[i * l + j] = x.entry(0, 1 + i * l + j);
        }
    }
    er(assignment_round(&quality, k, l), "assignment")
}

/// Criterion 7: matching recovery on noisy rigid transforms, pre-validated
/// against exhaustive injection enumeration at desk scale.
fn registration_recovery() -> Result<String, String> {
    // Pre-validation at K=4, L=6: the BQP optimum over all 360 injections
    // is the planted truth, and the pipeline recovers it. The seed picks an
    // unambiguous instance (optimum well separated from the runner-up);
    // near-symmetric target layouts can put a swapped matching within noise
    // of the planted one, which would test the instance, not the pipeline.
    let (small, truth) = registration_toy(76, 4, 6, 0.01);
    let (k, l) = (4usize, 6usize);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut stack: Vec<(usize, u32, Vec<usize>)> = vec![(0, 0, Vec::new())];
    while let Some((i, used, map)) = stack.pop() {
        if i == k {
            let mut x = DVector::zeros(k * l);
            for (s, &t) in map.iter().enumerate() {
                x[s * l + t] = 1.0;
            }
            let value = quad_value(&small.hhat, &lift_matching(&x));
            if best.as_ref().is_none_or(|(v, _)| value < *v) {
                best = Some((value, map.clone()));
            }
            continue;
        }
        for t in 0..l {
            if used >> t & 1 == 0 {
                let mut next = map.clone();
                next.push(t);
                stack.push((i + 1, used | 1 << t, next));
            }
        }
    }
    let (_, enum_best) = best.expect("360 injections enumerated");
    if enum_best != truth {
        return Err(format!(
            "pre-validation: BQP optimum {enum_best:?} is not the planted matching {truth:?}"
        ));
    }
    let small_assign = solve_matching(&small)?;
    let small_hits = small_assign.iter().zip(&truth).filter(|(a, b)| a == b).count();
    if small_hits < 3 {
        return Err(format!(
            "pre-validation: pipeline recovered {small_hits}/4 against the enumerated optimum"
        ));
    }

    let mut total = 0.0;
    let mut per_seed = Vec::new();
    for seed in 0..10u64 {
        let (inst, truth) = registration_toy(7_000 + seed, 15, 30, 0.01);
        let assign = solve_matching(&inst)?;
        let hits = assign.iter().zip(&truth).filter(|(a, b)| a == b).count();
        let acc = hits as f64 / 15.0;
        per_seed.push(format!("{hits}/15"));
        total += acc;
    }
    let avg = total / 10.0;
    if avg < 0.90 {
        return Err(format!("average recovery {avg:.3} < 0.90 ({})", per_seed.join(", ")));
    }
    Ok(format!("average recovery {avg:.3} over 10 seeds ({})", per_seed.join(", ")))
}

fn timed_bisection_solve(n: usize, density: f64, seed: u64) -> Result<f64, String> {
    let w = er(random_graph(n, density, seed), "graph")?;
    let (problem, cons) = er(bisection_problem(&w), "bisection")?;
    let relax = er(build_relaxation(&problem, cons, 1e-3), "relaxation")?;
    let start = Instant::now();
    let sol = er(solve_dual(&relax, &QnOptions::default(), None), "solve")?;
    let secs = start.elapsed().as_secs_f64();
    if !sol.bound.is_finite() {
        return Err(format!("n={n} density={density}: non-finite bound"));
    }
    Ok(secs)
}

/// Criterion 8: wall-clock scaling stays within the cubic-with-slack window
/// and sparser graphs do not solve slower.
fn scaling_sanity() -> Result<String, String> {
    let t600 = timed_bisection_solve(600, 0.2, 88)?;
    if t600 > 120.0 {
        return Err(format!("n=600 solve took {t600:.1}s > 120s"));
    }
    let t200 = timed_bisection_solve(200, 0.5, 88)?;
    let t400 = timed_bisection_solve(400, 0.5, 88)?;
    let ratio = t400 / t200;
    if !(2.0..=27.0).contains(&ratio) {
        return Err(format!(
            "time(400)/time(200) = {t400:.2}/{t200:.2} = {ratio:.1} outside [2, 27]"
        ));
    }
    let t400_sparse = timed_bisection_solve(400, 0.2, 88)?;
    let t400_dense = timed_bisection_solve(400, 0.8, 88)?;
    if t400_sparse > t400_dense {
        return Err(format!(
            "density 0.2 took {t400_sparse:.2}s, density 0.8 took {t400_dense:.2}s"
        ));
    }
    Ok(format!(
        "n=600 in {t600:.1}s; 400/200 ratio {ratio:.1}; density 0.2 vs 0.8 at n=400: \
         {t400_sparse:.2}s <= {t400_dense:.2}s"
    ))
}

/// Criterion 9: rounding is bit-deterministic and its score covariance
/// matches the factorized matrix.
fn rounding_statistics() -> Result<String, String> {
    let basis = DMatrix::from_columns(&[
        DVector::from_column_slice(&[1.0, -1.0, 0.5, -0.5, 0.0, 0.0]).normalize(),
        DVector::from_column_slice(&[0.0, 0.5, -1.0, 1.0, -0.5, 0.5]).normalize(),
    ]);
    let factor = sdcut::symlin::PrimalFactor::from_weighted(vec![3.0, 1.5], basis);
    let x = factor.reconstruct();
    let a = er(
        SymmetricOperator::dense(random_symmetric(&mut ChaCha8Rng::seed_from_u64(9_000), 6)),
        "objective",
    )?;
    let opts = RoundingOptions::new(&a, 99);
    let one = er(gaussian_round(&factor, &opts), "rounding")?;
    let two = er(gaussian_round(&factor, &opts), "rounding rerun")?;
    if one.x != two.x || one.value != two.value || one.best_repeat != two.best_repeat {
        return Err("seeded reruns differ".into());
    }

    let draws = 20_000usize;
    let mut rng = repeat_rng(99, 0);
    let mut cov = DMatrix::zeros(6, 6);
    for _ in 0..draws {
        let z = gaussian_scores(&factor, &mut rng);
        cov.syger(1.0 / draws as f64, &z, &z, 1.0);
    }
    cov.fill_upper_triangle_with_lower_triangle();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for i in 0..6 {
        for j in 0..6 {
            if x[(i, j)].abs() > 0.1 {
                let rel = (cov[(i, j)] - x[(i, j)]).abs() / x[(i, j)].abs();
                worst = worst.max(rel);
                checked += 1;
                if rel > 0.05 {
                    return Err(format!(
                        "covariance[{i},{j}] = {} vs X = {} (relative error {rel:.3})",
                        cov[(i, j)],
                        x[(i, j)]
                    ));
                }
            }
        }
    }
    Ok(format!(
        "reruns bit-identical; covariance on {checked} entries within {worst:.3} of X over {draws} draws"
    ))
}

/// Criterion 10: assignment rounding equals exhaustive search on 200 grids.
fn assignment_exactness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    for grid in 0..200 {
        let k = rng.random_range(1..=5usize);
        let l = rng.random_range(k..=7usize);
        let quality: Vec<f64> = (0..k * l).map(|_| rng.random_range(-1.0..1.0)).collect();
        let assign = er(assignment_round(&quality, k, l), "assignment")?;
        let got: f64 = assign.iter().enumerate().map(|(i, &j)| quality[i * l + j]).sum();

        let mut best = f64::NEG_INFINITY;
        let mut stack: Vec<(usize, u32, f64)> = vec![(0, 0, 0.0)];
        while let Some((i, used, acc)) = stack.pop() {
            if i == k {
                best = best.max(acc);
                continue;
            }
            for j in 0..l {
                if used >> j & 1 == 0 {
                    stack.push((i + 1, used | 1 << j, acc + quality[i * l + j]));
                }
            }
        }
        if got != best {
            return Err(format!(
                "grid {grid} ({k}x{l}): assignment value {got} vs exhaustive optimum {best}"
            ));
        }
    }
    Ok("200 grids, all exactly optimal".into())
}

#[test]
fn acceptance() {
    let criteria: [(usize, &str, fn() -> Result<String, String>); 10] = [
        (1, "gradient correctness", gradient_correctness),
        (2, "weak-duality bound", weak_duality),
        (3, "sigma sweep trends", sigma_sweep_trends),
        (4, "trace-ball theorem", trace_ball_theorem),
        (5, "p.s.d. projection suite", projection_suite),
        (6, "two-cluster recovery", two_cluster_recovery),
        (7, "registration recovery", registration_recovery),
        (8, "scaling sanity", scaling_sanity),
        (9, "rounding determinism and covariance", rounding_statistics),
        (10, "assignment rounding exactness", assignment_exactness),
    ];
    let mut failures = Vec::new();
    for (num, name, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {num} PASS [{secs:.1}s] {name}: {detail}"),
            Err(detail) => {
                println!("criterion {num} FAIL [{secs:.1}s] {name}: {detail}");
                failures.push(num);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

