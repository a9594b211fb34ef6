//! The six experiment commands. Each builds a problem, runs the solve and
//! round pipeline, and returns buffered output files; nothing touches disk
//! until the whole run has succeeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};

use sdcut::builders::{
    bisection_problem, coseg_objective, indicator, lift_matching, random_graph,
    registration_constraints, registration_instance, segmentation_constraints, smoothing_matrix,
    validate_affinity, CosegInputs, PartialGroups, PointCloud,
};
use sdcut::mmio;
use sdcut::model::{build_relaxation, quad_value, BqpProblem, ConstraintSpec, Domain, Relaxation};
use sdcut::nalgebra::DVector;
use sdcut::rounding::{assignment_round, gaussian_round, RoundingOptions};
use sdcut::solver::{recover_primal, solve_dual, DualSolution, TraceRow};
use sdcut::spectral::GraphMatrices;
use sdcut::symlin::{PrimalFactor, SymmetricOperator};

use crate::config::{warn_sigma, Settings};

pub const SUMMARY_HEADER: &str =
    "n,m,sigma,bound,primal_objective,rounded_objective,rank,fro_norm,iterations,eig_calls,wall_seconds";

const BENCH_HEADER: &str = "n,density,graphs,avg_eig_calls,avg_iterations,avg_wall_seconds";
const GRAPHS_PER_CELL: usize = 5;

/// Result files, buffered in memory until the run is known good.
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new() -> Self {
        Outputs { files: Vec::new() }
    }

    fn add(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    pub fn flush(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        for (name, content) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, content)
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        Ok(())
    }
}

struct Solved {
    relax: Relaxation,
    sol: DualSolution,
    x: PrimalFactor,
    wall_seconds: f64,
}

/// Build, solve, and recover; wall time covers the solve and recovery.
fn solve_problem(
    problem: &BqpProblem,
    cons: Vec<ConstraintSpec>,
    sigma: f64,
    s: &Settings,
) -> anyhow::Result<Solved> {
    let relax = build_relaxation(problem, cons, sigma)?;
    let start = Instant::now();
    let sol = solve_dual(&relax, &s.qn, None)?;
    let x = recover_primal(&relax, &sol)?;
    Ok(Solved { relax, sol, x, wall_seconds: start.elapsed().as_secs_f64() })
}

fn summary_row(run: &Solved, rounded_objective: f64) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        run.relax.n(),
        run.relax.m(),
        run.relax.sigma,
        run.sol.bound,
        run.x.objective.unwrap_or(f64::NAN),
        rounded_objective,
        run.x.rank,
        run.x.fro_norm,
        run.sol.iterations,
        run.sol.eig_calls,
        run.wall_seconds,
    )
}

fn trace_csv(trace: &[TraceRow]) -> String {
    let mut text = String::from(TraceRow::CSV_HEADER);
    text.push('\n');
    for row in trace {
        text.push_str(&row.to_csv_row());
        text.push('\n');
    }
    text
}

fn signs_text(x: &DVector<f64>) -> String {
    let mut text = String::new();
    for v in x.iter() {
        let _ = writeln!(text, "{}", if *v >= 0.0 { 1 } else { -1 });
    }
    text
}

/// Shared tail for the sign-valued commands: solve, Gaussian-round, report.
fn run_binary(
    problem: &BqpProblem,
    cons: Vec<ConstraintSpec>,
    s: &Settings,
) -> anyhow::Result<Outputs> {
    let run = solve_problem(problem, cons, s.sigma, s)?;
    let opts = RoundingOptions {
        objective: &problem.a,
        repeats: s.repeats,
        threshold: s.threshold,
        seed: s.seed,
    };
    let rounded = gaussian_round(&run.x, &opts)?;
    let mut out = Outputs::new();
    out.add("summary.csv", format!("{SUMMARY_HEADER}\n{}\n", summary_row(&run, rounded.value)));
    out.add("trace.csv", trace_csv(&run.sol.trace));
    out.add("solution.txt", signs_text(&rounded.x));
    Ok(out)
}

fn read_affinity(path: &Path) -> anyhow::Result<SymmetricOperator> {
    let w = mmio::read_matrix(path)
        .with_context(|| format!("reading affinity matrix {}", path.display()))?;
    validate_affinity(&w)?;
    Ok(w)
}

pub fn bisect(input: &Path, s: &Settings) -> anyhow::Result<Outputs> {
    let w = read_affinity(input)?;
    let (problem, cons) = bisection_problem(&w)?;
    run_binary(&problem, cons, s)
}

pub fn segment(
    input: &Path,
    foreground: &[usize],
    background: &[usize],
    kappa: f64,
    s: &Settings,
) -> anyhow::Result<Outputs> {
    let w = read_affinity(input)?;
    let g = GraphMatrices::new(w.clone())?;
    let (problem, mut cons) = bisection_problem(&w)?;
    let t_f = indicator(g.n(), foreground)?;
    let t_b = indicator(g.n(), background)?;
    let groups = PartialGroups::new(t_f, t_b, kappa, smoothing_matrix(&g))?;
    cons.extend(segmentation_constraints(&groups));
    run_binary(&problem, cons, s)
}

/// Per-image affinity blocks are the `w*.mtx` files of the input directory
/// in name order; the discriminative kernel is `kernel.mtx`.
pub fn coseg(
    dir: &Path,
    mu: f64,
    lambda_k: f64,
    lambda_cap: f64,
    s: &Settings,
) -> anyhow::Result<Outputs> {
    let mut block_paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading input directory {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|f| f.to_str())
                .is_some_and(|f| f.starts_with('w') && f.ends_with(".mtx"))
        })
        .collect();
    block_paths.sort();
    if block_paths.is_empty() {
        bail!("no per-image affinity files (w*.mtx) in {}", dir.display());
    }
    let mut w_blocks = Vec::with_capacity(block_paths.len());
    for path in &block_paths {
        let w = mmio::read_matrix(path)
            .with_context(|| format!("reading affinity block {}", path.display()))?;
        w_blocks.push(w.to_dense());
    }
    let kernel_path = dir.join("kernel.mtx");
    let k_kernel = mmio::read_matrix(&kernel_path)
        .with_context(|| format!("reading kernel {}", kernel_path.display()))?
        .to_dense();
    let inputs = CosegInputs { w_blocks, k_kernel, mu, lambda_k, lambda_cap };
    let (a, cons) = coseg_objective(&inputs)?;
    let problem = BqpProblem::new(a, Domain::PlusMinusOne)?;
    run_binary(&problem, cons, s)
}

pub fn register(
    source: &Path,
    target: &Path,
    alpha: f64,
    sigma_d: Option<f64>,
    s: &Settings,
) -> anyhow::Result<Outputs> {
    let src_points = mmio::read_points(source)
        .with_context(|| format!("reading source points {}", source.display()))?;
    let tgt_points = mmio::read_points(target)
        .with_context(|| format!("reading target points {}", target.display()))?;
    let src = PointCloud::new(src_points, None)?;
    let tgt = PointCloud::new(tgt_points, None)?;
    let inst = registration_instance(src, tgt, alpha, sigma_d, None)?;
    let (k, l) = (inst.k(), inst.l());
    let problem = BqpProblem::new(inst.hhat.clone(), Domain::HomogenizedZeroOne { ones_budget: k })?;
    let cons = registration_constraints(k, l);
    let run = solve_problem(&problem, cons, s.sigma, s)?;

    let mut quality = vec![0.0; k * l];
    for i in 0..k {
        for j in 0..l {
            quality[i * l + j] = run.x.entry(0, 1 + i * l + j);
        }
    }
    let assign = assignment_round(&quality, k, l)?;
    let mut selected = DVector::zeros(k * l);
    for (i, &j) in assign.iter().enumerate() {
        selected[i * l + j] = 1.0;
    }
    let rounded_objective = quad_value(&inst.hhat, &lift_matching(&selected));

    let mut matching = String::from("source,target\n");
    for (i, &j) in assign.iter().enumerate() {
        let _ = writeln!(matching, "{i},{j}");
    }
    let mut selection = String::new();
    for v in selected.iter() {
        let _ = writeln!(selection, "{}", *v as i64);
    }
    let mut out = Outputs::new();
    out.add("summary.csv", format!("{SUMMARY_HEADER}\n{}\n", summary_row(&run, rounded_objective)));
    out.add("trace.csv", trace_csv(&run.sol.trace));
    out.add("matching.csv", matching);
    out.add("solution.txt", selection);
    Ok(out)
}

pub fn sweep_sigma(input: &Path, sigmas: &[f64], s: &Settings) -> anyhow::Result<Outputs> {
    if sigmas.is_empty() {
        bail!("sweep needs at least one sigma");
    }
    let w = read_affinity(input)?;
    let mut rows = vec![SUMMARY_HEADER.to_string()];
    let mut out = Outputs::new();
    for (idx, &sigma) in sigmas.iter().enumerate() {
        if !(sigma > 0.0 && sigma.is_finite()) {
            bail!("sigma must be a positive finite number, got {sigma}");
        }
        warn_sigma(sigma);
        let (problem, cons) = bisection_problem(&w)?;
        let run = solve_problem(&problem, cons, sigma, s)?;
        let opts = RoundingOptions {
            objective: &problem.a,
            repeats: s.repeats,
            threshold: s.threshold,
            seed: s.seed,
        };
        let rounded = gaussian_round(&run.x, &opts)?;
        rows.push(summary_row(&run, rounded.value));
        out.add(&format!("trace-{idx}.csv"), trace_csv(&run.sol.trace));
    }
    out.add("summary.csv", rows.join("\n") + "\n");
    Ok(out)
}

/// Graph seeds derive from the master seed as
/// `seed + cell_index * 5 + repeat`, cells enumerated sizes-major.
pub fn bench(sizes: &[usize], densities: &[f64], s: &Settings) -> anyhow::Result<Outputs> {
    if sizes.is_empty() || densities.is_empty() {
        bail!("bench needs at least one size and one density");
    }
    let mut rows = vec![BENCH_HEADER.to_string()];
    for (si, &n) in sizes.iter().enumerate() {
        for (di, &density) in densities.iter().enumerate() {
            let cell = si * densities.len() + di;
            let (mut eig_calls, mut iterations, mut wall) = (0usize, 0usize, 0.0f64);
            for rep in 0..GRAPHS_PER_CELL {
                let graph_seed = s.seed + (cell * GRAPHS_PER_CELL + rep) as u64;
                let w = random_graph(n, density, graph_seed)?;
                let (problem, cons) = bisection_problem(&w)?;
                let run = solve_problem(&problem, cons, s.sigma, s)?;
                eig_calls += run.sol.eig_calls;
                iterations += run.sol.iterations;
                wall += run.wall_seconds;
            }
            let g = GRAPHS_PER_CELL as f64;
            rows.push(format!(
                "{n},{density},{GRAPHS_PER_CELL},{},{},{}",
                eig_calls as f64 / g,
                iterations as f64 / g,
                wall / g,
            ));
        }
    }
    let mut out = Outputs::new();
    out.add("bench.csv", rows.join("\n") + "\n");
    Ok(out)
}
