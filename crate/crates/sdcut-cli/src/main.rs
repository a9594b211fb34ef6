//! Experiment driver for the sdcut solver: builds a problem from files or
//! flags, solves the penalized relaxation, rounds, and writes CSV results.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::CommonArgs;

#[derive(Parser)]
#[command(name = "sdcut", version, about = "Semidefinite relaxation experiments for binary quadratic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Balanced bisection of a weighted graph read from a Matrix Market file
    Bisect {
        /// Affinity matrix (Matrix Market, symmetric, zero diagonal)
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Bisection with partial grouping constraints from annotated vertices
    Segment {
        /// Affinity matrix (Matrix Market, symmetric, zero diagonal)
        #[arg(long)]
        input: PathBuf,
        /// Vertices annotated as foreground, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        foreground: Vec<usize>,
        /// Vertices annotated as background, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        background: Vec<usize>,
        /// Grouping strength in [0, 1]
        #[arg(long, default_value_t = 0.1)]
        kappa: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Discriminative co-segmentation across several images
    Coseg {
        /// Directory holding per-image affinities w*.mtx plus kernel.mtx
        #[arg(long)]
        input: PathBuf,
        /// Weight of the within-image smoothness term
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Kernel regularizer, must be positive
        #[arg(long, default_value_t = 1.0)]
        lambda_k: f64,
        /// Per-image balance cap on |sum of labels|
        #[arg(long)]
        lambda_cap: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Match source points to a subset of target points
    Register {
        /// Source point cloud (CSV, one comma-separated point per row)
        #[arg(long)]
        input: PathBuf,
        /// Target point cloud (CSV), at least as many points as the source
        #[arg(long)]
        target: PathBuf,
        /// Structure weight; negative rewards consistent pairs under the
        /// minimizing solver
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        alpha: f64,
        /// Structure bandwidth; defaults to 0.2 x the target diameter
        #[arg(long)]
        sigma_d: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Bisect one graph under a list of penalty weights, one summary row each
    SweepSigma {
        /// Affinity matrix (Matrix Market, symmetric, zero diagonal)
        #[arg(long)]
        input: PathBuf,
        /// Penalty weights to sweep, comma separated, in run order
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1e-1,5e-2,1e-2,1e-3,1e-4",
            allow_hyphen_values = true
        )]
        sigmas: Vec<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Time bisection solves on random graphs, 5 seeded graphs per cell
    Bench {
        /// Graph sizes, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Edge densities in (0, 1], comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        densities: Vec<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (outputs, out_dir) = match cli.command {
        Command::Bisect { input, common } => {
            let s = common.resolve()?;
            (commands::bisect(&input, &s)?, s.out)
        }
        Command::Segment { input, foreground, background, kappa, common } => {
            let s = common.resolve()?;
            (commands::segment(&input, &foreground, &background, kappa, &s)?, s.out)
        }
        Command::Coseg { input, mu, lambda_k, lambda_cap, common } => {
            let s = common.resolve()?;
            (commands::coseg(&input, mu, lambda_k, lambda_cap, &s)?, s.out)
        }
        Command::Register { input, target, alpha, sigma_d, common } => {
            let s = common.resolve()?;
            (commands::register(&input, &target, alpha, sigma_d, &s)?, s.out)
        }
        Command::SweepSigma { input, sigmas, common } => {
            let s = common.resolve()?;
            (commands::sweep_sigma(&input, &sigmas, &s)?, s.out)
        }
        Command::Bench { sizes, densities, common } => {
            let s = common.resolve()?;
            (commands::bench(&sizes, &densities, &s)?, s.out)
        }
    };
    outputs.flush(&out_dir)
}
