use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge within the iteration cap (residual {residual:.3e})")]
    EigNonConvergence { residual: f64 },

    #[error(
        "iterative eigensolver stagnated at residual {residual:.3e} for n = {n}; \
         a dense solve (EigOptions::dense_threshold >= {n}) is the fallback"
    )]
    EigStagnation { residual: f64, n: usize },

    #[error("objective returned a non-finite value at iteration {iteration}")]
    NonFiniteObjective {
        iteration: usize,
        /// Last iterate with a finite objective, retained for diagnosis.
        last_u: Vec<f64>,
        last_f: f64,
    },

    #[error("graph is disconnected (second Laplacian eigenvalue {lambda2:.3e} <= {threshold:.3e})")]
    Disconnected { lambda2: f64, threshold: f64 },

    #[error("vertex {0} has zero degree")]
    ZeroDegree(usize),

    #[error("no feasible binary vector under the supplied constraints")]
    EmptyFeasible,

    #[error("brute force is capped at n = 22, got n = {0}")]
    OracleCap(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
