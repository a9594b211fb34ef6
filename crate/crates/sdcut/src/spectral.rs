//! Spectral baselines: the norm-ball relaxation of the binary quadratic
//! objective, and the RatioCut / NCut bisection score vectors.

use nalgebra::{DMatrix, DVector};

use crate::symlin::{eig_full, SymmetricOperator};
use crate::{Error, Result};

/// Affinity graph with its derived matrices: degrees, Laplacian L = D - W,
/// normalized Laplacian D^{-1/2} L D^{-1/2}, and c = D^{1/2} e.
///
/// Construction validates nonnegative weights, a zero diagonal, and strictly
/// positive degrees (an isolated vertex has no normalized form and makes the
/// graph disconnected anyway).
#[derive(Clone, Debug)]
pub struct GraphMatrices {
    pub w: SymmetricOperator,
    pub degrees: DVector<f64>,
    pub laplacian: DMatrix<f64>,
    pub normalized_laplacian: DMatrix<f64>,
    /// D^{1/2} e, the vector NCut scores are orthogonal to.
    pub c: DVector<f64>,
}

impl GraphMatrices {
    pub fn new(w: SymmetricOperator) -> Result<Self> {
        let n = w.n();
        if n < 2 {
            return Err(Error::InvalidArgument(
                "a graph needs at least two vertices".into(),
            ));
        }
        let dense = w.to_dense();
        for i in 0..n {
            if dense[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "affinity diagonal must be zero, W[{i},{i}] = {}",
                    dense[(i, i)]
                )));
            }
            for j in 0..n {
                if dense[(i, j)] < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "affinity weights must be nonnegative, W[{i},{j}] = {}",
                        dense[(i, j)]
                    )));
                }
            }
        }
        let degrees = DVector::from_iterator(n, dense.row_iter().map(|r| r.sum()));
        if let Some(i) = degrees.iter().position(|d| *d <= 0.0) {
            return Err(Error::ZeroDegree(i));
        }
        let mut laplacian = -&dense;
        for i in 0..n {
            laplacian[(i, i)] = degrees[i];
        }
        let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
        let normalized_laplacian =
            DMatrix::from_fn(n, n, |i, j| laplacian[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
        let c = DVector::from_iterator(n, degrees.iter().map(|d| d.sqrt()));
        Ok(GraphMatrices {
            w,
            degrees,
            laplacian,
            normalized_laplacian,
            c,
        })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }
}

/// Minimizes x^T A x over the ball |x|^2 = n_budget: the scaled eigenvector
/// of A's smallest eigenvalue, with objective n_budget * lambda_min.
pub fn spectral_relax(a: &SymmetricOperator, n_budget: f64) -> Result<(DVector<f64>, f64)> {
    if !(n_budget > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "norm budget must be positive, got {n_budget}"
        )));
    }
    let eig = eig_full(a)?;
    let lambda_min = eig.eigenvalues[0];
    let mut x = eig.vectors.column(0).clone_owned() * n_budget.sqrt();
    normalize_sign(&mut x);
    Ok((x, n_budget * lambda_min))
}

/// RatioCut score vector: sqrt(n) times the unit eigenvector of the second
/// smallest Laplacian eigenvalue. Errors when the graph is disconnected
/// (lambda_2 at numerical zero).
pub fn ratiocut(g: &GraphMatrices) -> Result<DVector<f64>> {
    second_eigenvector(&g.laplacian)
}

/// NCut score vector: as `ratiocut` on the normalized Laplacian. The result
/// is orthogonal to c = D^{1/2} e.
pub fn ncut(g: &GraphMatrices) -> Result<DVector<f64>> {
    second_eigenvector(&g.normalized_laplacian)
}

fn second_eigenvector(l: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = l.nrows();
    let op = SymmetricOperator::dense(l.clone())?;
    let eig = eig_full(&op)?;
    let lambda2 = eig.eigenvalues[1];
    let lambda_max = *eig.eigenvalues.last().expect("n >= 2");
    let threshold = 1e-10 * lambda_max;
    if lambda2 <= threshold {
        return Err(Error::Disconnected { lambda2, threshold });
    }
    let mut x = eig.vectors.column(1).clone_owned() * (n as f64).sqrt();
    normalize_sign(&mut x);
    Ok(x)
}

/// Flips the vector so its first nonzero coordinate is positive; fixes the
/// eigenvector sign ambiguity deterministically.
pub fn normalize_sign(x: &mut DVector<f64>) {
    if let Some(first) = x.iter().find(|v| **v != 0.0) {
        if *first < 0.0 {
            *x = -&*x;
        }
    }
}
