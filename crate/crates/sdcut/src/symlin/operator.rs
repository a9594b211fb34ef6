use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ConstraintMatrix;
use crate::{Error, Result};

/// A real symmetric n-by-n matrix exposed through matrix-vector products.
///
/// The composite form holds `base + sum_i w_i * B_i` without materializing a
/// dense matrix, which is how the dual matrix C(u) = A + sum_i u_i B_i is
/// applied. `ProjectedInverse` covers objectives of the form
/// `scale * P S^-1 P` with `P = I - ee^T/n`, applied through a stored
/// Cholesky factor of S rather than a materialized inverse.
#[derive(Clone, Debug)]
pub enum SymmetricOperator {
    Dense(DMatrix<f64>),
    /// Upper-triangle coordinate storage: each unordered pair appears once
    /// with `i <= j`.
    Sparse {
        n: usize,
        entries: Vec<(usize, usize, f64)>,
    },
    Composite {
        base: Box<SymmetricOperator>,
        terms: Vec<(f64, ConstraintMatrix)>,
    },
    ProjectedInverse {
        n: usize,
        scale: f64,
        chol: Cholesky<f64, Dyn>,
    },
}

impl SymmetricOperator {
    /// Wraps a dense matrix, enforcing symmetry.
    ///
    /// Asymmetry beyond `1e-12` relative to the largest entry is rejected;
    /// smaller floating-point asymmetry is symmetrized away.
    pub fn dense(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension {
                context: "SymmetricOperator::dense",
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let scale = m.amax().max(1.0);
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        let sym = 0.5 * (&m + m.transpose());
        Ok(SymmetricOperator::Dense(sym))
    }

    /// Builds a sparse symmetric operator from coordinate entries.
    ///
    /// Entries may come in any (i, j) order; each is folded into the upper
    /// triangle and duplicates are summed.
    pub fn sparse(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut folded: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::Dimension {
                    context: "SymmetricOperator::sparse",
                    expected: n,
                    got: i.max(j) + 1,
                });
            }
            folded.push((i.min(j), i.max(j), v));
        }
        folded.sort_unstable_by_key(|&(i, j, _)| (i, j));
        folded.dedup_by(|next, prev| {
            if next.0 == prev.0 && next.1 == prev.1 {
                prev.2 += next.2;
                true
            } else {
                false
            }
        });
        Ok(SymmetricOperator::Sparse { n, entries: folded })
    }

    /// Builds `base + sum_i w_i * B_i`.
    pub fn composite(base: SymmetricOperator, terms: Vec<(f64, ConstraintMatrix)>) -> Result<Self> {
        let n = base.n();
        for (_, b) in &terms {
            b.check_dim(n)?;
        }
        Ok(SymmetricOperator::Composite {
            base: Box::new(base),
            terms,
        })
    }

    /// Builds `scale * P S^-1 P` with `P = I - ee^T/n`, factoring S once.
    ///
    /// Fails when S has no Cholesky factorization (not positive definite).
    pub fn projected_inverse(scale: f64, s: DMatrix<f64>) -> Result<Self> {
        let n = s.nrows();
        if n != s.ncols() {
            return Err(Error::Dimension {
                context: "SymmetricOperator::projected_inverse",
                expected: n,
                got: s.ncols(),
            });
        }
        let chol = Cholesky::new(s).ok_or_else(|| {
            Error::InvalidArgument("shifted kernel is not positive definite".into())
        })?;
        Ok(SymmetricOperator::ProjectedInverse { n, scale, chol })
    }

    /// Zero operator of dimension n.
    pub fn zeros(n: usize) -> Self {
        SymmetricOperator::Sparse {
            n,
            entries: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            SymmetricOperator::Dense(m) => m.nrows(),
            SymmetricOperator::Sparse { n, .. } => *n,
            SymmetricOperator::Composite { base, .. } => base.n(),
            SymmetricOperator::ProjectedInverse { n, .. } => *n,
        }
    }

    /// Applies the operator: `out = M v`.
    pub fn matvec(&self, v: &DVector<f64>) -> DVector<f64> {
        assert_eq!(v.len(), self.n(), "matvec dimension mismatch");
        match self {
            SymmetricOperator::Dense(m) => m * v,
            SymmetricOperator::Sparse { n, entries } => {
                let mut out = DVector::zeros(*n);
                for &(i, j, w) in entries {
                    out[i] += w * v[j];
                    if i != j {
                        out[j] += w * v[i];
                    }
                }
                out
            }
            SymmetricOperator::Composite { base, terms } => {
                let mut out = base.matvec(v);
                for (w, b) in terms {
                    b.add_matvec(*w, v, &mut out);
                }
                out
            }
            SymmetricOperator::ProjectedInverse { n, scale, chol } => {
                let pv = project_centered(v, *n);
                let y = chol.solve(&pv);
                let mut out = project_centered(&y, *n);
                out *= *scale;
                out
            }
        }
    }

    /// Materializes the operator as a dense symmetric matrix.
    ///
    /// For `ProjectedInverse` this solves n right-hand sides against the
    /// stored factor; it is intended for the dense eigendecomposition path
    /// and for tests, not for large n.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SymmetricOperator::Dense(m) => m.clone(),
            SymmetricOperator::Sparse { n, entries } => {
                let mut m = DMatrix::zeros(*n, *n);
                for &(i, j, w) in entries {
                    m[(i, j)] += w;
                    if i != j {
                        m[(j, i)] += w;
                    }
                }
                m
            }
            SymmetricOperator::Composite { base, terms } => {
                let mut m = base.to_dense();
                for (w, b) in terms {
                    b.add_to_dense(*w, &mut m);
                }
                m
            }
            SymmetricOperator::ProjectedInverse { n, scale, chol } => {
                // P S^-1 P, built column-by-column from solves on P's columns.
                let nn = *n;
                let mut p = DMatrix::from_element(nn, nn, -1.0 / nn as f64);
                for i in 0..nn {
                    p[(i, i)] += 1.0;
                }
                let x = chol.solve(&p);
                let mut m = &p * x;
                m *= *scale;
                // Symmetric by construction up to rounding.
                let sym = 0.5 * (&m + m.transpose());
                sym
            }
        }
    }

    /// Returns `-M` in the same storage form.
    pub fn negated(&self) -> SymmetricOperator {
        match self {
            SymmetricOperator::Dense(m) => SymmetricOperator::Dense(-m),
            SymmetricOperator::Sparse { n, entries } => SymmetricOperator::Sparse {
                n: *n,
                entries: entries.iter().map(|&(i, j, v)| (i, j, -v)).collect(),
            },
            SymmetricOperator::Composite { base, terms } => SymmetricOperator::Composite {
                base: Box::new(base.negated()),
                terms: terms.iter().map(|(w, b)| (-w, b.clone())).collect(),
            },
            SymmetricOperator::ProjectedInverse { n, scale, chol } => {
                SymmetricOperator::ProjectedInverse {
                    n: *n,
                    scale: -scale,
                    chol: chol.clone(),
                }
            }
        }
    }

    /// Estimates the spectral norm with 20 power iterations from a fixed
    /// seeded Gaussian start, so the result is a pure function of the matrix.
    pub fn norm_est(&self) -> f64 {
        let n = self.n();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f726d);
        let mut v = DVector::from_fn(n, |_, _| normal_sample(&mut rng));
        let mut norm = v.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v /= norm;
        let mut est = 0.0;
        for _ in 0..20 {
            v = self.matvec(&v);
            norm = v.norm();
            if norm <= 1e-300 {
                return 0.0;
            }
            est = norm;
            v /= norm;
        }
        est
    }
}

/// `P v` with `P = I - ee^T/n`.
fn project_centered(v: &DVector<f64>, n: usize) -> DVector<f64> {
    let mean = v.sum() / n as f64;
    v.map(|x| x - mean)
}

/// Standard normal via Box-Muller; avoids pulling a distributions dependency
/// into this module for one internal start vector.
fn normal_sample<R: RngExt>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
