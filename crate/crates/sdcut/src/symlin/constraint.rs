use nalgebra::{DMatrix, DVector};

use super::EigenFactor;
use crate::{Error, Result};

/// A structure-tagged symmetric constraint matrix B, supporting matvecs,
/// Frobenius inner products with low-rank factorizations, and quadratic
/// forms, each in time proportional to the tag's nonzero structure.
#[derive(Clone, Debug)]
pub enum ConstraintMatrix {
    /// `e_i e_i^T`.
    DiagUnit(usize),
    /// Diagonal matrix with the given diagonal.
    Diag(DVector<f64>),
    /// `s * v v^T`.
    RankOne { v: DVector<f64>, s: f64 },
    /// `(E_ij + E_ji) / 2` for `i != j`; `E_ii` for `i == j`.
    EntryPair(usize, usize),
    /// `2 E_ii - (E_0i + E_i0)`: ties the i-th diagonal entry to the first
    /// row, the homogenized 0/1 consistency pattern. Requires `i >= 1`.
    RowLink(usize),
    /// General symmetric sparse: upper-triangle entries, `i <= j`.
    Sparse {
        n: usize,
        entries: Vec<(usize, usize, f64)>,
    },
}

impl ConstraintMatrix {
    pub fn rank_one(v: DVector<f64>, s: f64) -> Self {
        ConstraintMatrix::RankOne { v, s }
    }

    /// Validates the tag against an ambient dimension n.
    pub fn check_dim(&self, n: usize) -> Result<()> {
        let fits = match self {
            ConstraintMatrix::DiagUnit(i) => *i < n,
            ConstraintMatrix::Diag(d) => d.len() == n,
            ConstraintMatrix::RankOne { v, .. } => v.len() == n,
            ConstraintMatrix::EntryPair(i, j) => *i < n && *j < n,
            ConstraintMatrix::RowLink(i) => *i >= 1 && *i < n,
            ConstraintMatrix::Sparse { n: bn, entries } => {
                *bn == n && entries.iter().all(|&(i, j, _)| i <= j && j < n)
            }
        };
        if fits {
            Ok(())
        } else {
            Err(Error::Dimension {
                context: "ConstraintMatrix::check_dim",
                expected: n,
                got: self.min_dim(),
            })
        }
    }

    /// Smallest ambient dimension this tag fits in.
    fn min_dim(&self) -> usize {
        match self {
            ConstraintMatrix::DiagUnit(i) => i + 1,
            ConstraintMatrix::Diag(d) => d.len(),
            ConstraintMatrix::RankOne { v, .. } => v.len(),
            ConstraintMatrix::EntryPair(i, j) => i.max(j) + 1,
            ConstraintMatrix::RowLink(i) => i + 1,
            ConstraintMatrix::Sparse { n, .. } => *n,
        }
    }

    /// Accumulates `out += w * B v`.
    pub fn add_matvec(&self, w: f64, v: &DVector<f64>, out: &mut DVector<f64>) {
        match self {
            ConstraintMatrix::DiagUnit(i) => out[*i] += w * v[*i],
            ConstraintMatrix::Diag(d) => {
                for k in 0..d.len() {
                    out[k] += w * d[k] * v[k];
                }
            }
            ConstraintMatrix::RankOne { v: b, s } => {
                let c = w * s * b.dot(v);
                out.axpy(c, b, 1.0);
            }
            ConstraintMatrix::EntryPair(i, j) => {
                if i == j {
                    out[*i] += w * v[*i];
                } else {
                    out[*i] += 0.5 * w * v[*j];
                    out[*j] += 0.5 * w * v[*i];
                }
            }
            ConstraintMatrix::RowLink(i) => {
                out[*i] += w * (2.0 * v[*i] - v[0]);
                out[0] -= w * v[*i];
            }
            ConstraintMatrix::Sparse { entries, .. } => {
                for &(i, j, b) in entries {
                    out[i] += w * b * v[j];
                    if i != j {
                        out[j] += w * b * v[i];
                    }
                }
            }
        }
    }

    /// Accumulates `m += w * B` into a dense matrix.
    pub fn add_to_dense(&self, w: f64, m: &mut DMatrix<f64>) {
        match self {
            ConstraintMatrix::DiagUnit(i) => m[(*i, *i)] += w,
            ConstraintMatrix::Diag(d) => {
                for k in 0..d.len() {
                    m[(k, k)] += w * d[k];
                }
            }
            ConstraintMatrix::RankOne { v, s } => {
                let n = v.len();
                for i in 0..n {
                    if v[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        m[(i, j)] += w * s * v[i] * v[j];
                    }
                }
            }
            ConstraintMatrix::EntryPair(i, j) => {
                if i == j {
                    m[(*i, *i)] += w;
                } else {
                    m[(*i, *j)] += 0.5 * w;
                    m[(*j, *i)] += 0.5 * w;
                }
            }
            ConstraintMatrix::RowLink(i) => {
                m[(*i, *i)] += 2.0 * w;
                m[(0, *i)] -= w;
                m[(*i, 0)] -= w;
            }
            ConstraintMatrix::Sparse { entries, .. } => {
                for &(i, j, b) in entries {
                    m[(i, j)] += w * b;
                    if i != j {
                        m[(j, i)] += w * b;
                    }
                }
            }
        }
    }

    /// `<B, sum_k lambda_k p_k p_k^T>` for a weighted rank-one sum given as a
    /// weight slice and a column basis.
    pub fn inner_factors(&self, weights: &[f64], basis: &DMatrix<f64>) -> f64 {
        debug_assert_eq!(weights.len(), basis.ncols());
        match self {
            ConstraintMatrix::DiagUnit(i) => {
                let mut acc = 0.0;
                for (k, &lam) in weights.iter().enumerate() {
                    let p = basis[(*i, k)];
                    acc += lam * p * p;
                }
                acc
            }
            ConstraintMatrix::Diag(d) => {
                let mut acc = 0.0;
                for (k, &lam) in weights.iter().enumerate() {
                    let mut dot = 0.0;
                    for r in 0..d.len() {
                        let p = basis[(r, k)];
                        dot += d[r] * p * p;
                    }
                    acc += lam * dot;
                }
                acc
            }
            ConstraintMatrix::RankOne { v, s } => {
                let mut acc = 0.0;
                for (k, &lam) in weights.iter().enumerate() {
                    let dot = basis.column(k).dot(v);
                    acc += lam * dot * dot;
                }
                s * acc
            }
            ConstraintMatrix::EntryPair(i, j) => {
                let mut acc = 0.0;
                for (k, &lam) in weights.iter().enumerate() {
                    acc += lam * basis[(*i, k)] * basis[(*j, k)];
                }
                acc
            }
            ConstraintMatrix::RowLink(i) => {
                let mut acc = 0.0;
                for (k, &lam) in weights.iter().enumerate() {
                    let pi = basis[(*i, k)];
                    acc += lam * (2.0 * pi * pi - 2.0 * basis[(0, k)] * pi);
                }
                acc
            }
            ConstraintMatrix::Sparse { entries, .. } => {
                let mut acc = 0.0;
                for &(i, j, b) in entries {
                    let scale = if i == j { 1.0 } else { 2.0 };
                    let mut x_ij = 0.0;
                    for (k, &lam) in weights.iter().enumerate() {
                        x_ij += lam * basis[(i, k)] * basis[(j, k)];
                    }
                    acc += scale * b * x_ij;
                }
                acc
            }
        }
    }

    /// Quadratic form `x^T B x = <x x^T, B>`.
    pub fn quad_form(&self, x: &DVector<f64>) -> f64 {
        match self {
            ConstraintMatrix::DiagUnit(i) => x[*i] * x[*i],
            ConstraintMatrix::Diag(d) => {
                let mut acc = 0.0;
                for k in 0..d.len() {
                    acc += d[k] * x[k] * x[k];
                }
                acc
            }
            ConstraintMatrix::RankOne { v, s } => {
                let dot = v.dot(x);
                s * dot * dot
            }
            ConstraintMatrix::EntryPair(i, j) => {
                if i == j {
                    x[*i] * x[*i]
                } else {
                    x[*i] * x[*j]
                }
            }
            ConstraintMatrix::RowLink(i) => 2.0 * x[*i] * x[*i] - 2.0 * x[0] * x[*i],
            ConstraintMatrix::Sparse { entries, .. } => {
                let mut acc = 0.0;
                for &(i, j, b) in entries {
                    let scale = if i == j { 1.0 } else { 2.0 };
                    acc += scale * b * x[i] * x[j];
                }
                acc
            }
        }
    }

    /// Returns a tag representing `-B`, used to fold `>=` constraints into
    /// the canonical `<=` form. `n` is the ambient dimension, needed by tags
    /// that do not carry one.
    pub fn negated(&self, n: usize) -> ConstraintMatrix {
        match self {
            ConstraintMatrix::DiagUnit(i) => {
                let mut d = DVector::zeros(n);
                d[*i] = -1.0;
                ConstraintMatrix::Diag(d)
            }
            ConstraintMatrix::Diag(d) => ConstraintMatrix::Diag(-d),
            ConstraintMatrix::RankOne { v, s } => ConstraintMatrix::RankOne {
                v: v.clone(),
                s: -s,
            },
            ConstraintMatrix::EntryPair(i, j) => {
                let (a, b) = (*i.min(j), *i.max(j));
                let val = if a == b { -1.0 } else { -0.5 };
                ConstraintMatrix::Sparse {
                    n,
                    entries: vec![(a, b, val)],
                }
            }
            ConstraintMatrix::RowLink(i) => ConstraintMatrix::Sparse {
                n,
                entries: vec![(0, *i, 1.0), (*i, *i, -2.0)],
            },
            ConstraintMatrix::Sparse { n, entries } => ConstraintMatrix::Sparse {
                n: *n,
                entries: entries.iter().map(|&(i, j, v)| (i, j, -v)).collect(),
            },
        }
    }

    /// Materializes the tag as a dense matrix (tests and small-n paths).
    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        self.add_to_dense(1.0, &mut m);
        m
    }
}

/// `<B, sum_k lambda_k p_k p_k^T>` evaluated against an eigen-factorization.
pub fn inner_lowrank(b: &ConstraintMatrix, f: &EigenFactor) -> Result<f64> {
    b.check_dim(f.n())?;
    Ok(b.inner_factors(&f.eigenvalues, &f.vectors))
}
