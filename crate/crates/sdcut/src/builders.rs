//! Application-level problem construction: graph bisection, partial-group
//! segmentation, discriminative co-segmentation, point-set registration, and
//! synthetic data generators for all of them.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{BqpProblem, ConstraintSpec, Domain};
use crate::spectral::GraphMatrices;
use crate::symlin::{ConstraintMatrix, SymmetricOperator};
use crate::{Error, Result};

/// A set of 2-d or 3-d points, optionally with a ground-truth partition.
#[derive(Clone, Debug)]
pub struct PointCloud {
    pub points: Vec<DVector<f64>>,
    /// Ground-truth side of each point, +-1, when known.
    pub labels: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<DVector<f64>>, labels: Option<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidArgument(format!(
                "points must be 2-d or 3-d, got dimension {dim}"
            )));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidArgument("points have mixed dimensions".into()));
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(Error::Dimension {
                    context: "point labels",
                    expected: points.len(),
                    got: l.len(),
                });
            }
        }
        Ok(PointCloud { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (&self.points[i] - &self.points[j]).norm()
    }

    pub fn max_pairwise_distance(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }
}

/// Radial-basis affinity: W_ij = exp(-d(i,j)^2 / gamma^2) when d(i,j) <
/// radius, else 0, with gamma = gamma_frac times the maximum pairwise
/// distance. Coincident points get weight 1. The diagonal stays zero.
pub fn rbf_affinity(pc: &PointCloud, gamma_frac: f64, radius: f64) -> Result<SymmetricOperator> {
    let n = pc.len();
    if n < 2 {
        return Err(Error::InvalidArgument("affinity needs at least two points".into()));
    }
    if !(gamma_frac > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma fraction must be positive, got {gamma_frac}"
        )));
    }
    let gamma = gamma_frac * pc.max_pairwise_distance();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pc.distance(i, j);
            if d >= radius {
                continue;
            }
            let w = if d == 0.0 { 1.0 } else { (-d * d / (gamma * gamma)).exp() };
            if w > 0.0 {
                entries.push((i, j, w));
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::InvalidArgument(
            "affinity is all zero; radius too small for the point spread".into(),
        ));
    }
    SymmetricOperator::sparse(n, entries)
}

/// Checks that a matrix can serve as a graph affinity: zero diagonal and
/// nonnegative weights.
pub fn validate_affinity(w: &SymmetricOperator) -> Result<()> {
    let check = |i: usize, j: usize, v: f64| -> Result<()> {
        if i == j && v != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "affinity diagonal must be zero, W[{i},{i}] = {v}"
            )));
        }
        if v < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "affinity weights must be nonnegative, W[{i},{j}] = {v}"
            )));
        }
        Ok(())
    };
    match w {
        SymmetricOperator::Sparse { entries, .. } => {
            for &(i, j, v) in entries {
                check(i, j, v)?;
            }
        }
        other => {
            let dense = other.to_dense();
            for i in 0..dense.nrows() {
                for j in i..dense.ncols() {
                    check(i, j, dense[(i, j)])?;
                }
            }
        }
    }
    Ok(())
}

/// Graph bisection as a BQP: minimize x^T (-W) x over x in {-1,+1}^n with
/// x^T e = 0. The degree term of the cut objective is constant on sign
/// vectors and dropped. Constraints: diag(X) = e entrywise plus the lifted
/// balance <X, ee^T> = 0.
pub fn bisection_problem(w: &SymmetricOperator) -> Result<(BqpProblem, Vec<ConstraintSpec>)> {
    validate_affinity(w)?;
    let n = w.n();
    let problem = BqpProblem::new(w.negated(), Domain::PlusMinusOne)?;
    let mut constraints = Vec::with_capacity(n + 1);
    for i in 0..n {
        constraints.push(ConstraintSpec::equality(ConstraintMatrix::DiagUnit(i), 1.0));
    }
    let e = DVector::from_element(n, 1.0);
    constraints.push(ConstraintSpec::equality(ConstraintMatrix::rank_one(e, 1.0), 0.0));
    Ok((problem, constraints))
}

/// Builds a binary indicator vector from index lists, for partial groups.
pub fn indicator(n: usize, indices: &[usize]) -> Result<DVector<f64>> {
    let mut t = DVector::zeros(n);
    for &i in indices {
        if i >= n {
            return Err(Error::Dimension { context: "indicator index", expected: n, got: i });
        }
        t[i] = 1.0;
    }
    Ok(t)
}

/// The smoothing matrix P = D^{-1} W used by partial-group constraints.
pub fn smoothing_matrix(g: &GraphMatrices) -> DMatrix<f64> {
    let mut p = g.w.to_dense();
    for (i, mut row) in p.row_iter_mut().enumerate() {
        row /= g.degrees[i];
    }
    p
}

/// Known foreground / background pixels and the smoothed-affinity operator
/// that spreads them, for weakly supervised segmentation.
#[derive(Clone, Debug)]
pub struct PartialGroups {
    /// Binary foreground indicator.
    pub t_f: DVector<f64>,
    /// Binary background indicator, disjoint from `t_f`.
    pub t_b: DVector<f64>,
    /// Constraint strength in [0, 1].
    pub kappa: f64,
    /// Smoothing matrix P = D^{-1} W.
    pub p: DMatrix<f64>,
}

impl PartialGroups {
    pub fn new(t_f: DVector<f64>, t_b: DVector<f64>, kappa: f64, p: DMatrix<f64>) -> Result<Self> {
        let n = p.nrows();
        if p.ncols() != n || t_f.len() != n || t_b.len() != n {
            return Err(Error::Dimension {
                context: "partial groups",
                expected: n,
                got: t_f.len().max(t_b.len()).max(p.ncols()),
            });
        }
        for t in [&t_f, &t_b] {
            if t.iter().any(|v| *v != 0.0 && *v != 1.0) {
                return Err(Error::InvalidArgument("group indicators must be binary".into()));
            }
            if t.iter().all(|v| *v == 0.0) {
                return Err(Error::InvalidArgument("a group indicator is all zero".into()));
            }
        }
        if t_f.iter().zip(t_b.iter()).any(|(f, b)| *f != 0.0 && *b != 0.0) {
            return Err(Error::InvalidArgument("groups must be disjoint".into()));
        }
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::InvalidArgument(format!("kappa must lie in [0,1], got {kappa}")));
        }
        Ok(PartialGroups { t_f, t_b, kappa, p })
    }
}

/// Partial-group constraints: for v in {P t_f, P t_b, P (t_f - t_b)}, require
/// <X, v v^T> >= kappa * |v|_1^2 (stored negated as <=, the model
/// convention). Appended by the caller to the bisection constraint set.
pub fn segmentation_constraints(groups: &PartialGroups) -> Vec<ConstraintSpec> {
    let n = groups.p.nrows();
    let diff = &groups.t_f - &groups.t_b;
    [&groups.t_f, &groups.t_b, &diff]
        .into_iter()
        .map(|t| {
            let v = &groups.p * t;
            let l1: f64 = v.iter().map(|x| x.abs()).sum();
            let b = groups.kappa * l1 * l1;
            ConstraintSpec::greater_eq(ConstraintMatrix::rank_one(v, 1.0), b, n)
        })
        .collect()
}

/// Inputs for discriminative co-segmentation across several images: one
/// affinity block per image, a kernel over all pixels, and the weights of
/// the histogram-separation and smoothness terms.
#[derive(Clone, Debug)]
pub struct CosegInputs {
    /// Per-image affinity matrices (the blocks of the full W).
    pub w_blocks: Vec<DMatrix<f64>>,
    /// Kernel over all n pixels, symmetric positive semidefinite.
    pub k_kernel: DMatrix<f64>,
    /// Weight of the within-image smoothness term.
    pub mu: f64,
    /// Kernel regularizer, must be positive.
    pub lambda_k: f64,
    /// Per-image balance cap: |<x, delta_i>| <= lambda.
    pub lambda_cap: f64,
}

impl CosegInputs {
    pub fn image_sizes(&self) -> Vec<usize> {
        self.w_blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn n(&self) -> usize {
        self.w_blocks.iter().map(|b| b.nrows()).sum()
    }

    fn validate(&self) -> Result<()> {
        if self.w_blocks.is_empty() {
            return Err(Error::InvalidArgument("co-segmentation needs at least one image".into()));
        }
        for b in &self.w_blocks {
            if b.nrows() != b.ncols() {
                return Err(Error::Dimension {
                    context: "affinity block",
                    expected: b.nrows(),
                    got: b.ncols(),
                });
            }
        }
        let n = self.n();
        if self.k_kernel.nrows() != n || self.k_kernel.ncols() != n {
            return Err(Error::Dimension {
                context: "kernel",
                expected: n,
                got: self.k_kernel.nrows().max(self.k_kernel.ncols()),
            });
        }
        let asym = (&self.k_kernel - self.k_kernel.transpose()).norm();
        if asym > 1e-8 * self.k_kernel.norm().max(1.0) {
            return Err(Error::InvalidArgument("kernel must be symmetric".into()));
        }
        if !(self.lambda_k > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kernel regularizer must be positive, got {}",
                self.lambda_k
            )));
        }
        if !(self.mu >= 0.0) || !(self.lambda_cap >= 0.0) {
            return Err(Error::InvalidArgument("mu and the balance cap must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Co-segmentation objective A = A_b + (mu/n) A_w and its constraints.
/// A_b = lambda_k Pi (n lambda_k I + K)^{-1} Pi with Pi = I - ee^T/n, kept
/// in factored form (projector, Cholesky solve, projector). A_w is the
/// block-diagonal normalized Laplacian of the per-image affinities.
/// Constraints: diag(X) = e plus one lifted balance cap per image.
pub fn coseg_objective(inputs: &CosegInputs) -> Result<(SymmetricOperator, Vec<ConstraintSpec>)> {
    inputs.validate()?;
    let n = inputs.n();

    // Block-diagonal A_w = I - D^{-1/2} W D^{-1/2}, one block per image.
    let mut entries = Vec::new();
    let mut offset = 0;
    for block in &inputs.w_blocks {
        let bn = block.nrows();
        for i in 0..bn {
            if block[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "affinity diagonal must be zero, W[{0},{0}] = {1}",
                    offset + i,
                    block[(i, i)]
                )));
            }
            for j in 0..bn {
                if block[(i, j)] < 0.0 {
                    return Err(Error::InvalidArgument(
                        "affinity weights must be nonnegative".into(),
                    ));
                }
            }
        }
        let degrees: Vec<f64> = block.row_iter().map(|r| r.sum()).collect();
        if let Some(i) = degrees.iter().position(|d| *d <= 0.0) {
            return Err(Error::ZeroDegree(offset + i));
        }
        for i in 0..bn {
            entries.push((offset + i, offset + i, 1.0));
            for j in (i + 1)..bn {
                let w = block[(i, j)];
                if w != 0.0 {
                    entries.push((offset + i, offset + j, -w / (degrees[i] * degrees[j]).sqrt()));
                }
            }
        }
        offset += bn;
    }
    let a_w = ConstraintMatrix::Sparse { n, entries };

    let shifted = &inputs.k_kernel + DMatrix::identity(n, n) * (n as f64 * inputs.lambda_k);
    let a_b = SymmetricOperator::projected_inverse(inputs.lambda_k, shifted)?;
    let a = SymmetricOperator::composite(a_b, vec![(inputs.mu / n as f64, a_w)])?;

    let mut constraints = Vec::with_capacity(n + inputs.w_blocks.len());
    for i in 0..n {
        constraints.push(ConstraintSpec::equality(ConstraintMatrix::DiagUnit(i), 1.0));
    }
    let cap = inputs.lambda_cap * inputs.lambda_cap;
    let mut offset = 0;
    for block in &inputs.w_blocks {
        let idx: Vec<usize> = (offset..offset + block.nrows()).collect();
        let delta = indicator(n, &idx)?;
        constraints.push(ConstraintSpec::less_eq(ConstraintMatrix::rank_one(delta, 1.0), cap));
        offset += block.nrows();
    }
    Ok((a, constraints))
}

/// A point-matching problem in homogenized lifted form: K source points to
/// be matched injectively into L targets, with objective h^T x + alpha
/// x^T H x over x in {0,1}^{KL}, x_{ij} = x[i*L + j].
#[derive(Clone, Debug)]
pub struct RegistrationInstance {
    pub source: PointCloud,
    pub target: PointCloud,
    pub alpha: f64,
    pub sigma_d: f64,
    /// Per-candidate local term, length KL.
    pub h: DVector<f64>,
    /// Homogenized objective of dimension KL + 1.
    pub hhat: SymmetricOperator,
}

impl RegistrationInstance {
    pub fn k(&self) -> usize {
        self.source.len()
    }

    pub fn l(&self) -> usize {
        self.target.len()
    }
}

/// Assembles the registration objective. The structural term
/// H_{(i,j),(k,l)} = exp(-(d_src(i,k) - d_tgt(j,l))^2 / sigma_d^2) rewards
/// matches that preserve pairwise distances, so recovering a matching by
/// minimization wants alpha < 0. `sigma_d` defaults to 0.2 times the
/// maximum pairwise target distance; `feature_sim` defaults to zero.
pub fn registration_instance(
    source: PointCloud,
    target: PointCloud,
    alpha: f64,
    sigma_d: Option<f64>,
    feature_sim: Option<DVector<f64>>,
) -> Result<RegistrationInstance> {
    let k = source.len();
    let l = target.len();
    if k == 0 {
        return Err(Error::InvalidArgument("registration needs at least one source point".into()));
    }
    if k > l {
        return Err(Error::InvalidArgument(format!(
            "cannot match {k} source points injectively into {l} targets"
        )));
    }
    let sigma_d = sigma_d.unwrap_or_else(|| 0.2 * target.max_pairwise_distance());
    if !(sigma_d > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "structure bandwidth must be positive, got {sigma_d}"
        )));
    }
    let kl = k * l;
    let h = match feature_sim {
        Some(h) => {
            if h.len() != kl {
                return Err(Error::Dimension { context: "feature term", expected: kl, got: h.len() });
            }
            h
        }
        None => DVector::zeros(kl),
    };

    let mut hhat = DMatrix::zeros(kl + 1, kl + 1);
    for r in 0..kl {
        hhat[(0, r + 1)] = h[r] / 2.0;
        hhat[(r + 1, 0)] = h[r] / 2.0;
    }
    for i in 0..k {
        for j in 0..l {
            for p in 0..k {
                for q in 0..l {
                    let ds = source.distance(i, p);
                    let dt = target.distance(j, q);
                    let diff = ds - dt;
                    hhat[(i * l + j + 1, p * l + q + 1)] =
                        alpha * (-diff * diff / (sigma_d * sigma_d)).exp();
                }
            }
        }
    }
    let hhat = SymmetricOperator::dense(hhat)?;
    Ok(RegistrationInstance { source, target, alpha, sigma_d, h, hhat })
}

/// Constraints pinning the homogenized lifted matching matrix: the corner
/// entry is 1, every diagonal entry equals its first-row entry, each
/// source's candidate block sums to 1 on the diagonal, and every pair of
/// conflicting candidates (same source or same target) has a zero entry.
/// Total 1 + KL + K + K*L(L-1)/2 + L*K(K-1)/2.
pub fn registration_constraints(k: usize, l: usize) -> Vec<ConstraintSpec> {
    debug_assert!(k >= 1 && l >= 1);
    let kl = k * l;
    let nhat = kl + 1;
    let mut cons = Vec::new();
    cons.push(ConstraintSpec::equality(ConstraintMatrix::EntryPair(0, 0), 1.0));
    for r in 1..=kl {
        cons.push(ConstraintSpec::equality(ConstraintMatrix::RowLink(r), 0.0));
    }
    for i in 0..k {
        let mut mask = DVector::zeros(nhat);
        for j in 0..l {
            mask[i * l + j + 1] = 1.0;
        }
        cons.push(ConstraintSpec::equality(ConstraintMatrix::Diag(mask), 1.0));
    }
    // One source, two targets.
    for i in 0..k {
        for j in 0..l {
            for q in (j + 1)..l {
                cons.push(ConstraintSpec::equality(
                    ConstraintMatrix::EntryPair(i * l + j + 1, i * l + q + 1),
                    0.0,
                ));
            }
        }
    }
    // Two sources, one target.
    for j in 0..l {
        for i in 0..k {
            for p in (i + 1)..k {
                cons.push(ConstraintSpec::equality(
                    ConstraintMatrix::EntryPair(i * l + j + 1, p * l + j + 1),
                    0.0,
                ));
            }
        }
    }
    cons
}

/// Lifts a binary matching vector to homogenized coordinates (1, x).
pub fn lift_matching(x: &DVector<f64>) -> DVector<f64> {
    let mut xhat = DVector::zeros(x.len() + 1);
    xhat[0] = 1.0;
    xhat.rows_mut(1, x.len()).copy_from(x);
    xhat
}

/// Random weighted graph: each unordered pair is an edge with the given
/// probability, weights uniform on [0, 1]. Deterministic under the seed.
pub fn random_graph(n: usize, density: f64, seed: u64) -> Result<SymmetricOperator> {
    if n < 2 {
        return Err(Error::InvalidArgument("a graph needs at least two vertices".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "edge density must lie in (0, 1], got {density}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < density {
                entries.push((i, j, rng.random::<f64>()));
            }
        }
    }
    SymmetricOperator::sparse(n, entries)
}

/// The two synthetic 2-d partition shapes: blobs of unequal density, and
/// equal blobs with one far outlier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterKind {
    DensityImbalance,
    WithOutlier,
}

/// Labeled 2-d two-cluster data. `DensityImbalance` draws one tight and one
/// diffuse Gaussian blob with equal counts; `WithOutlier` draws two equal
/// blobs plus a far point labeled with its nearer blob. Deterministic under
/// the seed.
pub fn two_cluster_dataset(kind: ClusterKind, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blob = |count: usize, center: (f64, f64), std: f64, rng: &mut ChaCha8Rng| {
        (0..count)
            .map(|_| {
                let gx: f64 = StandardNormal.sample(rng);
                let gy: f64 = StandardNormal.sample(rng);
                DVector::from_column_slice(&[center.0 + std * gx, center.1 + std * gy])
            })
            .collect::<Vec<_>>()
    };
    let (mut points, mut labels) = (Vec::new(), Vec::new());
    match kind {
        ClusterKind::DensityImbalance => {
            let tight = blob(60, (-2.0, 0.0), 0.25, &mut rng);
            let diffuse = blob(60, (2.0, 0.0), 1.0, &mut rng);
            labels.extend(std::iter::repeat_n(1.0, tight.len()));
            labels.extend(std::iter::repeat_n(-1.0, diffuse.len()));
            points.extend(tight);
            points.extend(diffuse);
        }
        ClusterKind::WithOutlier => {
            let left = blob(40, (-2.0, 0.0), 0.5, &mut rng);
            let right = blob(40, (2.0, 0.0), 0.5, &mut rng);
            labels.extend(std::iter::repeat_n(1.0, left.len()));
            labels.extend(std::iter::repeat_n(-1.0, right.len()));
            points.extend(left);
            points.extend(right);
            // The outlier sits far from both blobs but nearer the right one.
            points.push(DVector::from_column_slice(&[6.0, 5.0]));
            labels.push(-1.0);
        }
    }
    PointCloud::new(points, Some(labels)).expect("generated points are 2-d")
}
