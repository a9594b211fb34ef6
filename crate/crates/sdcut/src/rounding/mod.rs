//! Rounding a relaxed solution to a discrete one: Gaussian randomized
//! rounding from a low-rank factorization, deterministic leading-eigenvector
//! rounding, and optimal assignment extraction for matching problems.

mod hungarian;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::quad_value;
use crate::symlin::{PrimalFactor, SymmetricOperator};
use crate::{Error, Result};

/// How a real score vector is cut into signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdMode {
    /// The ceil(n/2) largest scores get +1 (ties broken by index), so the
    /// two sides stay as balanced as possible.
    Median,
    /// Plain sign; a zero score counts as +1.
    Zero,
}

#[derive(Clone, Copy, Debug)]
pub struct RoundingOptions<'a> {
    /// Objective the candidates are scored against.
    pub objective: &'a SymmetricOperator,
    pub repeats: usize,
    pub threshold: ThresholdMode,
    pub seed: u64,
}

impl<'a> RoundingOptions<'a> {
    pub fn new(objective: &'a SymmetricOperator, seed: u64) -> Self {
        RoundingOptions {
            objective,
            repeats: 100,
            threshold: ThresholdMode::Median,
            seed,
        }
    }
}

/// A sign vector and its objective value.
#[derive(Clone, Debug)]
pub struct RoundedSolution {
    pub x: DVector<f64>,
    pub value: f64,
    /// Index of the repeat that produced the winner (first among ties).
    pub best_repeat: usize,
}

/// Draws one Gaussian score vector z ~ N(0, X) from the factorization
/// X = sum_k w_k p_k p_k^T, as z = sum_k sqrt(w_k) g_k p_k with g_k standard
/// normal.
pub fn gaussian_scores<R: rand::Rng>(factor: &PrimalFactor, rng: &mut R) -> DVector<f64> {
    let mut z = DVector::zeros(factor.n());
    for k in 0..factor.count() {
        let g: f64 = StandardNormal.sample(rng);
        z.axpy(factor.weights[k].sqrt() * g, &factor.basis.column(k).clone_owned(), 1.0);
    }
    z
}

/// The RNG used for repeat `repeat` of a rounding run with the given seed.
/// Each repeat gets its own stream, so draws are independent of how many
/// repeats run or in what order.
pub fn repeat_rng(seed: u64, repeat: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repeat as u64);
    rng
}

/// Randomized Gaussian rounding: samples score vectors from N(0, X),
/// thresholds each into signs, and keeps the candidate with the smallest
/// objective value. A rank-zero factorization has no signal to sample, so
/// the all-ones vector is returned as the single candidate.
pub fn gaussian_round(factor: &PrimalFactor, opts: &RoundingOptions) -> Result<RoundedSolution> {
    let n = factor.n();
    if opts.objective.n() != n {
        return Err(Error::Dimension {
            context: "rounding objective",
            expected: n,
            got: opts.objective.n(),
        });
    }
    if opts.repeats == 0 {
        return Err(Error::InvalidArgument("rounding needs at least one repeat".into()));
    }
    if factor.count() == 0 {
        let x = DVector::from_element(n, 1.0);
        let value = quad_value(opts.objective, &x);
        return Ok(RoundedSolution { x, value, best_repeat: 0 });
    }
    let mut best: Option<RoundedSolution> = None;
    for repeat in 0..opts.repeats {
        let mut rng = repeat_rng(opts.seed, repeat);
        let z = gaussian_scores(factor, &mut rng);
        let x = threshold(&z, opts.threshold);
        let value = quad_value(opts.objective, &x);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(RoundedSolution { x, value, best_repeat: repeat });
        }
    }
    Ok(best.expect("at least one repeat"))
}

/// Deterministic rounding from the leading factor: thresholds the dominant
/// eigendirection of X, sign-normalized so the first nonzero score is
/// positive. Falls back to all ones on a rank-zero factorization.
pub fn score_round(factor: &PrimalFactor, mode: ThresholdMode) -> DVector<f64> {
    if factor.count() == 0 {
        return DVector::from_element(factor.n(), 1.0);
    }
    let mut z = factor.basis.column(0).clone_owned() * factor.weights[0].sqrt();
    crate::spectral::normalize_sign(&mut z);
    threshold(&z, mode)
}

/// Cuts a score vector into a sign vector.
pub fn threshold(z: &DVector<f64>, mode: ThresholdMode) -> DVector<f64> {
    let n = z.len();
    match mode {
        ThresholdMode::Zero => DVector::from_fn(n, |i, _| if z[i] >= 0.0 { 1.0 } else { -1.0 }),
        ThresholdMode::Median => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| z[b].partial_cmp(&z[a]).expect("finite scores").then(a.cmp(&b)));
            let mut x = DVector::from_element(n, -1.0);
            for &i in order.iter().take(n.div_ceil(2)) {
                x[i] = 1.0;
            }
            x
        }
    }
}

/// Picks the injective source-to-target map maximizing the summed match
/// quality. `quality` is row-major K x L; requires K <= L. Returns
/// `assign` with `assign[i]` the target of source i.
pub fn assignment_round(quality: &[f64], k: usize, l: usize) -> Result<Vec<usize>> {
    if k == 0 || quality.len() != k * l {
        return Err(Error::InvalidArgument(format!(
            "quality must be a nonempty {k} x {l} grid, got {} entries",
            quality.len()
        )));
    }
    if k > l {
        return Err(Error::InvalidArgument(format!(
            "no injective assignment of {k} sources into {l} targets"
        )));
    }
    if quality.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("match qualities must be finite".into()));
    }
    // The solver minimizes cost, we maximize quality.
    let cost: Vec<f64> = quality.iter().map(|v| -v).collect();
    Ok(hungarian::min_cost_assignment(&cost, k, l))
}
