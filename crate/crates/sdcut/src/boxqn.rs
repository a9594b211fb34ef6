//! Box-constrained limited-memory quasi-Newton minimization: two-loop
//! L-BFGS directions restricted to the inactive face, with a backtracking
//! Armijo search along the projection arc. This keeps the contract of the
//! reference box-constrained L-BFGS codes without their subspace
//! minimization step.

use std::collections::VecDeque;

use nalgebra::DVector;

use crate::{Error, Result};

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const CURVATURE_SKIP: f64 = 1e-10;
const FLAT_ITERS: usize = 5;

/// Per-coordinate box, entries may be infinite.
#[derive(Clone, Debug)]
pub struct Bounds {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

impl Bounds {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                context: "Bounds::new",
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower
            .iter()
            .zip(upper.iter())
            .any(|(l, u)| l.is_nan() || u.is_nan() || l > u)
        {
            return Err(Error::InvalidArgument(
                "bounds must satisfy lower <= upper without NaN".into(),
            ));
        }
        Ok(Bounds { lower, upper })
    }

    /// Unbounded in every coordinate.
    pub fn free(m: usize) -> Self {
        Bounds {
            lower: DVector::from_element(m, f64::NEG_INFINITY),
            upper: DVector::from_element(m, f64::INFINITY),
        }
    }

    /// `u >= 0` in every coordinate.
    pub fn nonneg(m: usize) -> Self {
        Bounds {
            lower: DVector::zeros(m),
            upper: DVector::from_element(m, f64::INFINITY),
        }
    }

    /// Free on the first `num_free` coordinates, `>= 0` on the rest: the
    /// dual box when equality multipliers come first.
    pub fn free_then_nonneg(num_free: usize, m: usize) -> Self {
        assert!(num_free <= m);
        let mut lower = DVector::from_element(m, f64::NEG_INFINITY);
        for i in num_free..m {
            lower[i] = 0.0;
        }
        Bounds {
            lower,
            upper: DVector::from_element(m, f64::INFINITY),
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn project(&self, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            u.len(),
            u.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .map(|(x, (l, h))| x.clamp(*l, *h)),
        )
    }
}

#[derive(Clone, Debug)]
pub struct QnOptions {
    /// Curvature pairs kept.
    pub memory: usize,
    pub max_iters: usize,
    /// Projected-gradient infinity-norm tolerance, relative to max(1, |f|).
    pub pg_tol: f64,
    /// Relative objective-change tolerance; convergence after five
    /// consecutive iterations below it.
    pub f_tol: f64,
}

impl Default for QnOptions {
    fn default() -> Self {
        QnOptions {
            memory: 200,
            max_iters: 5000,
            pg_tol: 1e-5,
            f_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QnStatus {
    /// Projected gradient below tolerance.
    ConvergedPg,
    /// Objective change below tolerance, or no decrease representable.
    ConvergedF,
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct QnResult {
    pub u: DVector<f64>,
    pub f: f64,
    pub iterations: usize,
    pub status: QnStatus,
    pub pg_norm: f64,
}

/// State snapshot handed to the observer once per visited iterate,
/// including the final one.
#[derive(Clone, Copy, Debug)]
pub struct IterationInfo<'a> {
    pub iteration: usize,
    pub f: f64,
    pub pg_norm: f64,
    pub u: &'a DVector<f64>,
}

pub fn minimize<F>(
    f_and_grad: F,
    u0: &DVector<f64>,
    bounds: &Bounds,
    opts: &QnOptions,
) -> Result<QnResult>
where
    F: FnMut(&DVector<f64>) -> Result<(f64, DVector<f64>)>,
{
    minimize_observed(f_and_grad, u0, bounds, opts, |_| {})
}

/// `minimize` with a per-iteration observer, for solver traces.
pub fn minimize_observed<F, O>(
    mut f_and_grad: F,
    u0: &DVector<f64>,
    bounds: &Bounds,
    opts: &QnOptions,
    mut observe: O,
) -> Result<QnResult>
where
    F: FnMut(&DVector<f64>) -> Result<(f64, DVector<f64>)>,
    O: FnMut(IterationInfo<'_>),
{
    let m = u0.len();
    if bounds.len() != m {
        return Err(Error::Dimension {
            context: "minimize bounds",
            expected: m,
            got: bounds.len(),
        });
    }
    if opts.memory == 0 {
        return Err(Error::InvalidArgument("quasi-Newton memory must be >= 1".into()));
    }

    let mut u = bounds.project(u0);
    let (mut f, mut g) = f_and_grad(&u)?;
    if !f.is_finite() {
        return Err(Error::NonFiniteObjective {
            iteration: 0,
            last_u: u.iter().copied().collect(),
            last_f: f,
        });
    }

    // (s, y, 1/s.y) pairs, most recent last.
    let mut pairs: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    let mut gamma = 1.0;
    let mut steps = 0usize;
    let mut flat_run = 0usize;
    let mut pending: Option<QnStatus> = None;

    loop {
        let pg = &u - bounds.project(&(&u - &g));
        let pg_norm = pg.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        observe(IterationInfo {
            iteration: steps,
            f,
            pg_norm,
            u: &u,
        });
        let finish = |status: QnStatus| QnResult {
            u: u.clone(),
            f,
            iterations: steps,
            status,
            pg_norm,
        };
        if pg_norm <= opts.pg_tol * f.abs().max(1.0) {
            return Ok(finish(QnStatus::ConvergedPg));
        }
        if let Some(status) = pending {
            return Ok(finish(status));
        }
        if steps >= opts.max_iters {
            return Ok(finish(QnStatus::MaxIters));
        }

        // Coordinates pinned at a bound with the gradient pushing outward
        // stay fixed for this step.
        let active: Vec<bool> = (0..m)
            .map(|i| {
                (u[i] <= bounds.lower[i] && g[i] > 0.0)
                    || (u[i] >= bounds.upper[i] && g[i] < 0.0)
            })
            .collect();
        let mut g_free = g.clone();
        for i in 0..m {
            if active[i] {
                g_free[i] = 0.0;
            }
        }

        let mut d = two_loop(&pairs, gamma, &g_free);
        for i in 0..m {
            if active[i] {
                d[i] = 0.0;
            }
        }
        // The quasi-Newton direction must descend; otherwise fall back to
        // the projected gradient.
        if d.dot(&g) >= 0.0 {
            d = -&g_free;
        }
        if d.iter().all(|x| *x == 0.0) {
            return Ok(finish(QnStatus::ConvergedF));
        }

        let f_before = f;
        match line_search(&mut f_and_grad, bounds, &u, f, &g, &d)? {
            LineSearch::Accepted(step) => {
                record_step(step, &mut u, &mut f, &mut g, &mut pairs, &mut gamma, opts);
            }
            LineSearch::NoFiniteTrial => {
                return Err(Error::NonFiniteObjective {
                    iteration: steps,
                    last_u: u.iter().copied().collect(),
                    last_f: f,
                });
            }
            LineSearch::NoDecrease => {
                // Stale curvature can poison the direction; retry once from
                // scratch along the projected gradient.
                pairs.clear();
                gamma = 1.0;
                let d = -&g_free;
                match line_search(&mut f_and_grad, bounds, &u, f, &g, &d)? {
                    LineSearch::Accepted(step) => {
                        record_step(step, &mut u, &mut f, &mut g, &mut pairs, &mut gamma, opts);
                    }
                    LineSearch::NoFiniteTrial => {
                        return Err(Error::NonFiniteObjective {
                            iteration: steps,
                            last_u: u.iter().copied().collect(),
                            last_f: f,
                        });
                    }
                    LineSearch::NoDecrease => {
                        return Ok(finish(QnStatus::ConvergedF));
                    }
                }
            }
        }
        steps += 1;

        if (f_before - f).abs() <= opts.f_tol * f.abs().max(1.0) {
            flat_run += 1;
        } else {
            flat_run = 0;
        }
        if flat_run >= FLAT_ITERS {
            pending = Some(QnStatus::ConvergedF);
        }
    }
}

struct AcceptedStep {
    u: DVector<f64>,
    f: f64,
    g: DVector<f64>,
}

enum LineSearch {
    Accepted(AcceptedStep),
    /// Every trial evaluation was non-finite.
    NoFiniteTrial,
    /// Finite trials existed but none satisfied the decrease condition.
    NoDecrease,
}

/// Backtracking Armijo search along the projection arc
/// `t -> P(u + t d)`, halving t up to MAX_BACKTRACKS times.
fn line_search<F>(
    f_and_grad: &mut F,
    bounds: &Bounds,
    u: &DVector<f64>,
    f: f64,
    g: &DVector<f64>,
    d: &DVector<f64>,
) -> Result<LineSearch>
where
    F: FnMut(&DVector<f64>) -> Result<(f64, DVector<f64>)>,
{
    let mut t = 1.0;
    let mut saw_finite = false;
    let mut saw_movement = false;
    for _ in 0..=MAX_BACKTRACKS {
        let trial = bounds.project(&(u + t * d));
        let displacement = &trial - u;
        if displacement.iter().all(|x| *x == 0.0) {
            // The arc contracts with t, so smaller steps cannot move either.
            break;
        }
        saw_movement = true;
        let (ft, gt) = f_and_grad(&trial)?;
        if ft.is_finite() {
            saw_finite = true;
            if ft <= f + ARMIJO_C1 * g.dot(&displacement) {
                return Ok(LineSearch::Accepted(AcceptedStep {
                    u: trial,
                    f: ft,
                    g: gt,
                }));
            }
        }
        t *= 0.5;
    }
    Ok(if saw_finite || !saw_movement {
        LineSearch::NoDecrease
    } else {
        LineSearch::NoFiniteTrial
    })
}

fn record_step(
    step: AcceptedStep,
    u: &mut DVector<f64>,
    f: &mut f64,
    g: &mut DVector<f64>,
    pairs: &mut VecDeque<(DVector<f64>, DVector<f64>, f64)>,
    gamma: &mut f64,
    opts: &QnOptions,
) {
    let s = &step.u - &*u;
    let y = &step.g - &*g;
    let sy = s.dot(&y);
    // Flat or negative curvature pairs would corrupt the inverse-Hessian
    // model; the dual objective is not twice differentiable, so they occur.
    if sy > CURVATURE_SKIP * s.norm() * y.norm() {
        *gamma = sy / y.dot(&y);
        pairs.push_back((s, y, 1.0 / sy));
        while pairs.len() > opts.memory {
            pairs.pop_front();
        }
    }
    *u = step.u;
    *f = step.f;
    *g = step.g;
}

/// Two-loop recursion: applies the implicit inverse Hessian to `g`.
fn two_loop(
    pairs: &VecDeque<(DVector<f64>, DVector<f64>, f64)>,
    gamma: f64,
    g: &DVector<f64>,
) -> DVector<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let alpha = rho * s.dot(&q);
        q.axpy(-alpha, y, 1.0);
        alphas.push(alpha);
    }
    q *= gamma;
    for ((s, y, rho), alpha) in pairs.iter().zip(alphas.into_iter().rev()) {
        let beta = rho * y.dot(&q);
        q.axpy(alpha - beta, s, 1.0);
    }
    -q
}
