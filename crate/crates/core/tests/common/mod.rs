//! Shared oracle helpers for the integration tests. Everything here is an
//! independent route to the quantities the library computes: straight-line
//! formula reimplementations, finite differences, closed-form Bayesian linear
//! regression, and direct Monte-Carlo estimators.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lawdesign::law::{self, ConfigPoint, FamilyId, LawSpec, ParamVector};
use lawdesign::posterior::{Basin, Posterior};

/// Straight-line reimplementation of each family formula, written directly
/// from the algebra with no shared code.
pub fn straight_line_eval(spec: &LawSpec, theta: &[f64], x: &[f64]) -> f64 {
    let d = spec.input_dim;
    match spec.family_id {
        FamilyId::PowerSum => {
            let mut v = theta[0];
            for i in 0..d {
                v += theta[1 + i] * (-theta[1 + d + i] * x[i].ln()).exp();
            }
            v
        }
        FamilyId::LogQuadratic => {
            let mut q = theta[0];
            let mut idx = 1 + d;
            for i in 0..d {
                q += theta[1 + i] * x[i].ln();
                for j in i..d {
                    q += theta[idx] * x[i].ln() * x[j].ln();
                    idx += 1;
                }
            }
            q.exp()
        }
        FamilyId::SaturatingPower => {
            theta[0] + theta[1] * (-theta[3] * (x[0] + theta[2]).ln()).exp()
        }
        FamilyId::Linear => {
            theta[0] + (0..d).map(|i| theta[1 + i] * x[i]).sum::<f64>()
        }
    }
}

/// Central finite-difference Jacobian with the step `h_i = 1e-6 max(|t_i|, 1)`.
pub fn fd_jacobian(spec: &LawSpec, theta: &ParamVector, x: &ConfigPoint) -> Vec<f64> {
    (0..theta.len())
        .map(|i| {
            let h = 1e-6 * theta.values[i].abs().max(1.0);
            let mut plus = theta.clone();
            plus.values[i] += h;
            let mut minus = theta.clone();
            minus.values[i] -= h;
            (law::evaluate(spec, &plus, x).unwrap() - law::evaluate(spec, &minus, x).unwrap())
                / (2.0 * h)
        })
        .collect()
}

/// Central finite difference with respect to `log theta_i` (positive params).
pub fn fd_log_jacobian_entry(spec: &LawSpec, theta: &ParamVector, x: &ConfigPoint, i: usize) -> f64 {
    let h = 1e-6;
    let mut plus = theta.clone();
    plus.values[i] = (theta.values[i].ln() + h).exp();
    let mut minus = theta.clone();
    minus.values[i] = (theta.values[i].ln() - h).exp();
    (law::evaluate(spec, &plus, x).unwrap() - law::evaluate(spec, &minus, x).unwrap()) / (2.0 * h)
}

/// Relative error with an absolute floor for near-zero derivatives.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Draws a valid (theta, x) pair in ranges where every family is
/// numerically tame.
pub fn sample_theta_x(spec: &LawSpec, rng: &mut ChaCha8Rng) -> (ParamVector, ConfigPoint) {
    let theta = ParamVector::new(
        spec.positive_flags
            .iter()
            .enumerate()
            .map(|(i, &pos)| {
                if pos {
                    // log-uniform in [1e-2, 1e2] clipped to the bounds
                    let (lo, hi) = spec.bounds[i];
                    let lo = lo.max(1e-2);
                    let hi = hi.min(1e2);
                    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
                } else if spec.family_id == FamilyId::LogQuadratic {
                    -0.5 + rng.random::<f64>()
                } else {
                    -5.0 + 10.0 * rng.random::<f64>()
                }
            })
            .collect(),
    );
    let x = ConfigPoint::new(
        (0..spec.input_dim)
            .map(|_| (rng.random::<f64>() * 3.0f64.ln() * 2.0 - 3.0f64.ln()).exp() * 5.0)
            .collect(),
    );
    (theta, x)
}

pub fn builtin_specs() -> Vec<LawSpec> {
    vec![
        LawSpec::power_sum(2),
        LawSpec::power_sum(4),
        LawSpec::log_quadratic(2),
        LawSpec::log_quadratic(3),
        LawSpec::saturating_power(),
        LawSpec::linear(3),
    ]
}

/// Closed-form Bayesian linear regression: returns the posterior covariance
/// `sigma2 (Phi' Phi + sigma2 Lambda)^-1` computed by LU inversion (a
/// different route than the library's eigen-flooring).
pub fn bayes_linreg_cov(phi: &DMatrix<f64>, sigma2: f64, lambda: f64) -> DMatrix<f64> {
    let p = phi.ncols();
    let mut a = phi.transpose() * phi;
    for i in 0..p {
        a[(i, i)] += sigma2 * lambda;
    }
    a.try_inverse().expect("invertible") * sigma2
}

/// Design matrix of the linear family over the given points.
pub fn linear_design(points: &[ConfigPoint]) -> DMatrix<f64> {
    let d = points[0].dim();
    let mut phi = DMatrix::zeros(points.len(), d + 1);
    for (i, x) in points.iter().enumerate() {
        phi[(i, 0)] = 1.0;
        for j in 0..d {
            phi[(i, 1 + j)] = x.coords[j];
        }
    }
    phi
}

/// Random symmetric positive-definite matrix with moderate conditioning.
pub fn random_spd(p: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(p, p, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let mut m = &a * a.transpose() * (scale * scale / p as f64);
    for i in 0..p {
        m[(i, i)] += 1e-6 * scale * scale;
    }
    m
}

/// Hand-constructed posterior over a linear law: `k` basins with random
/// centers, SPD covariances, and normalized weights; the cached target
/// quantities are consistent with the law.
pub fn random_posterior(seed: u64, k: usize, input_dim: usize, n_target: usize) -> Posterior {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = LawSpec::linear(input_dim);
    let p = spec.param_count();
    let target: Vec<ConfigPoint> = (0..n_target)
        .map(|_| ConfigPoint::new((0..input_dim).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect()))
        .collect();
    let sigma2 = 0.05 + 0.45 * rng.random::<f64>();

    let raw_w: Vec<f64> = (0..k).map(|_| 0.2 + rng.random::<f64>()).collect();
    let z: f64 = raw_w.iter().sum();

    let basins = (0..k)
        .map(|b| {
            let theta = ParamVector::new((0..p).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect());
            let sigma = random_spd(p, 0.4, &mut rng);
            let mut mean = DVector::zeros(target.len());
            let mut jac = DMatrix::zeros(target.len(), p);
            for (i, x) in target.iter().enumerate() {
                mean[i] = law::evaluate(&spec, &theta, x).unwrap();
                for (c, g) in law::scaled_jacobian(&spec, &theta, x).unwrap().iter().enumerate() {
                    jac[(i, c)] = *g;
                }
            }
            Basin {
                theta,
                sigma,
                weight: raw_w[b] / z,
                target_mean: mean,
                target_jac: jac,
                mse: 0.01 * (1.0 + b as f64),
                logdet_h: 0.0,
            }
        })
        .collect();

    Posterior { spec, basins, sigma2, target }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
