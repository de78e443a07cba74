//! Candidate scoring: expected reduction of target-region prediction
//! uncertainty, split into a closed-form within-basin term and a
//! between-basin term evaluated by one-dimensional quadrature, combined
//! into the cost-aware score `(dV_intra + dV_inter) / cost^alpha`.
//! Also hosts the D-opt and V-opt baseline scores.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::law::{self, ConfigPoint, LawSpec};
use crate::posterior::{LocalGaussian, Posterior};

/// Score of one candidate experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub pool_index: usize,
    pub dv_intra: f64,
    pub dv_inter: f64,
    pub cost: f64,
    /// `(dv_intra + dv_inter) / cost^alpha`.
    pub score: f64,
}

/// Quadrature grid configuration. The default is a 257-node trapezoid grid
/// spanning the union of basin means +- 6 predictive standard deviations,
/// subdivided per connected component of that union.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridConfig {
    pub target_nodes: usize,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { target_nodes: 257, half_width: 6.0 }
    }
}

/// Trapezoid nodes and weights; weights sum to the covered span.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Builds the grid for a set of `(mean, variance)` mixture components.
/// Overlapping intervals merge into connected components; nodes go to each
/// component proportionally to its span, with floors that keep at least 33
/// nodes and roughly 4 nodes per smallest component sigma.
pub fn build_grid(components: &[(f64, f64)], cfg: &GridConfig) -> QuadratureGrid {
    assert!(!components.is_empty());
    let mut intervals: Vec<(f64, f64, f64)> = components
        .iter()
        .map(|&(m, v)| {
            let s = v.sqrt().max(f64::MIN_POSITIVE);
            (m - cfg.half_width * s, m + cfg.half_width * s, s)
        })
        .collect();
    intervals.sort_by(|a, b| a.partial_cmp(b).expect("finite interval"));

    struct Comp {
        lo: f64,
        hi: f64,
        s_min: f64,
    }
    let mut comps: Vec<Comp> = Vec::new();
    for (lo, hi, s) in intervals {
        match comps.last_mut() {
            Some(last) if lo <= last.hi => {
                last.hi = last.hi.max(hi);
                last.s_min = last.s_min.min(s);
            }
            _ => comps.push(Comp { lo, hi, s_min: s }),
        }
    }

    let total_span: f64 = comps.iter().map(|c| c.hi - c.lo).sum();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for c in &comps {
        let span = c.hi - c.lo;
        let proportional = (cfg.target_nodes as f64 * span / total_span).round() as usize;
        let resolution = (span / (c.s_min / 4.0)).ceil() as usize + 1;
        let n = proportional.max(33).max(resolution).min(20_001);
        let h = span / (n - 1) as f64;
        for i in 0..n {
            nodes.push(c.lo + i as f64 * h);
            weights.push(if i == 0 || i == n - 1 { h / 2.0 } else { h });
        }
    }
    QuadratureGrid { nodes, weights }
}

/// Per-basin scalar predictive component at a candidate point.
#[derive(Debug, Clone, Copy)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub var: f64,
}

/// The scalar predictive mixture `p(y | x) = sum_k w_k N(m_k, s_k^2)` induced
/// by the basin approximation at candidate `x`.
pub fn predictive_mixture(post: &Posterior, x: &ConfigPoint) -> Result<Vec<MixtureComponent>> {
    post.basins
        .iter()
        .map(|b| {
            let j = DVector::from_vec(law::scaled_jacobian(&post.spec, &b.theta, x)?);
            let var = post.sigma2 + (&j.transpose() * &b.sigma * &j)[(0, 0)];
            let mean = law::evaluate(&post.spec, &b.theta, x)?;
            Ok(MixtureComponent { weight: b.weight, mean, var })
        })
        .collect()
}

/// Expected reduction of within-basin target variance from observing `x`:
/// `(1/|T|) sum_k w_k ||J_k Sigma_k j_k(x)||^2 / (sigma2 + j_k' Sigma_k j_k)`.
/// Nonnegative.
pub fn intra_utility(post: &Posterior, x: &ConfigPoint) -> Result<f64> {
    let t = post.target.len() as f64;
    let mut acc = 0.0;
    for b in &post.basins {
        let j = DVector::from_vec(law::scaled_jacobian(&post.spec, &b.theta, x)?);
        let sj = &b.sigma * &j;
        let s2 = post.sigma2 + j.dot(&sj);
        acc += b.weight * (&b.target_jac * &sj).norm_squared() / s2;
    }
    Ok(acc / t)
}

/// Rank-one linear-Gaussian covariance update:
/// `Sigma+ = Sigma - Sigma j j' Sigma / (sigma2 + j' Sigma j)`.
pub fn rank_one_update(sigma: &DMatrix<f64>, j: &DVector<f64>, sigma2: f64) -> DMatrix<f64> {
    let sj = sigma * j;
    let s2 = sigma2 + j.dot(&sj);
    let updated = sigma - &sj * sj.transpose() / s2;
    (&updated + updated.transpose()) * 0.5
}

fn log_normal_pdf(y: f64, mean: f64, var: f64) -> f64 {
    const LN_2PI: f64 = 1.8378770664093453;
    let d = y - mean;
    -0.5 * (LN_2PI + var.ln()) - d * d / (2.0 * var)
}

/// Expected reduction of between-basin target disagreement from observing
/// `x`: the pairwise quadratic form integrated against the predictive
/// mixture on a trapezoid grid. Zero when K = 1; may be slightly negative
/// through quadrature error or genuine posterior dynamics.
pub fn inter_utility(post: &Posterior, x: &ConfigPoint, grid_cfg: &GridConfig) -> Result<f64> {
    let k = post.k();
    if k <= 1 {
        return Ok(0.0);
    }
    let t = post.target.len() as f64;
    let mix = predictive_mixture(post, x)?;

    // g_k = J_k Sigma_k j_k / s_k^2 drives the target-mean update per basin.
    let gains: Vec<DVector<f64>> = post
        .basins
        .iter()
        .zip(&mix)
        .map(|(b, c)| {
            let j = DVector::from_vec(law::scaled_jacobian(&post.spec, &b.theta, x)?);
            Ok((&b.target_jac * (&b.sigma * &j)) / c.var)
        })
        .collect::<Result<Vec<_>>>()?;

    let v_inter = post.v_inter();

    // Pairwise quadratic coefficients: ||f+_k - f+_l||^2 = A + B y + C y^2.
    struct Pair {
        k: usize,
        l: usize,
        a: f64,
        b: f64,
        c: f64,
    }
    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let a_vec = &post.basins[i].target_mean - &post.basins[j].target_mean
                - &gains[i] * mix[i].mean
                + &gains[j] * mix[j].mean;
            let b_vec = &gains[i] - &gains[j];
            pairs.push(Pair {
                k: i,
                l: j,
                a: a_vec.norm_squared(),
                b: 2.0 * a_vec.dot(&b_vec),
                c: b_vec.norm_squared(),
            });
        }
    }

    let grid = build_grid(&mix.iter().map(|c| (c.mean, c.var)).collect::<Vec<_>>(), grid_cfg);
    let log_w: Vec<f64> = mix.iter().map(|c| c.weight.max(f64::MIN_POSITIVE).ln()).collect();

    let mut expectation = 0.0;
    let mut log_phi = vec![0.0; k];
    for (&y, &wq) in grid.nodes.iter().zip(&grid.weights) {
        for (i, c) in mix.iter().enumerate() {
            log_phi[i] = log_normal_pdf(y, c.mean, c.var);
        }
        // log sum_r w_r phi_r(y), stabilized.
        let max = (0..k).map(|i| log_w[i] + log_phi[i]).fold(f64::NEG_INFINITY, f64::max);
        let log_denom = max
            + (0..k).map(|i| (log_w[i] + log_phi[i] - max).exp()).sum::<f64>().ln();
        let mut node_val = 0.0;
        for p in &pairs {
            let ratio = (log_phi[p.k] + log_phi[p.l] - log_denom).exp();
            if ratio > 0.0 {
                node_val += mix[p.k].weight
                    * mix[p.l].weight
                    * ratio
                    * (p.a + p.b * y + p.c * y * y);
            }
        }
        expectation += wq * node_val;
    }
    Ok(v_inter - expectation / t)
}

/// One `CandidateScore` per entry of `pool`: `(pool index, point, cost)`.
/// Callers pass only feasible candidates; output order follows the input.
pub fn score_candidates(
    post: &Posterior,
    pool: &[(usize, ConfigPoint, f64)],
    alpha: f64,
    grid_cfg: &GridConfig,
) -> Result<Vec<CandidateScore>> {
    assert!(alpha >= 0.0);
    pool.iter()
        .map(|(idx, x, cost)| {
            let dv_intra = intra_utility(post, x)?;
            let dv_inter = inter_utility(post, x, grid_cfg)?;
            Ok(CandidateScore {
                pool_index: *idx,
                dv_intra,
                dv_inter,
                cost: *cost,
                score: (dv_intra + dv_inter) / cost.powf(alpha),
            })
        })
        .collect()
}

/// D-optimality gain of observing `x` under the local linearization:
/// `logdet(H + j j'/sigma2) - logdet(H) = log(1 + j' H^-1 j / sigma2)`.
pub fn dopt_score(
    spec: &LawSpec,
    sigma2: f64,
    best: &LocalGaussian,
    x: &ConfigPoint,
) -> Result<f64> {
    let j = DVector::from_vec(law::scaled_jacobian(spec, &best.theta, x)?);
    let q = (&j.transpose() * &best.cov * &j)[(0, 0)];
    Ok((q / sigma2).ln_1p())
}

/// V-optimality gain: predictive-variance reduction over the target region
/// under a single linearization at the best fit. Equals [`intra_utility`]
/// for a one-basin posterior at the same parameters.
pub fn vopt_score(
    spec: &LawSpec,
    sigma2: f64,
    best: &LocalGaussian,
    target: &[ConfigPoint],
    x: &ConfigPoint,
) -> Result<f64> {
    let p = spec.param_count();
    let mut jac = DMatrix::zeros(target.len(), p);
    for (i, pt) in target.iter().enumerate() {
        let row = law::scaled_jacobian(spec, &best.theta, pt)?;
        for (c, g) in row.iter().enumerate() {
            jac[(i, c)] = *g;
        }
    }
    let j = DVector::from_vec(law::scaled_jacobian(spec, &best.theta, x)?);
    let sj = &best.cov * &j;
    let s2 = sigma2 + j.dot(&sj);
    Ok((jac * sj).norm_squared() / s2 / target.len() as f64)
}
