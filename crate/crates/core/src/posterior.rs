//! Basin-mixture posterior approximation over law parameters.
//!
//! Multi-start fits are converted into a mixture `sum_k w_k N(theta_k, Sigma_k)`:
//! a Gauss-Newton local covariance per fit, deduplication and agglomerative
//! clustering of the fits in prediction space, a lowest-error representative
//! per cluster, and BIC- or Laplace-style mixture weights.
//!
//! Covariances live in the scaled (log-positive) parameterization and every
//! downstream Jacobian uses [`law::scaled_jacobian`] consistently, so the
//! quadratic forms `j' Sigma j` are valid without re-transformation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitter::{Dataset, FitResult};
use crate::law::{self, ConfigPoint, LawSpec, ParamVector};

/// Gaussian approximation around one local optimum.
#[derive(Debug, Clone)]
pub struct LocalGaussian {
    pub theta: ParamVector,
    /// p x p covariance in the scaled parameterization.
    pub cov: DMatrix<f64>,
    /// Empirical mean-squared fitting error of `theta` on the current data.
    pub mse: f64,
    /// Log-determinant of the floored precision matrix (for Laplace weights).
    pub logdet_h: f64,
}

/// One mixture component with its cached target-region quantities.
#[derive(Debug, Clone)]
pub struct Basin {
    pub theta: ParamVector,
    pub sigma: DMatrix<f64>,
    pub weight: f64,
    /// Predictions at the target points, in target order.
    pub target_mean: DVector<f64>,
    /// Scaled Jacobian rows at the target points, |target| x p.
    pub target_jac: DMatrix<f64>,
    pub mse: f64,
    pub logdet_h: f64,
}

/// The K-component basin mixture plus the noise-variance estimate.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub spec: LawSpec,
    pub basins: Vec<Basin>,
    pub sigma2: f64,
    pub target: Vec<ConfigPoint>,
}

impl Posterior {
    pub fn k(&self) -> usize {
        self.basins.len()
    }

    /// Within-basin target variance `(1/|T|) sum_k w_k tr(J_k Sigma_k J_k')`.
    pub fn v_intra(&self) -> f64 {
        let t = self.target.len() as f64;
        self.basins
            .iter()
            .map(|b| b.weight * (&b.target_jac * &b.sigma * b.target_jac.transpose()).trace())
            .sum::<f64>()
            / t
    }

    /// Between-basin target disagreement, pairwise form:
    /// `(1/|T|) sum_{k<l} w_k w_l ||f_k - f_l||^2`.
    pub fn v_inter(&self) -> f64 {
        let t = self.target.len() as f64;
        let mut acc = 0.0;
        for k in 0..self.basins.len() {
            for l in (k + 1)..self.basins.len() {
                let diff = &self.basins[k].target_mean - &self.basins[l].target_mean;
                acc += self.basins[k].weight * self.basins[l].weight * diff.norm_squared();
            }
        }
        acc / t
    }
}

/// Scheme for turning basin fit quality into mixture weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    Bic,
    Laplace,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeightConfig {
    pub scheme: WeightScheme,
    /// Softmax temperature; > 0.
    pub temperature: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self { scheme: WeightScheme::Bic, temperature: 1.0 }
    }
}

/// Knobs of the posterior estimation pipeline.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub weights: WeightConfig,
    /// Diagonal prior precision stabilizing weakly identified directions.
    pub prior_precision: f64,
    /// Locals closer than this (in d_mn) are merged before clustering.
    pub dedup_floor: f64,
    /// Cap on the number of basins.
    pub max_k: usize,
    /// Floor for the plug-in noise variance estimate.
    pub sigma2_floor: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            weights: WeightConfig::default(),
            prior_precision: 1e-6,
            dedup_floor: 1e-6,
            max_k: 8,
            sigma2_floor: 1e-8,
        }
    }
}

const EIG_FLOOR_REL: f64 = 1e-10;
const JITTER: f64 = 1e-12;
const SILHOUETTE_FALLBACK: f64 = 0.1;
const MSE_FLOOR: f64 = 1e-18;

/// Inverts a symmetric PSD-ish matrix by eigenvalue flooring; returns the
/// covariance and the log-determinant of the floored precision.
fn floored_inverse(h: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64)> {
    let eig = h.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
        return None;
    }
    let lmax = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let floor = (EIG_FLOOR_REL * lmax).max(f64::MIN_POSITIVE);
    let inv_diag = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| 1.0 / l.max(floor)),
    );
    let logdet = eig.eigenvalues.iter().map(|&l| l.max(floor).ln()).sum();
    let q = &eig.eigenvectors;
    let sigma = q * DMatrix::from_diagonal(&inv_diag) * q.transpose();
    let sym = (&sigma + sigma.transpose()) * 0.5;
    sym.iter().all(|v| v.is_finite()).then_some((sym, logdet))
}

/// Gauss-Newton local covariance at a fitted optimum:
/// `H = J'J / sigma2 + prior_precision * I`, `Sigma = H^-1` with spectral
/// regularization. `J` stacks scaled-Jacobian rows over the dataset.
pub fn local_covariance(
    spec: &LawSpec,
    data: &Dataset,
    fit: &FitResult,
    sigma2: f64,
    prior_precision: f64,
) -> Result<LocalGaussian> {
    let n = data.len();
    let p = spec.param_count();
    let mut j = DMatrix::zeros(n, p);
    for (i, (x, _)) in data.points.iter().enumerate() {
        let row = law::scaled_jacobian(spec, &fit.theta, x)?;
        for (k, g) in row.iter().enumerate() {
            j[(i, k)] = *g;
        }
    }
    let mut h = j.transpose() * &j / sigma2;
    for k in 0..p {
        h[(k, k)] += prior_precision;
    }
    let inverted = floored_inverse(&h).or_else(|| {
        let mut hj = h.clone();
        for k in 0..p {
            hj[(k, k)] += JITTER;
        }
        floored_inverse(&hj)
    });
    let (cov, logdet_h) = inverted.ok_or_else(|| {
        Error::Posterior("precision matrix not invertible even after flooring and jitter".into())
    })?;
    Ok(LocalGaussian { theta: fit.theta.clone(), cov, mse: fit.mse, logdet_h })
}

/// Mean pointwise symmetric KL between the predictive Gaussians of two local
/// optima over `eval_points`. Symmetric; zero iff the predictive means and
/// variances agree at every point.
pub fn predictive_skl(
    spec: &LawSpec,
    sigma2: f64,
    a: &LocalGaussian,
    b: &LocalGaussian,
    eval_points: &[ConfigPoint],
) -> Result<f64> {
    assert!(!eval_points.is_empty(), "eval_points must be non-empty");
    let mut acc = 0.0;
    for x in eval_points {
        let (mu_a, v_a) = predictive_moments(spec, sigma2, a, x)?;
        let (mu_b, v_b) = predictive_moments(spec, sigma2, b, x)?;
        let dm = mu_a - mu_b;
        acc += 0.25 * (v_a / v_b + v_b / v_a - 2.0 + dm * dm * (1.0 / v_a + 1.0 / v_b));
    }
    Ok(acc / eval_points.len() as f64)
}

fn predictive_moments(
    spec: &LawSpec,
    sigma2: f64,
    g: &LocalGaussian,
    x: &ConfigPoint,
) -> Result<(f64, f64)> {
    let mu = law::evaluate(spec, &g.theta, x)?;
    let j = DVector::from_vec(law::scaled_jacobian(spec, &g.theta, x)?);
    let v = (&j.transpose() * &g.cov * &j)[(0, 0)] + sigma2;
    Ok((mu, v))
}

/// Average-linkage agglomeration over a dissimilarity matrix, selecting the
/// cut with maximal silhouette among 2 <= K <= min(max_k, M-1). Returns the
/// single-cluster partition when M <= 2 or the best silhouette is below 0.1.
pub fn agglomerate(d: &DMatrix<f64>, max_k: usize) -> Vec<Vec<usize>> {
    let m = d.nrows();
    if m <= 2 {
        return vec![(0..m).collect()];
    }

    // Active clusters as member lists; inter-cluster distance kept current
    // with the Lance-Williams average-linkage update.
    let mut members: Vec<Option<Vec<usize>>> = (0..m).map(|i| Some(vec![i])).collect();
    let mut dist = d.clone();
    let k_hi = max_k.min(m - 1);

    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    for level in (1..m).rev() {
        // Merge the closest active pair; ties by lowest slot indices.
        let mut pick: Option<(usize, usize, f64)> = None;
        for i in 0..m {
            if members[i].is_none() {
                continue;
            }
            for j in (i + 1)..m {
                if members[j].is_none() {
                    continue;
                }
                if pick.map_or(true, |(_, _, best_d)| dist[(i, j)] < best_d) {
                    pick = Some((i, j, dist[(i, j)]));
                }
            }
        }
        let (i, j, _) = pick.expect("at least two active clusters");
        let ni = members[i].as_ref().unwrap().len() as f64;
        let nj = members[j].as_ref().unwrap().len() as f64;
        for t in 0..m {
            if t == i || t == j || members[t].is_none() {
                continue;
            }
            let merged = (ni * dist[(i, t)] + nj * dist[(j, t)]) / (ni + nj);
            dist[(i, t)] = merged;
            dist[(t, i)] = merged;
        }
        let absorbed = members[j].take().unwrap();
        members[i].as_mut().unwrap().extend(absorbed);

        // `level` clusters remain after this merge.
        if level >= 2 && level <= k_hi {
            let partition: Vec<Vec<usize>> =
                members.iter().flatten().cloned().collect();
            let s = silhouette(d, &partition);
            let better = match &best {
                None => true,
                // Strict improvement; ties keep the coarser (smaller K) cut.
                Some((best_s, _)) => s > *best_s,
            };
            if better {
                best = Some((s, partition));
            }
        }
    }

    match best {
        Some((s, partition)) if s >= SILHOUETTE_FALLBACK => partition,
        _ => vec![(0..m).collect()],
    }
}

/// Mean silhouette of a partition under dissimilarity `d`; singletons score 0.
pub fn silhouette(d: &DMatrix<f64>, partition: &[Vec<usize>]) -> f64 {
    let m = d.nrows();
    let mut label = vec![0usize; m];
    for (c, cluster) in partition.iter().enumerate() {
        for &i in cluster {
            label[i] = c;
        }
    }
    let mut total = 0.0;
    for (c, cluster) in partition.iter().enumerate() {
        for &i in cluster {
            if cluster.len() == 1 {
                continue; // singleton contributes 0
            }
            let a = cluster
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| d[(i, j)])
                .sum::<f64>()
                / (cluster.len() - 1) as f64;
            let b = partition
                .iter()
                .enumerate()
                .filter(|(o, other)| *o != c && !other.is_empty())
                .map(|(_, other)| {
                    other.iter().map(|&j| d[(i, j)]).sum::<f64>() / other.len() as f64
                })
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    total / m as f64
}

/// Pairwise prediction-space dissimilarity matrix over `eval_points`.
pub fn dissimilarity_matrix(
    spec: &LawSpec,
    sigma2: f64,
    locals: &[LocalGaussian],
    eval_points: &[ConfigPoint],
) -> Result<DMatrix<f64>> {
    let m = locals.len();
    let mut d = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let v = predictive_skl(spec, sigma2, &locals[i], &locals[j], eval_points)?;
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(d)
}

/// Clusters local optima by predictive behavior on `eval_points`.
pub fn cluster_basins(
    spec: &LawSpec,
    sigma2: f64,
    locals: &[LocalGaussian],
    eval_points: &[ConfigPoint],
    max_k: usize,
) -> Result<Vec<Vec<usize>>> {
    assert!(!locals.is_empty(), "need at least one local optimum");
    let d = dissimilarity_matrix(spec, sigma2, locals, eval_points)?;
    Ok(agglomerate(&d, max_k))
}

/// Per cluster, the index of the member with the smallest fitting error
/// (ties by lowest index).
pub fn select_representatives(partition: &[Vec<usize>], locals: &[LocalGaussian]) -> Vec<usize> {
    partition
        .iter()
        .map(|cluster| {
            *cluster
                .iter()
                .min_by(|&&a, &&b| {
                    locals[a]
                        .mse
                        .partial_cmp(&locals[b].mse)
                        .expect("finite mse")
                        .then(a.cmp(&b))
                })
                .expect("non-empty cluster")
        })
        .collect()
}

/// Mixture weights for the representative basins. `n_obs` is the current
/// dataset size. Weights sum to one.
pub fn mixture_weights(
    reps: &[&LocalGaussian],
    n_obs: usize,
    cfg: &WeightConfig,
    sigma2: f64,
) -> Vec<f64> {
    assert!(!reps.is_empty());
    assert!(cfg.temperature > 0.0);
    let p = reps[0].theta.len() as f64;
    let n = n_obs as f64;
    let logits: Vec<f64> = reps
        .iter()
        .map(|r| {
            let mse = r.mse.max(MSE_FLOOR);
            match cfg.scheme {
                WeightScheme::Bic => {
                    let bic = n * mse.ln() + p * n.ln();
                    -bic / (2.0 * cfg.temperature)
                }
                // Uniform prior over basins drops out of the softmax.
                WeightScheme::Laplace => -(n / (2.0 * sigma2)) * mse - 0.5 * r.logdet_h,
            }
        })
        .collect();
    softmax(&logits)
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.iter().map(|e| e / z).collect()
}

/// Full pipeline: noise-variance estimate, per-fit local covariances,
/// deduplication, prediction-space clustering on the target region,
/// representative selection, weights, and cached target quantities.
pub fn estimate_posterior(
    spec: &LawSpec,
    data: &Dataset,
    fits: &[FitResult],
    target: &[ConfigPoint],
    cfg: &EstimatorConfig,
) -> Result<Posterior> {
    if fits.is_empty() {
        return Err(Error::Posterior(
            "no fits supplied; caller should reuse the previous posterior".into(),
        ));
    }
    assert!(!target.is_empty(), "target region must be non-empty");

    let best_mse = fits.iter().map(|f| f.mse).fold(f64::INFINITY, f64::min);
    let sigma2 = best_mse.max(cfg.sigma2_floor);

    let locals: Vec<LocalGaussian> = fits
        .iter()
        .filter_map(|f| local_covariance(spec, data, f, sigma2, cfg.prior_precision).ok())
        .collect();
    if locals.is_empty() {
        return Err(Error::Posterior(
            "all local covariances degenerate; caller should reuse the previous posterior".into(),
        ));
    }

    // Merge predictively indistinguishable locals; the anchor of each group
    // is its first (lowest-mse, since fits arrive mse-sorted) member.
    let mut group_of: Vec<Vec<usize>> = Vec::new();
    for i in 0..locals.len() {
        let mut placed = false;
        for group in group_of.iter_mut() {
            let anchor = group[0];
            if predictive_skl(spec, sigma2, &locals[anchor], &locals[i], target)? < cfg.dedup_floor
            {
                group.push(i);
                placed = true;
                break;
            }
        }
        if !placed {
            group_of.push(vec![i]);
        }
    }
    let deduped: Vec<LocalGaussian> = group_of
        .iter()
        .map(|group| {
            let best = group
                .iter()
                .min_by(|&&a, &&b| {
                    locals[a].mse.partial_cmp(&locals[b].mse).expect("finite").then(a.cmp(&b))
                })
                .unwrap();
            locals[*best].clone()
        })
        .collect();

    let partition = cluster_basins(spec, sigma2, &deduped, target, cfg.max_k)?;
    let rep_idx = select_representatives(&partition, &deduped);
    let reps: Vec<&LocalGaussian> = rep_idx.iter().map(|&i| &deduped[i]).collect();
    let weights = mixture_weights(&reps, data.len(), &cfg.weights, sigma2);

    let basins = reps
        .iter()
        .zip(&weights)
        .map(|(rep, &w)| {
            let mut mean = DVector::zeros(target.len());
            let mut jac = DMatrix::zeros(target.len(), spec.param_count());
            for (i, x) in target.iter().enumerate() {
                mean[i] = law::evaluate(spec, &rep.theta, x)?;
                let row = law::scaled_jacobian(spec, &rep.theta, x)?;
                for (k, g) in row.iter().enumerate() {
                    jac[(i, k)] = *g;
                }
            }
            Ok(Basin {
                theta: rep.theta.clone(),
                sigma: rep.cov.clone(),
                weight: w,
                target_mean: mean,
                target_jac: jac,
                mse: rep.mse,
                logdet_h: rep.logdet_h,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Posterior { spec: spec.clone(), basins, sigma2, target: target.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitter::FitResult;
    use approx::assert_relative_eq;

    fn local(theta: Vec<f64>, cov: DMatrix<f64>, mse: f64) -> LocalGaussian {
        LocalGaussian { theta: ParamVector::new(theta), cov, mse, logdet_h: 0.0 }
    }

    #[test]
    fn scalar_covariance_with_prior() {
        // One observation of f = b0 + b1 x at x = 0 with sigma2 = 1 and
        // prior precision 0.5: H = diag(1, 0) + 0.5 I, Sigma = diag(2/3, 2).
        let spec = LawSpec::linear(1);
        let data = Dataset::new(vec![(ConfigPoint::new(vec![0.0]), 1.0)]);
        let fit = FitResult {
            theta: ParamVector::new(vec![1.0, 0.0]),
            mse: 0.0,
            converged: true,
            iterations: 1,
            start_index: 0,
        };
        let lg = local_covariance(&spec, &data, &fit, 1.0, 0.5).unwrap();
        assert_relative_eq!(lg.cov[(0, 0)], 2.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(lg.cov[(1, 1)], 2.0, max_relative = 1e-12);
        assert_relative_eq!(lg.cov[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn skl_identity_is_zero() {
        let spec = LawSpec::linear(1);
        let a = local(vec![1.0, 2.0], DMatrix::identity(2, 2), 0.1);
        let pts = vec![ConfigPoint::new(vec![0.5]), ConfigPoint::new(vec![2.0])];
        let d = predictive_skl(&spec, 0.3, &a, &a, &pts).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn skl_scalar_plug_in() {
        // mu_a = 0, mu_b = 1, v_a = v_b = 1 at a single point:
        // (1/4)(1 + 1 - 2 + 1*(1 + 1)) = 0.5.
        // Build with linear laws: b0 differs, zero covariance, sigma2 = 1.
        let spec = LawSpec::linear(1);
        let a = local(vec![0.0, 0.0], DMatrix::zeros(2, 2), 0.1);
        let b = local(vec![1.0, 0.0], DMatrix::zeros(2, 2), 0.1);
        let pts = vec![ConfigPoint::new(vec![0.0])];
        let d = predictive_skl(&spec, 1.0, &a, &b, &pts).unwrap();
        assert_relative_eq!(d, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn agglomerate_single_and_identical() {
        let d = DMatrix::zeros(1, 1);
        assert_eq!(agglomerate(&d, 8), vec![vec![0]]);

        // Five identical locals: silhouette 0 for all cuts -> K = 1.
        let d = DMatrix::zeros(5, 5);
        let part = agglomerate(&d, 8);
        assert_eq!(part.len(), 1);
        assert_eq!(part[0].len(), 5);
    }

    #[test]
    fn agglomerate_planted_two_groups() {
        // Within-group d = 1e-7, between-group d = 10.
        let m = 6;
        let mut d = DMatrix::zeros(m, m);
        let group = |i: usize| usize::from(i >= 3);
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    d[(i, j)] = if group(i) == group(j) { 1e-7 } else { 10.0 };
                }
            }
        }
        let mut part = agglomerate(&d, 8);
        for c in part.iter_mut() {
            c.sort_unstable();
        }
        part.sort();
        assert_eq!(part, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn representatives_take_min_mse() {
        let cov = DMatrix::identity(1, 1);
        let locals = vec![
            local(vec![0.0], cov.clone(), 0.3),
            local(vec![1.0], cov.clone(), 0.1),
            local(vec![2.0], cov.clone(), 0.2),
        ];
        let partition = vec![vec![0, 1, 2]];
        assert_eq!(select_representatives(&partition, &locals), vec![1]);

        let singleton = vec![vec![2]];
        assert_eq!(select_representatives(&singleton, &locals), vec![2]);
    }

    #[test]
    fn weights_trivial_and_symmetric() {
        let cov = DMatrix::identity(2, 2);
        let a = local(vec![0.0, 0.0], cov.clone(), 0.04);
        let w = mixture_weights(&[&a], 10, &WeightConfig::default(), 1.0);
        assert_eq!(w, vec![1.0]);

        let b = local(vec![1.0, 1.0], cov.clone(), 0.04);
        let w = mixture_weights(&[&a, &b], 10, &WeightConfig::default(), 1.0);
        assert_relative_eq!(w[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(w[1], 0.5, max_relative = 1e-12);
    }

    #[test]
    fn weights_bic_hand_computed() {
        // n = 10, p = 3, mse = (0.01, 0.04), T = 1:
        // BIC difference = 10 ln 4, so w1 = 1 / (1 + exp(-5 ln 4)) = 1024/1025.
        let cov = DMatrix::identity(3, 3);
        let a = local(vec![0.0; 3], cov.clone(), 0.01);
        let b = local(vec![1.0; 3], cov.clone(), 0.04);
        let w = mixture_weights(&[&a, &b], 10, &WeightConfig::default(), 1.0);
        assert_relative_eq!(w[0], 1024.0 / 1025.0, max_relative = 1e-12);
        assert_relative_eq!(w[0] + w[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn laplace_weights_penalize_sharp_minima() {
        let cov = DMatrix::identity(2, 2);
        let mut a = local(vec![0.0, 0.0], cov.clone(), 0.02);
        let mut b = local(vec![1.0, 1.0], cov.clone(), 0.02);
        a.logdet_h = 0.0;
        b.logdet_h = 4.0; // sharper curvature -> smaller Laplace mass
        let cfg = WeightConfig { scheme: WeightScheme::Laplace, temperature: 1.0 };
        let w = mixture_weights(&[&a, &b], 10, &cfg, 1.0);
        assert!(w[0] > w[1]);
        assert_relative_eq!(w[0] + w[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn estimate_posterior_single_fit() {
        let spec = LawSpec::linear(1);
        let data = Dataset::new(vec![
            (ConfigPoint::new(vec![0.0]), 1.0),
            (ConfigPoint::new(vec![1.0]), 2.0),
            (ConfigPoint::new(vec![2.0]), 3.0),
        ]);
        let fit = FitResult {
            theta: ParamVector::new(vec![1.0, 1.0]),
            mse: 0.0,
            converged: true,
            iterations: 1,
            start_index: 0,
        };
        let target = vec![ConfigPoint::new(vec![5.0])];
        let post =
            estimate_posterior(&spec, &data, &[fit], &target, &EstimatorConfig::default()).unwrap();
        assert_eq!(post.k(), 1);
        assert_eq!(post.basins[0].weight, 1.0);
        assert_relative_eq!(post.basins[0].target_mean[0], 6.0, max_relative = 1e-12);
    }

    #[test]
    fn estimate_posterior_rejects_empty_fits() {
        let spec = LawSpec::linear(1);
        let data = Dataset::new(vec![(ConfigPoint::new(vec![0.0]), 1.0)]);
        let target = vec![ConfigPoint::new(vec![1.0])];
        assert!(estimate_posterior(&spec, &data, &[], &target, &EstimatorConfig::default())
            .is_err());
    }
}
