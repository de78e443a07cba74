//! Instance files, synthetic instance generation, the shipped instance
//! suite, and budget-accuracy report emission.
//!
//! Instance files are JSON with an explicit `schema_version`; see the README
//! for the field-by-field description. Episode logs aggregate into a
//! tab-delimited table plus a CSV of (policy, fraction, mean, std, n) curves.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::engine::{Candidate, EpisodeLog, Instance};
use crate::error::{Error, Result};
use crate::law::{self, ConfigPoint, CostKind, CostModel, LawSpec, ParamVector};
use crate::mix_seed;

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    pub name: String,
    /// Synthetic instances must satisfy the high-cost-target guard:
    /// min(target cost) > median(pool cost).
    #[serde(default)]
    pub synthetic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
    /// Generator parameters; present only when the declared law is the
    /// generating law (absent for deliberately misspecified instances).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_theta: Option<ParamVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub coords: Vec<f64>,
    /// Omitted costs are recomputed from the cost model at load time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    pub outcome: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub coords: Vec<f64>,
    pub outcome: f64,
}

/// On-disk instance: law, cost model, candidate pool, target region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub metadata: InstanceMetadata,
    pub law: LawSpec,
    pub cost_model: CostModel,
    pub pool: Vec<PoolEntry>,
    pub target: Vec<TargetEntry>,
}

impl InstanceFile {
    /// Checks every structural invariant; diagnostics name the first
    /// offending entry.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != INSTANCE_SCHEMA_VERSION {
            return Err(Error::Instance(format!(
                "unsupported schema_version {} (expected {INSTANCE_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.law.validate()?;
        self.cost_model.validate(self.law.input_dim)?;
        if self.pool.is_empty() {
            return Err(Error::Instance("pool must be non-empty".into()));
        }
        if self.target.is_empty() {
            return Err(Error::Instance("target must be non-empty".into()));
        }
        let d = self.law.input_dim;
        for (i, e) in self.pool.iter().enumerate() {
            if e.coords.len() != d {
                return Err(Error::Instance(format!(
                    "pool entry {i}: {} coords, law expects {d}",
                    e.coords.len()
                )));
            }
            if !e.coords.iter().all(|c| c.is_finite()) || !e.outcome.is_finite() {
                return Err(Error::Instance(format!("pool entry {i}: non-finite value")));
            }
            if let Some(c) = e.cost {
                if !(c.is_finite() && c > 0.0) {
                    return Err(Error::Instance(format!("pool entry {i}: cost {c} must be > 0")));
                }
            }
        }
        for (i, e) in self.target.iter().enumerate() {
            if e.coords.len() != d {
                return Err(Error::Instance(format!(
                    "target entry {i}: {} coords, law expects {d}",
                    e.coords.len()
                )));
            }
            if !e.coords.iter().all(|c| c.is_finite()) || !e.outcome.is_finite() {
                return Err(Error::Instance(format!("target entry {i}: non-finite value")));
            }
        }
        if self.metadata.synthetic {
            let pool_costs = self.resolved_costs()?;
            let median = median(&pool_costs);
            let min_target = self
                .target
                .iter()
                .map(|e| self.cost_model.cost(&ConfigPoint::new(e.coords.clone())))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if !(min_target > median) {
                return Err(Error::Instance(format!(
                    "synthetic instance violates the high-cost-target guard: \
                     min target cost {min_target} <= median pool cost {median}"
                )));
            }
        }
        Ok(())
    }

    /// Pool costs with omitted entries computed from the cost model.
    pub fn resolved_costs(&self) -> Result<Vec<f64>> {
        self.pool
            .iter()
            .map(|e| match e.cost {
                Some(c) => Ok(c),
                None => self.cost_model.cost(&ConfigPoint::new(e.coords.clone())),
            })
            .collect()
    }

    /// Runnable episode inputs.
    pub fn to_instance(&self) -> Result<Instance> {
        let costs = self.resolved_costs()?;
        Ok(Instance {
            name: self.metadata.name.clone(),
            spec: self.law.clone(),
            pool: self
                .pool
                .iter()
                .zip(costs)
                .map(|(e, cost)| Candidate {
                    x: ConfigPoint::new(e.coords.clone()),
                    cost,
                    outcome: e.outcome,
                })
                .collect(),
            target: self
                .target
                .iter()
                .map(|e| (ConfigPoint::new(e.coords.clone()), e.outcome))
                .collect(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Parses and validates an instance file.
pub fn load_validate(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path)?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    file.validate()?;
    Ok(file)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One coordinate axis of a design: `count` points from `min` to `max`,
/// spaced linearly or logarithmically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisDesign {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl AxisDesign {
    fn points(&self) -> Result<Vec<f64>> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Instance(format!(
                "axis range [{}, {}] must be finite with min < max",
                self.min, self.max
            )));
        }
        if self.count < 2 {
            return Err(Error::Instance("axis count must be >= 2".into()));
        }
        if self.log && self.min <= 0.0 {
            return Err(Error::Instance("log axis requires min > 0".into()));
        }
        let n = self.count;
        Ok((0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect())
    }
}

/// A deterministic set of design points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointSet {
    /// Cartesian product of per-coordinate axes.
    Grid { axes: Vec<AxisDesign> },
    /// Points with all coordinates equal, swept along one axis.
    Diagonal { axis: AxisDesign, dims: usize },
    /// Explicit coordinates.
    Explicit { points: Vec<Vec<f64>> },
    /// Concatenation of sub-designs.
    Union { parts: Vec<PointSet> },
}

impl PointSet {
    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        match self {
            PointSet::Grid { axes } => {
                if axes.is_empty() {
                    return Err(Error::Instance("grid needs at least one axis".into()));
                }
                let per_axis: Vec<Vec<f64>> =
                    axes.iter().map(AxisDesign::points).collect::<Result<_>>()?;
                let mut out = vec![Vec::new()];
                for axis in &per_axis {
                    let mut next = Vec::with_capacity(out.len() * axis.len());
                    for prefix in &out {
                        for &v in axis {
                            let mut p = prefix.clone();
                            p.push(v);
                            next.push(p);
                        }
                    }
                    out = next;
                }
                Ok(out)
            }
            PointSet::Diagonal { axis, dims } => {
                Ok(axis.points()?.into_iter().map(|v| vec![v; *dims]).collect())
            }
            PointSet::Explicit { points } => Ok(points.clone()),
            PointSet::Union { parts } => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.points()?);
                }
                Ok(out)
            }
        }
    }
}

/// Recipe for a synthetic instance: generating law and parameters, pool and
/// target designs, observation noise, and an optional misspecification hook
/// (generate with one family, declare another for fitting).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRecipe {
    pub name: String,
    pub law: LawSpec,
    pub cost_model: CostModel,
    pub true_theta: ParamVector,
    pub pool_design: PointSet,
    pub target_design: PointSet,
    pub noise_sigma: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_law: Option<LawSpec>,
}

impl SyntheticRecipe {
    pub fn load(path: &Path) -> Result<SyntheticRecipe> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Generates the instance: outcomes `y = f(x; theta*) + eps` with
/// `eps ~ N(0, sigma^2)` drawn deterministically from the seed (pool and
/// target use separate streams), costs from the cost model, and validation of
/// every instance invariant including the high-cost-target guard.
pub fn generate_instance(recipe: &SyntheticRecipe) -> Result<InstanceFile> {
    recipe.law.validate()?;
    if let Some(declared) = &recipe.declared_law {
        declared.validate()?;
        if declared.input_dim != recipe.law.input_dim {
            return Err(Error::Instance(
                "declared law must share the generator's input dimension".into(),
            ));
        }
    }
    if recipe.true_theta.len() != recipe.law.param_count() {
        return Err(Error::Instance(format!(
            "true_theta has {} entries, generator law expects {}",
            recipe.true_theta.len(),
            recipe.law.param_count()
        )));
    }
    if !(recipe.noise_sigma.is_finite() && recipe.noise_sigma >= 0.0) {
        return Err(Error::Instance("noise_sigma must be finite and >= 0".into()));
    }

    let outcomes = |design: &PointSet, stream: u64| -> Result<Vec<(Vec<f64>, f64)>> {
        let points = design.points()?;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(recipe.seed, stream));
        points
            .into_iter()
            .map(|coords| {
                let x = ConfigPoint::new(coords.clone());
                let mut y = law::evaluate(&recipe.law, &recipe.true_theta, &x)?;
                if recipe.noise_sigma > 0.0 {
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    y += recipe.noise_sigma * eps;
                }
                Ok((coords, y))
            })
            .collect()
    };

    let pool = outcomes(&recipe.pool_design, 0)?
        .into_iter()
        .map(|(coords, outcome)| PoolEntry { coords, cost: None, outcome })
        .collect();
    let target = outcomes(&recipe.target_design, 1)?
        .into_iter()
        .map(|(coords, outcome)| TargetEntry { coords, outcome })
        .collect();

    let well_specified = recipe.declared_law.is_none();
    let file = InstanceFile {
        schema_version: INSTANCE_SCHEMA_VERSION,
        metadata: InstanceMetadata {
            name: recipe.name.clone(),
            synthetic: true,
            noise_sigma: Some(recipe.noise_sigma),
            true_theta: well_specified.then(|| recipe.true_theta.clone()),
        },
        law: recipe.declared_law.clone().unwrap_or_else(|| recipe.law.clone()),
        cost_model: recipe.cost_model.clone(),
        pool,
        target,
    };
    file.validate()?;
    Ok(file)
}

/// Summary line used by the CLI after generating an instance.
pub fn instance_summary(file: &InstanceFile) -> Result<String> {
    let costs = file.resolved_costs()?;
    let mut sorted = costs.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let q = |f: f64| sorted[((sorted.len() - 1) as f64 * f).round() as usize];
    Ok(format!(
        "instance '{}': pool {} points, target {} points, cost quantiles [{:.3e}, {:.3e}, {:.3e}] (10/50/90%)",
        file.metadata.name,
        file.pool.len(),
        file.target.len(),
        q(0.1),
        q(0.5),
        q(0.9),
    ))
}

// ---------------------------------------------------------------------------
// Shipped instance suite
// ---------------------------------------------------------------------------

fn log_axis(min: f64, max: f64, count: usize) -> AxisDesign {
    AxisDesign { min, max, count, log: true }
}

fn power_sum_bounds(d: usize, e_hi: f64, a_hi: f64, alpha_hi: f64) -> Vec<(f64, f64)> {
    let mut b = vec![(-5.0, e_hi)];
    b.extend(std::iter::repeat_n((1e-2, a_hi), d));
    b.extend(std::iter::repeat_n((0.02, alpha_hi), d));
    b
}

/// The twelve shipped synthetic recipes: power-law, log-quadratic, and
/// saturating families across the heterogeneous cost models, including two
/// deliberately multimodal (exchangeable-exponent) and two deliberately
/// misspecified instances.
///
/// The noisy instances share a weak-asymptote structure: the pool covers the
/// steep cheap region of the curve while the target sits out where the
/// asymptote dominates, so the offset is identified only by the expensive
/// high-scale candidates and selection quality decides extrapolation quality.
pub fn shipped_recipes() -> Vec<SyntheticRecipe> {
    let mut recipes = Vec::new();

    // 1. Chinchilla-shaped two-axis power law, zero noise.
    recipes.push(SyntheticRecipe {
        name: "chinchilla_clean".into(),
        law: LawSpec::power_sum(2).with_bounds(power_sum_bounds(2, 20.0, 1e5, 1.5)),
        cost_model: CostModel::new(CostKind::Product6Nd, vec![0, 1]),
        true_theta: ParamVector::new(vec![1.7, 400.0, 350.0, 0.35, 0.30]),
        pool_design: PointSet::Grid {
            axes: vec![log_axis(1e5, 3e6, 8), log_axis(1e8, 3e9, 7)],
        },
        target_design: PointSet::Grid {
            axes: vec![log_axis(3e7, 1.2e8, 3), log_axis(3e10, 1.2e11, 3)],
        },
        noise_sigma: 0.0,
        seed: 101,
        declared_law: None,
    });

    // 2. Same geometry with observation noise; the offset is pinned down only
    // by points near the expensive end of the pool.
    recipes.push(SyntheticRecipe {
        name: "chinchilla_noisy".into(),
        law: LawSpec::power_sum(2).with_bounds(power_sum_bounds(2, 20.0, 1e5, 1.5)),
        cost_model: CostModel::new(CostKind::Product6Nd, vec![0, 1]),
        true_theta: ParamVector::new(vec![1.9, 310.0, 420.0, 0.33, 0.27]),
        pool_design: PointSet::Grid {
            axes: vec![log_axis(1e5, 3e6, 8), log_axis(1e8, 3e9, 7)],
        },
        target_design: PointSet::Grid {
            axes: vec![log_axis(3e7, 1.2e8, 3), log_axis(3e10, 1.2e11, 3)],
        },
        noise_sigma: 0.03,
        seed: 102,
        declared_law: None,
    });

    // 3. Vocabulary-style three-axis power law.
    recipes.push(SyntheticRecipe {
        name: "vocab_syn".into(),
        law: LawSpec::power_sum(3).with_bounds(power_sum_bounds(3, 20.0, 1e5, 1.5)),
        cost_model: CostModel::new(CostKind::Product6Nd, vec![0, 2]),
        true_theta: ParamVector::new(vec![1.2, 300.0, 15.0, 350.0, 0.33, 0.22, 0.28]),
        pool_design: PointSet::Grid {
            axes: vec![log_axis(1e5, 3e6, 4), log_axis(1e3, 3e4, 4), log_axis(1e8, 3e9, 4)],
        },
        target_design: PointSet::Grid {
            axes: vec![log_axis(3e7, 1e8, 2), log_axis(1e5, 3e5, 2), log_axis(3e10, 1e11, 2)],
        },
        noise_sigma: 0.02,
        seed: 103,
        declared_law: None,
    });

    // 4. Experts-vs-size power law with an NE cost proxy.
    recipes.push(SyntheticRecipe {
        name: "moe_syn".into(),
        law: LawSpec::power_sum(2).with_bounds(power_sum_bounds(2, 20.0, 1e5, 1.5)),
        cost_model: CostModel::new(CostKind::ProductNe, vec![0, 1]),
        true_theta: ParamVector::new(vec![0.8, 500.0, 4.0, 0.30, 0.40]),
        pool_design: PointSet::Grid {
            axes: vec![log_axis(1e6, 3e7, 8), log_axis(4.0, 32.0, 7)],
        },
        target_design: PointSet::Grid {
            axes: vec![log_axis(3e8, 1e9, 3), log_axis(64.0, 256.0, 3)],
        },
        noise_sigma: 0.02,
        seed: 104,
        declared_law: None,
    });

    // 5. Saturating power law on one axis, zero noise.
    recipes.push(SyntheticRecipe {
        name: "sat_clean".into(),
        law: LawSpec::saturating_power().with_bounds(vec![
            (-5.0, 20.0),
            (1e-2, 1e5),
            (1e2, 1e7),
            (0.02, 1.5),
        ]),
        cost_model: CostModel::new(CostKind::SingleN, vec![0]),
        true_theta: ParamVector::new(vec![1.5, 80.0, 5e5, 0.40]),
        pool_design: PointSet::Grid { axes: vec![log_axis(1e5, 1e7, 56)] },
        target_design: PointSet::Grid { axes: vec![log_axis(3e7, 1e8, 6)] },
        noise_sigma: 0.0,
        seed: 105,
        declared_law: None,
    });

    // 6. Learning-rate response surface: the optimum shifts with scale.
    // Covariates are (lr / 1e-3, N / 1e7) so the log coordinates stay O(1).
    recipes.push(SyntheticRecipe {
        name: "lr_surface_clean".into(),
        law: LawSpec::log_quadratic(2)
            .with_bounds(vec![(-6.0, 6.0), (-3.0, 3.0), (-3.0, 3.0), (-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)]),
        cost_model: CostModel::new(CostKind::SingleN, vec![1]),
        true_theta: ParamVector::new(vec![0.325, -0.1, -0.2, 0.1, 0.1, 0.025]),
        pool_design: PointSet::Grid {
            axes: vec![log_axis(0.1, 10.0, 10), log_axis(0.1, 10.0, 10)],
        },
        target_design: PointSet::Grid {
            axes: vec![log_axis(0.3, 3.0, 3), log_axis(20.0, 50.0, 3)],
        },
        noise_sigma: 0.0,
        seed: 106,
        declared_law: None,
    });

    // 7. Noisy response surface with deep scale extrapolation: the curvature
    // along the scale axis is weakly identified from the cheap region.
    recipes.push(SyntheticRecipe {
        name: "surface2_noisy".into(),
        law: LawSpec::log_quadratic(2)
            .with_bounds(vec![(-6.0, 6.0), (-3.0, 3.0), (-3.0, 3.0), (-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)]),
        cost_model: CostModel::new(CostKind::SingleN, vec![1]),
        true_theta: ParamVector::new(vec![0.4324, -0.108, -0.2286, 0.09, 0.081, 0.0182]),
        pool_design: PointSet::Grid {
            axes: vec![log_axis(0.1, 10.0, 8), log_axis(0.1, 10.0, 8)],
        },
        target_design: PointSet::Grid {
            axes: vec![log_axis(0.3, 3.0, 3), log_axis(30.0, 100.0, 3)],
        },
        noise_sigma: 0.02,
        seed: 107,
        declared_law: None,
    });

    // 8. Four-axis power law under the dual-sparse cost proxy.
    recipes.push(SyntheticRecipe {
        name: "sparsity_dual".into(),
        law: LawSpec::power_sum(4).with_bounds(power_sum_bounds(4, 20.0, 1e5, 1.5)),
        cost_model: CostModel::new(CostKind::DualSparse, vec![0, 1, 2, 3]),
        true_theta: ParamVector::new(vec![
            0.9, 200.0, 100.0, 50.0, 80.0, 0.30, 0.25, 0.35, 0.30,
        ]),
        pool_design: PointSet::Grid {
            axes: vec![
                log_axis(1e6, 3e7, 3),
                log_axis(1e8, 3e9, 3),
                log_axis(1e5, 3e6, 3),
                log_axis(1e7, 3e8, 3),
            ],
        },
        target_design: PointSet::Grid {
            axes: vec![
                log_axis(6e8, 1.8e9, 2),
                log_axis(6e10, 1.8e11, 2),
                log_axis(6e7, 1.8e8, 2),
                log_axis(6e9, 1.8e10, 2),
            ],
        },
        noise_sigma: 0.02,
        seed: 108,
        declared_law: None,
    });

    // 9/10. Exchangeable-exponent construction: the pool sits on the diagonal
    // x1 = x2 where the two amplitude/exponent pairings fit identically, plus
    // four expensive off-diagonal points that disambiguate. The target is
    // strongly off-diagonal, so the two basins extrapolate very differently;
    // the off-diagonal candidates cost more than a cost-ascending ladder ever
    // reaches within budget, but well under the budget itself.
    let twin = |name: &str, theta: Vec<f64>, noise: f64, seed: u64| SyntheticRecipe {
        name: name.into(),
        law: LawSpec::power_sum(2).with_bounds(power_sum_bounds(2, 20.0, 1e4, 1.5)),
        cost_model: CostModel::new(CostKind::Product6Nd, vec![0, 1]),
        true_theta: ParamVector::new(theta),
        pool_design: PointSet::Union {
            parts: vec![
                PointSet::Diagonal { axis: log_axis(1e2, 1e5, 50), dims: 2 },
                PointSet::Grid { axes: vec![log_axis(2e6, 3e6, 2), log_axis(1e3, 2e3, 2)] },
            ],
        },
        target_design: PointSet::Grid {
            axes: vec![log_axis(3e6, 3e7, 3), log_axis(1e2, 1e3, 3)],
        },
        noise_sigma: noise,
        seed,
        declared_law: None,
    };
    recipes.push(twin("twin_exponents_clean", vec![1.0, 30.0, 30.0, 0.25, 0.70], 0.0, 109));
    recipes.push(twin("twin_exponents_noisy", vec![1.2, 40.0, 40.0, 0.20, 0.80], 0.01, 110));

    // 11. Misspecified: generated by a saturating law whose cheap region is
    // bent, declared as a pure power law. A fit on everything chases the
    // cheap bend; points near the target identify the asymptotic decay.
    recipes.push(SyntheticRecipe {
        name: "bent_power_misspec".into(),
        law: LawSpec::saturating_power().with_bounds(vec![
            (-5.0, 20.0),
            (1e-2, 1e5),
            (1e2, 1e7),
            (0.02, 1.5),
        ]),
        cost_model: CostModel::new(CostKind::SingleN, vec![0]),
        true_theta: ParamVector::new(vec![0.5, 150.0, 300.0, 0.50]),
        pool_design: PointSet::Grid { axes: vec![log_axis(1e3, 1e5, 56)] },
        target_design: PointSet::Grid { axes: vec![log_axis(2e5, 1e6, 6)] },
        noise_sigma: 0.005,
        seed: 111,
        declared_law: Some(
            LawSpec::power_sum(1).with_bounds(power_sum_bounds(1, 20.0, 1e5, 1.5)),
        ),
    });

    // 12. Misspecified: log-space curvature declared as a straight power law.
    recipes.push(SyntheticRecipe {
        name: "log_bend_misspec".into(),
        law: LawSpec::log_quadratic(1).with_bounds(vec![(-6.0, 6.0), (-3.0, 3.0), (-2.0, 2.0)]),
        cost_model: CostModel::new(CostKind::SingleN, vec![0]),
        true_theta: ParamVector::new(vec![1.4, -0.35, 0.012]),
        pool_design: PointSet::Grid { axes: vec![log_axis(1.0, 100.0, 60)] },
        target_design: PointSet::Grid { axes: vec![log_axis(300.0, 1500.0, 6)] },
        noise_sigma: 0.015,
        seed: 112,
        declared_law: Some(
            LawSpec::power_sum(1).with_bounds(power_sum_bounds(1, 20.0, 1e5, 1.5)),
        ),
    });

    recipes
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Aggregated target-R^2 statistics for one (policy, budget fraction) cell,
/// pooled over every (instance, seed) episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub policy: String,
    pub fraction: f64,
    pub mean_r2: f64,
    /// Sample standard deviation (n - 1); 0 when n = 1.
    pub std_r2: f64,
    pub n: usize,
}

/// Pools all logs into per-policy per-checkpoint rows. Fails when the logs
/// disagree on the checkpoint fractions, naming the offenders.
pub fn aggregate(logs: &[EpisodeLog]) -> Result<Vec<ReportRow>> {
    if logs.is_empty() {
        return Err(Error::Report("no logs to aggregate".into()));
    }
    let reference = &logs[0].header.checkpoints;
    let offenders: Vec<String> = logs
        .iter()
        .filter(|l| &l.header.checkpoints != reference)
        .map(|l| {
            format!(
                "{}/{}/seed{} has checkpoints {:?}",
                l.header.instance,
                l.header.policy.name(),
                l.header.seed,
                l.header.checkpoints
            )
        })
        .collect();
    if !offenders.is_empty() {
        return Err(Error::Report(format!(
            "inconsistent checkpoint sets (expected {:?}): {}",
            reference,
            offenders.join("; ")
        )));
    }

    let mut policies: Vec<String> =
        logs.iter().map(|l| l.header.policy.name().to_string()).collect();
    policies.sort();
    policies.dedup();

    let mut rows = Vec::new();
    for policy in &policies {
        for &fraction in reference {
            let values: Vec<f64> = logs
                .iter()
                .filter(|l| l.header.policy.name() == policy)
                .flat_map(|l| {
                    l.checkpoints
                        .iter()
                        .filter(|c| c.budget_fraction == fraction)
                        .map(|c| c.r2)
                })
                .collect();
            if values.is_empty() {
                continue;
            }
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            rows.push(ReportRow {
                policy: policy.clone(),
                fraction,
                mean_r2: mean,
                std_r2: std,
                n,
            });
        }
    }
    Ok(rows)
}

/// Tab-delimited table: one row per (policy, fraction), `mean ± std` R^2.
pub fn render_table(rows: &[ReportRow]) -> String {
    let mut out = String::from("policy\tfraction\tr2\tn\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{:.2} ± {:.2}\t{}\n",
            r.policy, r.fraction, r.mean_r2, r.std_r2, r.n
        ));
    }
    out
}

/// CSV plot data: policy, fraction, mean_r2, std_r2, n.
pub fn render_curves(rows: &[ReportRow]) -> String {
    let mut out = String::from("policy,fraction,mean_r2,std_r2,n\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.policy, r.fraction, r.mean_r2, r.std_r2, r.n
        ));
    }
    out
}

/// Writes `report.tsv` and `curves.csv` under `out_dir`; returns their paths.
pub fn emit_report(logs: &[EpisodeLog], out_dir: &Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let rows = aggregate(logs)?;
    std::fs::create_dir_all(out_dir)?;
    let table_path = out_dir.join("report.tsv");
    let curves_path = out_dir.join("curves.csv");
    std::fs::write(&table_path, render_table(&rows))?;
    std::fs::write(&curves_path, render_curves(&rows))?;
    Ok((table_path, curves_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Checkpoint, EpisodeHeader, Policy};

    fn fake_log(policy: Policy, seed: u64, r2s: &[(f64, f64)]) -> EpisodeLog {
        EpisodeLog {
            header: EpisodeHeader {
                schema_version: 1,
                instance: "t".into(),
                policy,
                seed,
                alpha: 0.4,
                n_starts: 64,
                checkpoints: r2s.iter().map(|(f, _)| *f).collect(),
                c_total: 1.0,
                budget: 1.0,
                warm_start_planned: 0,
            },
            rounds: vec![],
            checkpoints: r2s
                .iter()
                .map(|&(f, r2)| Checkpoint {
                    budget_fraction: f,
                    r2,
                    rounds_used: 0,
                    best_theta: None,
                    spent: f,
                })
                .collect(),
            warm_start_truncated: false,
            fit_failures: 0,
        }
    }

    #[test]
    fn aggregate_single_log() {
        let logs = vec![fake_log(Policy::Random, 0, &[(0.1, 0.5)])];
        let rows = aggregate(&logs).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_r2, 0.5);
        assert_eq!(rows[0].std_r2, 0.0);
        assert!(render_table(&rows).contains("0.50 ± 0.00"));
    }

    #[test]
    fn aggregate_two_logs_sample_std() {
        let logs = vec![
            fake_log(Policy::Random, 0, &[(0.1, 0.4)]),
            fake_log(Policy::Random, 1, &[(0.1, 0.6)]),
        ];
        let rows = aggregate(&logs).unwrap();
        assert!((rows[0].mean_r2 - 0.5).abs() < 1e-15);
        assert!((rows[0].std_r2 - 0.02f64.sqrt()).abs() < 1e-15);
        assert!(render_table(&rows).contains("0.50 ± 0.14"));
    }

    #[test]
    fn aggregate_rejects_mismatched_checkpoints() {
        let logs = vec![
            fake_log(Policy::Random, 0, &[(0.1, 0.4)]),
            fake_log(Policy::Random, 7, &[(0.2, 0.6)]),
        ];
        let err = aggregate(&logs).unwrap_err().to_string();
        assert!(err.contains("seed7"), "offender named: {err}");
    }

    #[test]
    fn generated_zero_noise_outcomes_are_exact() {
        let recipe = &shipped_recipes()[0];
        assert_eq!(recipe.noise_sigma, 0.0);
        let file = generate_instance(recipe).unwrap();
        for e in &file.pool {
            let x = ConfigPoint::new(e.coords.clone());
            let y = law::evaluate(&recipe.law, &recipe.true_theta, &x).unwrap();
            assert_eq!(e.outcome, y);
        }
    }

    #[test]
    fn generation_is_bitwise_deterministic() {
        let recipe = &shipped_recipes()[1];
        let a = generate_instance(recipe).unwrap().to_json();
        let b = generate_instance(recipe).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn shipped_suite_is_valid_and_sized() {
        let recipes = shipped_recipes();
        assert_eq!(recipes.len(), 12);
        let mut misspecified = 0;
        for r in &recipes {
            let file = generate_instance(r).unwrap();
            file.validate().unwrap();
            let n = file.pool.len();
            assert!((50..=500).contains(&n), "{}: pool size {n}", r.name);
            if r.declared_law.is_some() {
                misspecified += 1;
            }
        }
        assert!(misspecified >= 2);
    }

    #[test]
    fn validation_names_offending_entry() {
        let recipe = &shipped_recipes()[0];
        let mut file = generate_instance(recipe).unwrap();
        file.pool[3].coords.pop();
        let err = file.validate().unwrap_err().to_string();
        assert!(err.contains("pool entry 3"), "{err}");

        let mut file = generate_instance(recipe).unwrap();
        file.pool[0].cost = Some(-2.0);
        assert!(file.validate().is_err());
    }

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let file = generate_instance(&shipped_recipes()[4]).unwrap();
        file.save(&path).unwrap();
        let back = load_validate(&path).unwrap();
        assert_eq!(file, back);
    }

    #[test]
    fn cost_recomputation_matches_model() {
        let file = generate_instance(&shipped_recipes()[0]).unwrap();
        let costs = file.resolved_costs().unwrap();
        for (e, c) in file.pool.iter().zip(costs) {
            let expect = file.cost_model.cost(&ConfigPoint::new(e.coords.clone())).unwrap();
            assert_eq!(c, expect);
        }
    }

    #[test]
    fn law_of_large_numbers_noise_mean() {
        // sigma = 0.1 over 10^4 points: |mean(y - f)| within 3 sigma / 100.
        let mut recipe = shipped_recipes()[0].clone();
        recipe.noise_sigma = 0.1;
        recipe.pool_design = PointSet::Grid {
            axes: vec![log_axis(1e6, 6.4e7, 100), log_axis(2e8, 1.28e10, 100)],
        };
        let file = generate_instance(&recipe).unwrap();
        assert_eq!(file.pool.len(), 10_000);
        let mut acc = 0.0;
        for e in &file.pool {
            let x = ConfigPoint::new(e.coords.clone());
            acc += e.outcome - law::evaluate(&recipe.law, &recipe.true_theta, &x).unwrap();
        }
        let mean = acc / 1e4;
        assert!(mean.abs() < 3.0 * 0.1 / 100.0, "noise mean {mean}");
    }
}
