//! Sequential-design episodes: warm start, the select/observe/refit loop,
//! budget accounting, checkpoint metrics, and the baseline policies.
//!
//! One episode is a single thread of control; independent episodes (other
//! seeds, instances, policies) can run in parallel with no shared state.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{self, GridConfig};
use crate::error::{Error, Result};
use crate::fitter::{self, Dataset, FitResult};
use crate::law::{self, ConfigPoint, LawSpec, ParamVector};
use crate::posterior::{self, EstimatorConfig, LocalGaussian, Posterior};
use crate::{mix_seed, warm_start_count, DEFAULT_ALPHA, DEFAULT_N_STARTS};

/// A runnable experiment: configuration, cost, and the recorded outcome
/// revealed once selected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub x: ConfigPoint,
    pub cost: f64,
    pub outcome: f64,
}

/// Everything an episode needs: the law, the candidate pool, and the
/// held-out target region with its true outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub spec: LawSpec,
    pub pool: Vec<Candidate>,
    pub target: Vec<(ConfigPoint, f64)>,
}

impl Instance {
    pub fn total_cost(&self) -> f64 {
        self.pool.iter().map(|c| c.cost).sum()
    }

    pub fn target_points(&self) -> Vec<ConfigPoint> {
        self.target.iter().map(|(x, _)| x.clone()).collect()
    }
}

/// Mutable pool bookkeeping for one episode.
#[derive(Debug, Clone)]
pub struct PoolState {
    pub candidates: Vec<Candidate>,
    pub selected: Vec<bool>,
    pub spent: f64,
    pub budget: f64,
}

impl PoolState {
    pub fn new(candidates: Vec<Candidate>, budget: f64) -> Self {
        let n = candidates.len();
        Self { candidates, selected: vec![false; n], spent: 0.0, budget }
    }

    /// Slack absorbing f64 summation error so an exactly-affordable pool
    /// remains selectable; never allows a meaningful overrun.
    fn slack(&self) -> f64 {
        1e-12 * self.budget.abs()
    }

    pub fn remaining(&self) -> f64 {
        self.budget - self.spent
    }

    /// Indices of unselected candidates whose cost fits the remaining budget.
    pub fn feasible(&self) -> Vec<usize> {
        let limit = self.remaining() + self.slack();
        (0..self.candidates.len())
            .filter(|&i| !self.selected[i] && self.candidates[i].cost <= limit)
            .collect()
    }

    /// Marks `i` selected, pays its cost, and returns the observation.
    pub fn select(&mut self, i: usize) -> (ConfigPoint, f64, f64) {
        assert!(!self.selected[i], "candidate {i} already selected");
        let c = &self.candidates[i];
        assert!(
            c.cost <= self.remaining() + self.slack(),
            "candidate {i} exceeds remaining budget"
        );
        self.selected[i] = true;
        self.spent += c.cost;
        (c.x.clone(), c.outcome, c.cost)
    }
}

/// Experiment-selection policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Ours,
    Random,
    Cheapest,
    CostRand,
    Dopt,
    Vopt,
}

impl Policy {
    pub const ALL: [Policy; 6] =
        [Policy::Ours, Policy::Random, Policy::Cheapest, Policy::CostRand, Policy::Dopt, Policy::Vopt];

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Ours => "ours",
            Policy::Random => "random",
            Policy::Cheapest => "cheapest",
            Policy::CostRand => "cost_rand",
            Policy::Dopt => "dopt",
            Policy::Vopt => "vopt",
        }
    }

    pub fn from_name(s: &str) -> Option<Policy> {
        Policy::ALL.into_iter().find(|p| p.name() == s)
    }

    /// The model-based methods buy the cheapest `ceil(2.5 p)` points first.
    pub fn uses_warm_start(&self) -> bool {
        matches!(self, Policy::Ours | Policy::Dopt | Policy::Vopt)
    }
}

/// Per-episode configuration; the defaults are the experiment protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeConfig {
    /// Budget fractions at which metrics are recorded, ascending in (0, 1].
    pub checkpoints: Vec<f64>,
    pub alpha: f64,
    pub n_starts: usize,
    pub estimator: EstimatorConfig,
    pub grid: GridConfig,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            checkpoints: crate::DEFAULT_CHECKPOINTS.to_vec(),
            alpha: DEFAULT_ALPHA,
            n_starts: DEFAULT_N_STARTS,
            estimator: EstimatorConfig::default(),
            grid: GridConfig::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.checkpoints.is_empty() {
            return Err(Error::Instance("at least one checkpoint fraction required".into()));
        }
        if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Instance("checkpoint fractions must be strictly ascending".into()));
        }
        if self.checkpoints.iter().any(|&f| f <= 0.0 || f > 1.0) {
            return Err(Error::Instance("checkpoint fractions must lie in (0, 1]".into()));
        }
        if self.alpha < 0.0 {
            return Err(Error::Instance("alpha must be >= 0".into()));
        }
        if self.n_starts == 0 {
            return Err(Error::Instance("n_starts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Metrics recorded the first time spend crosses a budget fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub budget_fraction: f64,
    /// Target-region R^2, clipped to [-1, 1].
    pub r2: f64,
    pub rounds_used: usize,
    /// Best-fit parameters at the crossing; absent if no start ever converged.
    pub best_theta: Option<ParamVector>,
    pub spent: f64,
}

/// One selection event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub pool_index: usize,
    pub cost: f64,
    pub spent: f64,
    pub warm_start: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_mse: Option<f64>,
    /// Basin count of the posterior used for this selection (ours only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dv_intra: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dv_inter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeHeader {
    pub schema_version: u32,
    pub instance: String,
    pub policy: Policy,
    pub seed: u64,
    pub alpha: f64,
    pub n_starts: usize,
    pub checkpoints: Vec<f64>,
    pub c_total: f64,
    pub budget: f64,
    pub warm_start_planned: usize,
}

/// Ordered record of one episode; serializes to line-delimited JSON with a
/// header line, one line per round, and a footer carrying the checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub header: EpisodeHeader,
    pub rounds: Vec<RoundRecord>,
    pub checkpoints: Vec<Checkpoint>,
    pub warm_start_truncated: bool,
    pub fit_failures: usize,
}

pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LogLine {
    Header(EpisodeHeader),
    Round(RoundRecord),
    Footer { checkpoints: Vec<Checkpoint>, warm_start_truncated: bool, fit_failures: usize },
}

impl EpisodeLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &LogLine| {
            out.push_str(&serde_json::to_string(line).expect("log serializes"));
            out.push('\n');
        };
        push(&LogLine::Header(self.header.clone()));
        for r in &self.rounds {
            push(&LogLine::Round(r.clone()));
        }
        push(&LogLine::Footer {
            checkpoints: self.checkpoints.clone(),
            warm_start_truncated: self.warm_start_truncated,
            fit_failures: self.fit_failures,
        });
        out
    }

    pub fn from_jsonl(text: &str) -> Result<EpisodeLog> {
        let mut header = None;
        let mut rounds = Vec::new();
        let mut footer = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            match serde_json::from_str::<LogLine>(line)? {
                LogLine::Header(h) => header = Some(h),
                LogLine::Round(r) => rounds.push(r),
                LogLine::Footer { checkpoints, warm_start_truncated, fit_failures } => {
                    footer = Some((checkpoints, warm_start_truncated, fit_failures))
                }
            }
        }
        let header = header.ok_or_else(|| Error::Report("log missing header line".into()))?;
        let (checkpoints, warm_start_truncated, fit_failures) =
            footer.ok_or_else(|| Error::Report("log missing footer line".into()))?;
        Ok(EpisodeLog { header, rounds, checkpoints, warm_start_truncated, fit_failures })
    }
}

/// Target-region R^2 of `theta`, clipped to [-1, 1]. A zero-variance target
/// scores 1 when the residuals vanish and -1 otherwise. Non-finite
/// predictions count as arbitrarily bad (clip to -1).
pub fn target_r2(spec: &LawSpec, theta: &ParamVector, target: &[(ConfigPoint, f64)]) -> Result<f64> {
    if target.is_empty() {
        return Err(Error::Instance("target region is empty".into()));
    }
    let n = target.len() as f64;
    let mean = target.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sse = 0.0;
    let mut sst = 0.0;
    for (x, y) in target {
        let pred = match law::evaluate(spec, theta, x) {
            Ok(v) => v,
            Err(_) => return Ok(-1.0),
        };
        sse += (pred - y) * (pred - y);
        sst += (y - mean) * (y - mean);
    }
    if !sse.is_finite() {
        return Ok(-1.0);
    }
    let r2 = if sst == 0.0 {
        if sse == 0.0 {
            1.0
        } else {
            -1.0
        }
    } else {
        1.0 - sse / sst
    };
    Ok(r2.clamp(-1.0, 1.0))
}

/// Selection inputs a policy may need beyond the pool itself.
pub enum SelectionContext<'a> {
    /// Heuristic policies need nothing.
    None,
    /// Full basin mixture (ours).
    Posterior(&'a Posterior),
    /// Single local linearization at the current best fit (dopt/vopt).
    BestFit { local: &'a LocalGaussian, sigma2: f64 },
}

/// Details of the winning candidate, for the episode log.
#[derive(Debug, Clone, Default)]
pub struct SelectionDetail {
    pub dv_intra: Option<f64>,
    pub dv_inter: Option<f64>,
    pub score: Option<f64>,
}

/// Picks the next experiment among feasible unselected candidates.
/// Returns `None` when nothing is feasible (normal termination).
pub fn step(
    policy: Policy,
    state: &PoolState,
    ctx: &SelectionContext<'_>,
    spec: &LawSpec,
    target: &[ConfigPoint],
    alpha: f64,
    grid: &GridConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(usize, SelectionDetail)>> {
    let feasible = state.feasible();
    if feasible.is_empty() {
        return Ok(None);
    }
    let detail = SelectionDetail::default();
    let pick = match (policy, ctx) {
        (Policy::Random, _) => feasible[rng.random_range(0..feasible.len())],
        (Policy::Cheapest, _) => {
            let min_cost = feasible
                .iter()
                .map(|&i| state.candidates[i].cost)
                .fold(f64::INFINITY, f64::min);
            let ties: Vec<usize> = feasible
                .iter()
                .copied()
                .filter(|&i| state.candidates[i].cost == min_cost)
                .collect();
            ties[rng.random_range(0..ties.len())]
        }
        (Policy::CostRand, _) => {
            let weights: Vec<f64> = feasible.iter().map(|&i| 1.0 / state.candidates[i].cost).collect();
            let total: f64 = weights.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut chosen = feasible[feasible.len() - 1];
            for (&i, w) in feasible.iter().zip(&weights) {
                if u < *w {
                    chosen = i;
                    break;
                }
                u -= w;
            }
            chosen
        }
        (Policy::Ours, SelectionContext::Posterior(post)) => {
            let pool: Vec<(usize, ConfigPoint, f64)> = feasible
                .iter()
                .map(|&i| (i, state.candidates[i].x.clone(), state.candidates[i].cost))
                .collect();
            let scores = acquisition::score_candidates(post, &pool, alpha, grid)?;
            let best = scores
                .iter()
                .max_by(|a, b| a.score.partial_cmp(&b.score).expect("finite score"))
                .expect("non-empty scores");
            return Ok(Some((
                best.pool_index,
                SelectionDetail {
                    dv_intra: Some(best.dv_intra),
                    dv_inter: Some(best.dv_inter),
                    score: Some(best.score),
                },
            )));
        }
        (Policy::Dopt, SelectionContext::BestFit { local, sigma2 }) => {
            argmax_scored(&feasible, |i| {
                let c = &state.candidates[i];
                Ok(acquisition::dopt_score(spec, *sigma2, local, &c.x)? / c.cost.powf(alpha))
            })?
        }
        (Policy::Vopt, SelectionContext::BestFit { local, sigma2 }) => {
            argmax_scored(&feasible, |i| {
                let c = &state.candidates[i];
                Ok(acquisition::vopt_score(spec, *sigma2, local, target, &c.x)?
                    / c.cost.powf(alpha))
            })?
        }
        // Model-based policy without a usable model (every start failed so
        // far): fall back to the cheapest feasible point.
        (Policy::Ours | Policy::Dopt | Policy::Vopt, _) => {
            let mut best = feasible[0];
            for &i in &feasible[1..] {
                if state.candidates[i].cost < state.candidates[best].cost {
                    best = i;
                }
            }
            best
        }
    };
    Ok(Some((pick, detail)))
}

fn argmax_scored<F>(feasible: &[usize], mut score: F) -> Result<usize>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut best_i = feasible[0];
    let mut best_s = score(best_i)?;
    for &i in &feasible[1..] {
        let s = score(i)?;
        if s > best_s {
            best_s = s;
            best_i = i;
        }
    }
    Ok(best_i)
}

/// Selects the `ceil(2.5 p)` cheapest feasible candidates (ties by pool
/// index) without consulting the model. Returns the chosen indices in
/// selection order and whether the phase was cut short by the budget.
pub fn warm_start(state: &mut PoolState, param_count: usize) -> (Vec<usize>, bool) {
    let want = warm_start_count(param_count);
    let mut chosen = Vec::with_capacity(want);
    while chosen.len() < want {
        let feasible = state.feasible();
        let Some(&pick) = feasible.iter().min_by(|&&a, &&b| {
            state.candidates[a]
                .cost
                .partial_cmp(&state.candidates[b].cost)
                .expect("finite cost")
                .then(a.cmp(&b))
        }) else {
            return (chosen, true);
        };
        state.select(pick);
        chosen.push(pick);
    }
    (chosen, false)
}

struct FitState {
    fits: Vec<FitResult>,
    /// Dataset size the fits were computed at.
    at: usize,
    failures: usize,
}

impl FitState {
    fn refresh(&mut self, spec: &LawSpec, data: &Dataset, n_starts: usize, seed: u64) {
        if self.at == data.len() || data.is_empty() {
            return;
        }
        let fit = fitter::fit_multistart(spec, data, n_starts, mix_seed(seed, data.len() as u64));
        if fit.results.is_empty() {
            // Keep the previous round's fits; the caller flags it.
            self.failures += 1;
        } else {
            self.fits = fit.results;
        }
        self.at = data.len();
    }

    fn best(&self) -> Option<&FitResult> {
        fitter::best_fit(&self.fits).ok()
    }
}

/// Runs a full episode of `policy` on `instance` with budget
/// `max(checkpoint fractions) * total pool cost`. Deterministic given `seed`.
pub fn run_episode(
    instance: &Instance,
    policy: Policy,
    cfg: &EpisodeConfig,
    seed: u64,
) -> Result<EpisodeLog> {
    cfg.validate()?;
    instance.spec.validate()?;
    let p = instance.spec.param_count();
    let c_total = instance.total_cost();
    let budget = cfg.checkpoints.last().unwrap() * c_total;
    let target_pts = instance.target_points();

    let mut state = PoolState::new(instance.pool.clone(), budget);
    let mut data = Dataset::new(Vec::new());
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, u64::MAX));
    let mut fit_state = FitState { fits: Vec::new(), at: 0, failures: 0 };
    let mut posterior: Option<Posterior> = None;

    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut checkpoints: Vec<Checkpoint> = Vec::new();
    let mut next_fraction = 0usize;
    let mut warm_truncated = false;

    let record_crossings = |checkpoints: &mut Vec<Checkpoint>,
                            next_fraction: &mut usize,
                            state: &PoolState,
                            fit_state: &FitState,
                            rounds_used: usize,
                            force_rest: bool|
     -> Result<()> {
        while *next_fraction < cfg.checkpoints.len() {
            let frac = cfg.checkpoints[*next_fraction];
            let crossed = state.spent / c_total >= frac - 1e-12;
            if !(crossed || force_rest) {
                break;
            }
            let (r2, best_theta) = match fit_state.best() {
                Some(b) => (target_r2(&instance.spec, &b.theta, &instance.target)?, Some(b.theta.clone())),
                None => (-1.0, None),
            };
            checkpoints.push(Checkpoint {
                budget_fraction: frac,
                r2,
                rounds_used,
                best_theta,
                spent: state.spent,
            });
            *next_fraction += 1;
        }
        Ok(())
    };

    // Warm start for the model-based policies; spend counts toward the
    // budget and a crossing mid-phase triggers an immediate refit so the
    // recorded metric reflects the data held at that point.
    if policy.uses_warm_start() {
        let want = warm_start_count(p);
        for _ in 0..want {
            let feasible = state.feasible();
            let Some(&pick) = feasible.iter().min_by(|&&a, &&b| {
                state.candidates[a]
                    .cost
                    .partial_cmp(&state.candidates[b].cost)
                    .expect("finite cost")
                    .then(a.cmp(&b))
            }) else {
                warm_truncated = true;
                break;
            };
            let (x, y, cost) = state.select(pick);
            data.points.push((x, y));
            rounds.push(RoundRecord {
                round: rounds.len(),
                pool_index: pick,
                cost,
                spent: state.spent,
                warm_start: true,
                best_mse: None,
                k: None,
                weights: None,
                dv_intra: None,
                dv_inter: None,
                score: None,
            });
            if next_fraction < cfg.checkpoints.len()
                && state.spent / c_total >= cfg.checkpoints[next_fraction] - 1e-12
            {
                fit_state.refresh(&instance.spec, &data, cfg.n_starts, seed);
                record_crossings(
                    &mut checkpoints,
                    &mut next_fraction,
                    &state,
                    &fit_state,
                    rounds.len(),
                    false,
                )?;
            }
        }
    }

    loop {
        fit_state.refresh(&instance.spec, &data, cfg.n_starts, seed);
        record_crossings(&mut checkpoints, &mut next_fraction, &state, &fit_state, rounds.len(), false)?;

        if state.feasible().is_empty() {
            break;
        }

        // Build the selection context from the current fits.
        let sigma2 = fit_state
            .best()
            .map(|b| b.mse.max(cfg.estimator.sigma2_floor))
            .unwrap_or(cfg.estimator.sigma2_floor);
        let mut best_local: Option<LocalGaussian> = None;
        let ctx = match policy {
            Policy::Ours => {
                if !fit_state.fits.is_empty() {
                    match posterior::estimate_posterior(
                        &instance.spec,
                        &data,
                        &fit_state.fits,
                        &target_pts,
                        &cfg.estimator,
                    ) {
                        Ok(post) => posterior = Some(post),
                        Err(_) => {} // keep scoring on the stale posterior
                    }
                }
                match &posterior {
                    Some(post) => SelectionContext::Posterior(post),
                    None => SelectionContext::None,
                }
            }
            Policy::Dopt | Policy::Vopt => {
                if let Some(best) = fit_state.best() {
                    best_local = posterior::local_covariance(
                        &instance.spec,
                        &data,
                        best,
                        sigma2,
                        cfg.estimator.prior_precision,
                    )
                    .ok();
                }
                match &best_local {
                    Some(local) => SelectionContext::BestFit { local, sigma2 },
                    None => SelectionContext::None,
                }
            }
            _ => SelectionContext::None,
        };

        let Some((pick, detail)) = step(
            policy,
            &state,
            &ctx,
            &instance.spec,
            &target_pts,
            cfg.alpha,
            &cfg.grid,
            &mut rng,
        )?
        else {
            break;
        };

        let (x, y, cost) = state.select(pick);
        data.points.push((x, y));
        let (k, weights) = match (&policy, &posterior) {
            (Policy::Ours, Some(post)) => {
                (Some(post.k()), Some(post.basins.iter().map(|b| b.weight).collect()))
            }
            _ => (None, None),
        };
        rounds.push(RoundRecord {
            round: rounds.len(),
            pool_index: pick,
            cost,
            spent: state.spent,
            warm_start: false,
            best_mse: fit_state.best().map(|b| b.mse),
            k,
            weights,
            dv_intra: detail.dv_intra,
            dv_inter: detail.dv_inter,
            score: detail.score,
        });
    }

    // Budget can no longer be spent: remaining fractions report the terminal
    // fit ("performance at x% budget" once x% is out of reach).
    fit_state.refresh(&instance.spec, &data, cfg.n_starts, seed);
    record_crossings(&mut checkpoints, &mut next_fraction, &state, &fit_state, rounds.len(), true)?;

    Ok(EpisodeLog {
        header: EpisodeHeader {
            schema_version: LOG_SCHEMA_VERSION,
            instance: instance.name.clone(),
            policy,
            seed,
            alpha: cfg.alpha,
            n_starts: cfg.n_starts,
            checkpoints: cfg.checkpoints.clone(),
            c_total,
            budget,
            warm_start_planned: if policy.uses_warm_start() { warm_start_count(p) } else { 0 },
        },
        rounds,
        checkpoints,
        warm_start_truncated: warm_truncated,
        fit_failures: fit_state.failures,
    })
}

/// Target R^2 of the law fitted on the entire pool: the full-information
/// reference (not an oracle upper bound). `fit_seed` feeds the multi-start
/// sampler directly.
pub fn all_data_reference(instance: &Instance, cfg: &EpisodeConfig, fit_seed: u64) -> Result<f64> {
    let data = Dataset::new(instance.pool.iter().map(|c| (c.x.clone(), c.outcome)).collect());
    let fit = fitter::fit_multistart(&instance.spec, &data, cfg.n_starts, fit_seed);
    let best = fitter::best_fit(&fit.results)
        .map_err(|_| Error::Fit("no start converged on the full pool".into()))?;
    target_r2(&instance.spec, &best.theta, &instance.target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_instance() -> Instance {
        // y = 2 + x, five cheap points plus target beyond the pool.
        let spec = LawSpec::linear(1);
        let pool = (1..=5)
            .map(|i| {
                let x = ConfigPoint::new(vec![i as f64]);
                Candidate { outcome: 2.0 + i as f64, cost: i as f64, x }
            })
            .collect();
        let target = vec![
            (ConfigPoint::new(vec![10.0]), 12.0),
            (ConfigPoint::new(vec![12.0]), 14.0),
        ];
        Instance { name: "tiny".into(), spec, pool, target }
    }

    #[test]
    fn warm_start_counts_and_tie_break() {
        let inst = tiny_instance();
        let mut state = PoolState::new(inst.pool.clone(), 1e9);
        let (chosen, truncated) = warm_start(&mut state, 1); // ceil(2.5) = 3
        assert_eq!(chosen, vec![0, 1, 2]);
        assert!(!truncated);

        // Equal costs: first pool indices win.
        let pool: Vec<Candidate> = (0..6)
            .map(|i| Candidate { x: ConfigPoint::new(vec![i as f64 + 1.0]), cost: 2.0, outcome: 0.0 })
            .collect();
        let mut state = PoolState::new(pool, 1e9);
        let (chosen, _) = warm_start(&mut state, 2); // ceil(5) = 5
        assert_eq!(chosen, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn step_single_feasible_under_every_policy() {
        let inst = tiny_instance();
        for policy in Policy::ALL {
            let mut state = PoolState::new(inst.pool.clone(), 1e9);
            for i in 0..4 {
                state.select(i);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let got = step(
                policy,
                &state,
                &SelectionContext::None,
                &inst.spec,
                &inst.target_points(),
                0.4,
                &GridConfig::default(),
                &mut rng,
            )
            .unwrap();
            assert_eq!(got.unwrap().0, 4, "policy {policy:?}");
        }
    }

    #[test]
    fn step_cheapest_picks_minimum() {
        let pool = vec![
            Candidate { x: ConfigPoint::new(vec![1.0]), cost: 5.0, outcome: 0.0 },
            Candidate { x: ConfigPoint::new(vec![2.0]), cost: 2.0, outcome: 0.0 },
            Candidate { x: ConfigPoint::new(vec![3.0]), cost: 9.0, outcome: 0.0 },
        ];
        let state = PoolState::new(pool, 100.0);
        let spec = LawSpec::linear(1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let got = step(
            Policy::Cheapest,
            &state,
            &SelectionContext::None,
            &spec,
            &[],
            0.4,
            &GridConfig::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(got.unwrap().0, 1);
    }

    #[test]
    fn r2_trivial_values() {
        let spec = LawSpec::linear(1);
        let target =
            vec![(ConfigPoint::new(vec![1.0]), 3.0), (ConfigPoint::new(vec![2.0]), 4.0)];
        // Perfect predictions.
        let theta = ParamVector::new(vec![2.0, 1.0]);
        assert_eq!(target_r2(&spec, &theta, &target).unwrap(), 1.0);
        // Predicting the target mean everywhere: R^2 = 0.
        let theta = ParamVector::new(vec![3.5, 0.0]);
        assert!((target_r2(&spec, &theta, &target).unwrap()).abs() < 1e-12);
        // Arbitrarily bad fit clips to -1.
        let theta = ParamVector::new(vec![1000.0, 0.0]);
        assert_eq!(target_r2(&spec, &theta, &target).unwrap(), -1.0);
        // Degenerate zero-variance target.
        let flat = vec![(ConfigPoint::new(vec![1.0]), 2.0), (ConfigPoint::new(vec![2.0]), 2.0)];
        let exact = ParamVector::new(vec![2.0, 0.0]);
        assert_eq!(target_r2(&spec, &exact, &flat).unwrap(), 1.0);
        let off = ParamVector::new(vec![2.5, 0.0]);
        assert_eq!(target_r2(&spec, &off, &flat).unwrap(), -1.0);
        assert!(target_r2(&spec, &exact, &[]).is_err());
    }

    #[test]
    fn full_pool_episode_matches_all_data_reference() {
        let inst = tiny_instance();
        let cfg = EpisodeConfig {
            checkpoints: vec![1.0],
            n_starts: 8,
            ..EpisodeConfig::default()
        };
        let log = run_episode(&inst, Policy::Random, &cfg, 3).unwrap();
        assert_eq!(log.rounds.len(), 5, "all five points selected");
        let final_cp = log.checkpoints.last().unwrap();
        let fit_seed = mix_seed(3, inst.pool.len() as u64);
        let reference = all_data_reference(&inst, &cfg, fit_seed).unwrap();
        assert!((final_cp.r2 - reference).abs() < 1e-9);
    }

    #[test]
    fn budget_safety_and_no_reselection() {
        let inst = tiny_instance();
        let cfg = EpisodeConfig {
            checkpoints: vec![0.3, 0.6],
            n_starts: 4,
            ..EpisodeConfig::default()
        };
        for policy in Policy::ALL {
            let log = run_episode(&inst, policy, &cfg, 9).unwrap();
            let budget = 0.6 * inst.total_cost();
            let mut seen = std::collections::HashSet::new();
            let mut spent = 0.0;
            for r in &log.rounds {
                assert!(seen.insert(r.pool_index), "{policy:?} reselected {}", r.pool_index);
                spent += r.cost;
                assert!(spent <= budget * (1.0 + 1e-9), "{policy:?} overspent");
            }
            // Checkpoints recorded in ascending order of spend.
            assert!(log
                .checkpoints
                .windows(2)
                .all(|w| w[0].spent <= w[1].spent + 1e-12));
            assert_eq!(log.checkpoints.len(), 2);
        }
    }

    #[test]
    fn replay_is_bitwise_identical() {
        let inst = tiny_instance();
        let cfg = EpisodeConfig { n_starts: 8, ..EpisodeConfig::default() };
        for policy in [Policy::Ours, Policy::Random, Policy::CostRand] {
            let a = run_episode(&inst, policy, &cfg, 17).unwrap().to_jsonl();
            let b = run_episode(&inst, policy, &cfg, 17).unwrap().to_jsonl();
            assert_eq!(a, b, "{policy:?} not replayable");
        }
    }

    #[test]
    fn log_round_trips_through_jsonl() {
        let inst = tiny_instance();
        let cfg = EpisodeConfig { n_starts: 4, ..EpisodeConfig::default() };
        let log = run_episode(&inst, Policy::Ours, &cfg, 2).unwrap();
        let text = log.to_jsonl();
        let back = EpisodeLog::from_jsonl(&text).unwrap();
        assert_eq!(log, back);
    }

    #[test]
    fn cost_scaling_leaves_model_based_selection_unchanged() {
        let inst = tiny_instance();
        let cfg = EpisodeConfig { n_starts: 8, ..EpisodeConfig::default() };
        for policy in [Policy::Ours, Policy::Dopt, Policy::Vopt] {
            let base = run_episode(&inst, policy, &cfg, 5).unwrap();
            let mut scaled = inst.clone();
            for c in scaled.pool.iter_mut() {
                c.cost *= 37.5;
            }
            let log = run_episode(&scaled, policy, &cfg, 5).unwrap();
            let a: Vec<usize> = base.rounds.iter().map(|r| r.pool_index).collect();
            let b: Vec<usize> = log.rounds.iter().map(|r| r.pool_index).collect();
            assert_eq!(a, b, "{policy:?} selection changed under cost scaling");
        }
    }
}
