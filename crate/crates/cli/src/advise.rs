//! Human-in-the-loop advisory mode. State lives in a session file; each
//! invocation is stateless and takes an exclusive lock so concurrent writers
//! are refused. Real pilot runs take hours to days, so a resident process
//! would be the wrong interaction model.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use lawdesign::acquisition::{score_candidates, GridConfig};
use lawdesign::engine::SelectionDetail;
use lawdesign::fitter::{self, Dataset};
use lawdesign::law::{ConfigPoint, CostModel, LawSpec};
use lawdesign::posterior::{estimate_posterior, EstimatorConfig};
use lawdesign::{mix_seed, warm_start_count};

pub const SESSION_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionCandidate {
    pub coords: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observation {
    pub candidate: usize,
    pub outcome: f64,
}

fn default_alpha() -> f64 {
    lawdesign::DEFAULT_ALPHA
}

fn default_n_starts() -> usize {
    lawdesign::DEFAULT_N_STARTS
}

/// A live design session: the law, the remaining pool, the budget, and the
/// observations recorded so far. Candidate outcomes are unknown until the
/// user runs the experiment and `record`s the result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Session {
    pub schema_version: u32,
    pub law: LawSpec,
    pub cost_model: CostModel,
    pub budget: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_n_starts")]
    pub n_starts: usize,
    #[serde(default)]
    pub seed: u64,
    pub candidates: Vec<SessionCandidate>,
    /// Target region the fitted law should extrapolate to.
    pub target: Vec<Vec<f64>>,
    #[serde(default)]
    pub observations: Vec<Observation>,
}

impl Session {
    fn load(path: &Path) -> Result<Session> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading session {}", path.display()))?;
        let session: Session = serde_json::from_str(&text)
            .with_context(|| format!("parsing session {}", path.display()))?;
        if session.schema_version != SESSION_SCHEMA_VERSION {
            bail!("unsupported session schema_version {}", session.schema_version);
        }
        session.law.validate()?;
        session.cost_model.validate(session.law.input_dim)?;
        if session.candidates.is_empty() {
            bail!("session has no candidates");
        }
        if session.target.is_empty() {
            bail!("session has no target points");
        }
        for obs in &session.observations {
            if obs.candidate >= session.candidates.len() {
                bail!("observation references unknown candidate {}", obs.candidate);
            }
        }
        Ok(session)
    }

    fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    fn cost_of(&self, i: usize) -> Result<f64> {
        match self.candidates[i].cost {
            Some(c) => Ok(c),
            None => Ok(self
                .cost_model
                .cost(&ConfigPoint::new(self.candidates[i].coords.clone()))?),
        }
    }

    fn spent(&self) -> Result<f64> {
        self.observations.iter().map(|o| self.cost_of(o.candidate)).sum()
    }

    fn observed(&self, i: usize) -> bool {
        self.observations.iter().any(|o| o.candidate == i)
    }

    /// Unobserved candidates affordable within the remaining budget.
    fn feasible(&self) -> Result<Vec<usize>> {
        let remaining = self.budget - self.spent()?;
        let limit = remaining + 1e-12 * self.budget.abs();
        let mut out = Vec::new();
        for i in 0..self.candidates.len() {
            if !self.observed(i) && self.cost_of(i)? <= limit {
                out.push(i);
            }
        }
        Ok(out)
    }
}

/// Exclusive lock guarding a session file; removed on drop.
struct SessionLock {
    path: PathBuf,
}

impl SessionLock {
    fn acquire(session_path: &Path) -> Result<SessionLock> {
        let path = session_path.with_extension("lock");
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(SessionLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => bail!(
                "session is locked by another process ({} exists); remove it if stale",
                path.display()
            ),
            Err(e) => Err(e).context("acquiring session lock"),
        }
    }
}

impl Drop for SessionLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

fn print_advice(session: &Session, index: usize, detail: &SelectionDetail) -> Result<()> {
    println!("advice: candidate {index}");
    println!("  coords: {:?}", session.candidates[index].coords);
    println!("  cost: {}", session.cost_of(index)?);
    if let (Some(intra), Some(inter), Some(score)) =
        (detail.dv_intra, detail.dv_inter, detail.score)
    {
        println!("  dv_intra: {intra}");
        println!("  dv_inter: {inter}");
        println!("  score: {score}");
    }
    Ok(())
}

fn cheapest_feasible(session: &Session, feasible: &[usize]) -> Result<usize> {
    let mut best = feasible[0];
    let mut best_cost = session.cost_of(best)?;
    for &i in &feasible[1..] {
        let c = session.cost_of(i)?;
        if c < best_cost {
            best = i;
            best_cost = c;
        }
    }
    Ok(best)
}

/// Prints the top-scoring feasible candidate for the session, or the next
/// warm-start point when fewer than `ceil(2.5 p)` observations exist.
pub fn cmd_advise(session_path: &Path) -> Result<ExitCode> {
    let _lock = SessionLock::acquire(session_path)?;
    let session = Session::load(session_path)?;

    let feasible = session.feasible()?;
    if feasible.is_empty() {
        println!("budget exhausted; no feasible unobserved candidates remain");
        return Ok(ExitCode::SUCCESS);
    }

    let p = session.law.param_count();
    let warm = warm_start_count(p);
    if session.observations.len() < warm {
        println!(
            "notice: {} of {} warm-start observations recorded; advising the cheapest feasible candidate",
            session.observations.len(),
            warm
        );
        let pick = cheapest_feasible(&session, &feasible)?;
        print_advice(&session, pick, &SelectionDetail::default())?;
        return Ok(ExitCode::SUCCESS);
    }

    // Same refit convention as the episode engine: the multistart seed is
    // derived from (session seed, observation count), so a session equal to
    // an episode prefix advises exactly the episode's next selection.
    let data = Dataset::new(
        session
            .observations
            .iter()
            .map(|o| {
                (ConfigPoint::new(session.candidates[o.candidate].coords.clone()), o.outcome)
            })
            .collect(),
    );
    let fit = fitter::fit_multistart(
        &session.law,
        &data,
        session.n_starts,
        mix_seed(session.seed, data.len() as u64),
    );
    if fit.results.is_empty() {
        println!("notice: no fit start converged; advising the cheapest feasible candidate");
        let pick = cheapest_feasible(&session, &feasible)?;
        print_advice(&session, pick, &SelectionDetail::default())?;
        return Ok(ExitCode::SUCCESS);
    }

    let target: Vec<ConfigPoint> =
        session.target.iter().map(|c| ConfigPoint::new(c.clone())).collect();
    let post = estimate_posterior(
        &session.law,
        &data,
        &fit.results,
        &target,
        &EstimatorConfig::default(),
    )?;

    let pool: Vec<(usize, ConfigPoint, f64)> = feasible
        .iter()
        .map(|&i| {
            Ok((i, ConfigPoint::new(session.candidates[i].coords.clone()), session.cost_of(i)?))
        })
        .collect::<Result<_>>()?;
    let scores = score_candidates(&post, &pool, session.alpha, &GridConfig::default())?;
    let best = scores
        .iter()
        .max_by(|a, b| a.score.partial_cmp(&b.score).expect("finite score"))
        .expect("non-empty feasible set");

    print_advice(
        &session,
        best.pool_index,
        &SelectionDetail {
            dv_intra: Some(best.dv_intra),
            dv_inter: Some(best.dv_inter),
            score: Some(best.score),
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

/// Appends a (candidate, outcome) observation to the session.
pub fn cmd_record(session_path: &Path, candidate: usize, outcome: f64) -> Result<ExitCode> {
    let _lock = SessionLock::acquire(session_path)?;
    let mut session = Session::load(session_path)?;
    if candidate >= session.candidates.len() {
        bail!("candidate {candidate} does not exist (pool size {})", session.candidates.len());
    }
    if session.observed(candidate) {
        bail!("candidate {candidate} is already recorded");
    }
    if !outcome.is_finite() {
        bail!("outcome must be finite");
    }
    session.observations.push(Observation { candidate, outcome });
    session.save(session_path)?;
    println!(
        "recorded candidate {candidate} -> {outcome} ({} observations total)",
        session.observations.len()
    );
    Ok(ExitCode::SUCCESS)
}
