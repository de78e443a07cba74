use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Deserialize;

use lawdesign::bench::{self, SyntheticRecipe};
use lawdesign::engine::{self, EpisodeConfig, EpisodeLog, Policy};
use lawdesign::posterior::{EstimatorConfig, WeightConfig, WeightScheme};
use lawdesign::acquisition::GridConfig;

/// Seeds as either a count (0..n) or an explicit list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SeedSpec {
    Count(usize),
    List(Vec<u64>),
}

impl SeedSpec {
    fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::Count(n) => (0..*n as u64).collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }
}

fn default_seeds() -> SeedSpec {
    SeedSpec::Count(10)
}

fn default_policies() -> Vec<Policy> {
    Policy::ALL.to_vec()
}

fn default_checkpoints() -> Vec<f64> {
    lawdesign::DEFAULT_CHECKPOINTS.to_vec()
}

fn default_alpha() -> f64 {
    lawdesign::DEFAULT_ALPHA
}

fn default_n_starts() -> usize {
    lawdesign::DEFAULT_N_STARTS
}

fn default_nodes() -> usize {
    GridConfig::default().target_nodes
}

fn default_weight_scheme() -> WeightScheme {
    WeightScheme::Bic
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Sweep configuration; defaults mirror the experiment protocol
/// (10 seeds, checkpoints 1/5/10%, alpha 0.4, 64 starts).
#[derive(Debug, Clone, Deserialize)]
struct RunConfig {
    instances: Vec<PathBuf>,
    #[serde(default = "default_policies")]
    policies: Vec<Policy>,
    #[serde(default = "default_seeds")]
    seeds: SeedSpec,
    #[serde(default = "default_checkpoints")]
    checkpoints: Vec<f64>,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_n_starts")]
    n_starts: usize,
    #[serde(default = "default_nodes")]
    quadrature_nodes: usize,
    #[serde(default = "default_weight_scheme")]
    weight_scheme: WeightScheme,
    #[serde(default = "default_out_dir")]
    out_dir: PathBuf,
}

impl RunConfig {
    fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig {
            checkpoints: self.checkpoints.clone(),
            alpha: self.alpha,
            n_starts: self.n_starts,
            estimator: EstimatorConfig {
                weights: WeightConfig { scheme: self.weight_scheme, temperature: 1.0 },
                ..EstimatorConfig::default()
            },
            grid: GridConfig { target_nodes: self.quadrature_nodes, ..GridConfig::default() },
        }
    }
}

pub fn cmd_generate(recipe: Option<PathBuf>, out: PathBuf, suite: bool) -> Result<ExitCode> {
    if suite {
        std::fs::create_dir_all(&out)
            .with_context(|| format!("creating output directory {}", out.display()))?;
        for recipe in bench::shipped_recipes() {
            let file = bench::generate_instance(&recipe)?;
            let path = out.join(format!("{}.json", file.metadata.name));
            file.save(&path)?;
            println!("{}", bench::instance_summary(&file)?);
            println!("wrote {}", path.display());
        }
        return Ok(ExitCode::SUCCESS);
    }
    let recipe_path = recipe.context("--recipe is required unless --suite is given")?;
    let recipe = SyntheticRecipe::load(&recipe_path)
        .with_context(|| format!("parsing recipe {}", recipe_path.display()))?;
    let file = bench::generate_instance(&recipe)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    file.save(&out)?;
    println!("{}", bench::instance_summary(&file)?);
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_run(config_path: &Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let config: RunConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", config_path.display()))?;
    if config.seeds.seeds().is_empty() {
        bail!("at least one seed is required");
    }

    // LAWDESIGN_OUT overrides the configured output directory.
    let out_dir = match std::env::var_os("LAWDESIGN_OUT") {
        Some(dir) => PathBuf::from(dir),
        None => config.out_dir.clone(),
    };
    let logs_dir = out_dir.join("logs");
    std::fs::create_dir_all(&logs_dir)?;

    let mut instances = Vec::new();
    for path in &config.instances {
        let file = bench::load_validate(path)
            .with_context(|| format!("loading instance {}", path.display()))?;
        instances.push(file.to_instance()?);
    }

    let cfg = config.episode_config();
    cfg.validate()?;
    let seeds = config.seeds.seeds();

    // The full cross product, in deterministic order.
    let mut jobs: Vec<(usize, Policy, u64)> = Vec::new();
    for i in 0..instances.len() {
        for &p in &config.policies {
            for &s in &seeds {
                jobs.push((i, p, s));
            }
        }
    }

    let outcomes: Vec<(String, Result<EpisodeLog, lawdesign::Error>)> = jobs
        .par_iter()
        .map(|&(i, policy, seed)| {
            let inst = &instances[i];
            let label = format!("{}_{}_{}", inst.name, policy.name(), seed);
            (label, engine::run_episode(inst, policy, &cfg, seed))
        })
        .collect();

    let mut logs = Vec::new();
    let mut failures = 0usize;
    for (label, outcome) in outcomes {
        match outcome {
            Ok(log) => {
                let path = logs_dir.join(format!("{label}.jsonl"));
                std::fs::write(&path, log.to_jsonl())?;
                logs.push(log);
            }
            Err(err) => {
                failures += 1;
                eprintln!("episode {label} failed: {err}");
            }
        }
    }

    if logs.is_empty() {
        bail!("every episode failed");
    }
    let (table, curves) = bench::emit_report(&logs, &out_dir)?;
    println!(
        "ran {} episodes ({failures} failed); report at {} and {}",
        logs.len(),
        table.display(),
        curves.display()
    );
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn cmd_report(log_paths: &[PathBuf], out: &Path) -> Result<ExitCode> {
    let mut files = Vec::new();
    for path in log_paths {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(path.clone());
        }
    }
    if files.is_empty() {
        bail!("no .jsonl logs found");
    }
    let mut logs = Vec::new();
    for path in &files {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        logs.push(
            EpisodeLog::from_jsonl(&text)
                .with_context(|| format!("parsing {}", path.display()))?,
        );
    }
    let (table, curves) = bench::emit_report(&logs, out)?;
    println!("aggregated {} logs; report at {} and {}", logs.len(), table.display(), curves.display());
    Ok(ExitCode::SUCCESS)
}
