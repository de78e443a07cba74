use lawdesign::bench::{generate_instance, shipped_recipes};
use lawdesign::engine::{all_data_reference, run_episode, EpisodeConfig, Policy};
use lawdesign::mix_seed;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seeds: u64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(3);
    let only: Option<String> = args.get(2).cloned();
    let policies = [Policy::Ours, Policy::Vopt, Policy::Random, Policy::Cheapest];
    let cfg = EpisodeConfig::default();
    let recipes: Vec<_> = shipped_recipes()
        .into_iter()
        .filter(|r| only.as_deref().map_or(true, |o| r.name.contains(o)))
        .collect();
    let instances: Vec<_> = recipes.iter().map(|r| generate_instance(r).unwrap().to_instance().unwrap()).collect();

    let mut jobs = vec![];
    for (i, _) in instances.iter().enumerate() {
        for &p in &policies {
            for s in 0..seeds {
                jobs.push((i, p, s));
            }
        }
    }
    let t0 = Instant::now();
    let results: Vec<(usize, Policy, u64, Vec<(f64, f64)>, usize, u128)> = jobs
        .par_iter()
        .map(|&(i, p, s)| {
            let t = Instant::now();
            let log = run_episode(&instances[i], p, &cfg, s).unwrap();
            let cps = log.checkpoints.iter().map(|c| (c.budget_fraction, c.r2)).collect();
            (i, p, s, cps, log.rounds.len(), t.elapsed().as_millis())
        })
        .collect();
    println!("total wall: {:.1}s", t0.elapsed().as_secs_f64());

    let all_data: Vec<f64> = instances
        .par_iter()
        .map(|inst| all_data_reference(inst, &cfg, mix_seed(0, inst.pool.len() as u64)).unwrap_or(f64::NAN))
        .collect();

    let mut table: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut rounds: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut times: BTreeMap<String, u128> = BTreeMap::new();
    for (i, p, _s, cps, nr, ms) in &results {
        let r2 = cps.iter().find(|(f, _)| (*f - 0.10).abs() < 1e-9).map(|(_, r)| *r).unwrap();
        table.entry((instances[*i].name.clone(), p.name().into())).or_default().push(r2);
        *rounds.entry((instances[*i].name.clone(), p.name().into())).or_default() += nr;
        *times.entry(instances[*i].name.clone()).or_default() += ms;
    }
    println!("{:<22} {:>7} {:>7} {:>7} {:>7} {:>8} {:>7}  rounds(o/v/r/c)", "instance", "ours", "vopt", "random", "cheap", "all_data", "ms");
    let mut overall: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (idx, inst) in instances.iter().enumerate() {
        let mut row = format!("{:<22}", inst.name);
        let mut rd = String::new();
        for p in ["ours", "vopt", "random", "cheapest"] {
            let vals = &table[&(inst.name.clone(), p.to_string())];
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            overall.entry(p.into()).or_default().extend(vals);
            row += &format!(" {:>7.3}", mean);
            rd += &format!("{}/", rounds[&(inst.name.clone(), p.to_string())] / seeds as usize);
        }
        row += &format!(" {:>8.3} {:>7}  {}", all_data[idx], times[&inst.name], rd);
        println!("{row}");
    }
    println!("--- pooled means at 10% ---");
    for p in ["ours", "vopt", "random", "cheapest"] {
        let vals = &overall[p];
        println!("{p}: {:.4} (n={})", vals.iter().sum::<f64>() / vals.len() as f64, vals.len());
    }
}
