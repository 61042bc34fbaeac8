//! Trains one learner on the desk-scale scenario, evaluates the selected
//! policy greedily and writes log, checkpoint, evaluation and trace files.
//!
//!     cargo run --release --example train_smoke [variant] [seed] [out-dir]
//!
//! `variant` is one of AO-IPDQN (default), AO-GAPDQN, AO-PDQN, AO-PDDPG.

use std::path::PathBuf;

use risuav::agent::{AgentConfig, Variant};
use risuav::harness::{run_baselines, aoi_summary, train_and_evaluate, write_train_outputs};
use risuav::ScenarioConfig;

fn main() -> risuav::Result<()> {
    let mut args = std::env::args().skip(1);
    let variant: Variant = args.next().map_or(Ok(Variant::AoIpdqn), |v| v.parse())?;
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| format!("out/{}", variant.name())));

    let (cfg, agent) = (ScenarioConfig::smoke(), AgentConfig::smoke());
    let report = train_and_evaluate(&cfg, &agent, variant, seed, |l| {
        if l.generation % 5 == 0 || l.generation == 1 {
            println!(
                "gen {:>3}  best {:>8.2}  mean {:>8.2}  rl {:>8.2}  rl AoI {:>5.2}",
                l.generation, l.best_fitness, l.mean_fitness, l.rl_fitness, l.rl_avg_aoi
            );
        }
    })?;
    let base = run_baselines(&cfg, 10, seed)?;
    println!(
        "{variant}: greedy AoI {:.2} (random {:.2}, fixed {:.2})",
        report.eval_aoi().mean,
        aoi_summary(&base.random).mean,
        aoi_summary(&base.fixed).mean
    );
    for f in write_train_outputs(&report, &out)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
