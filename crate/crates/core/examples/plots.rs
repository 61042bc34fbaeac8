//! Renders SVG figures: a short training run and the baselines are written
//! to one directory, then every CSV there is plotted.
//!
//!     cargo run --release --example plots [out-dir]

use std::path::PathBuf;

use risuav::agent::{AgentConfig, Variant};
use risuav::harness::{emit_plots, run_baselines, train_and_evaluate, write_baseline_outputs, write_train_outputs};
use risuav::ScenarioConfig;

fn main() -> risuav::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/plots".into()));
    let cfg = ScenarioConfig::smoke();
    let agent = AgentConfig { generations: 8, ..AgentConfig::smoke() };

    let report = train_and_evaluate(&cfg, &agent, Variant::AoIpdqn, 1, |_| {})?;
    write_train_outputs(&report, &dir)?;
    write_baseline_outputs(&run_baselines(&cfg, 10, 1)?, &cfg, 1, &dir)?;
    for f in emit_plots(&dir, &cfg)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
