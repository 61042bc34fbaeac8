//! Random and fixed-trajectory reference policies on the desk-scale
//! scenario, with their CSV outputs.
//!
//!     cargo run --release --example baselines [out-dir]

use std::path::PathBuf;

use risuav::harness::{aoi_summary, energy_summary, run_baselines, write_baseline_outputs};
use risuav::ScenarioConfig;

fn main() -> risuav::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/baselines".into()));
    let cfg = ScenarioConfig::smoke();
    let report = run_baselines(&cfg, 20, 1)?;
    for (name, m) in [("random", &report.random), ("fixed", &report.fixed)] {
        let (a, e) = (aoi_summary(m), energy_summary(m));
        let successes: usize = m.iter().map(|x| x.success_count).sum();
        println!(
            "{name:>6}: AoI {:.2} ± {:.2}, energy {:.1} ± {:.1} J/slot, {successes} uploads in {} episodes",
            a.mean, a.std, e.mean, e.std, m.len()
        );
    }
    for f in write_baseline_outputs(&report, &cfg, 1, &out)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
