//! Parameter sweep with trend check. Defaults to a short Z_min sweep; the
//! full grid with three repetitions takes a few minutes per value.
//!
//!     cargo run --release --example sweep [z_min|e_max|lr_p|lr_v] [repetitions] [generations]

use risuav::agent::{AgentConfig, Variant};
use risuav::harness::{run_sweep, trend, SweepParam, SweepSpec};
use risuav::ScenarioConfig;

fn main() -> risuav::Result<()> {
    let mut args = std::env::args().skip(1);
    let param: SweepParam = args.next().map_or(Ok(SweepParam::ZMin), |p| p.parse())?;
    let mut spec = SweepSpec::new(param, 11);
    spec.repetitions = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut agent = AgentConfig::smoke();
    agent.generations = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);

    let res = run_sweep(&spec, &ScenarioConfig::smoke(), &agent, Variant::AoIpdqn, |c| {
        println!("{} = {:<8} rep {}  AoI {:.3}", c.param, c.value, c.repetition, c.avg_aoi)
    })?;
    println!("\n{:>10} {:>10} {:>8} {:>10}", param.name(), "AoI", "std", "energy");
    for r in &res.rows {
        println!("{:>10} {:>10.3} {:>8.3} {:>10.2}", r.value, r.aoi_mean, r.aoi_std, r.energy_mean);
    }
    // a looser AoI constraint or a larger buffer should not make things worse
    let increasing = matches!(param, SweepParam::ZMin);
    if matches!(param, SweepParam::ZMin | SweepParam::EMax) {
        let t = trend(&res.rows, increasing);
        println!("trend: {} inversion(s), {} within noise -> {}", t.inversions, t.tolerated, if t.passes() { "ok" } else { "broken" });
    }
    Ok(())
}
