//! Drives the environment by hand: a greedy fly-to-the-stalest-device
//! heuristic, with per-slot reward terms printed as it goes.
//!
//!     cargo run --release --example env_rollout

use risuav::env::{reset, step, Action, AoRisSelector};
use risuav::{RngStream, ScenarioConfig};

fn main() -> risuav::Result<()> {
    let cfg = ScenarioConfig::smoke();
    let mut rng = RngStream::new(9, "example/rollout");
    let mut s = reset(&cfg);
    println!("{:>4} {:>14} {:>6} {:>8} {:>9} {:>9} {:>8}", "slot", "UAV", "sched", "ok", "r_aoi", "r_energy", "AoI");
    while !s.is_terminal(&cfg) {
        let n = (0..cfg.n_iotds()).max_by_key(|&i| s.aoi[i]).unwrap();
        let target = cfg.iotd.positions[n];
        let (dx, dy) = (target.x - s.uav_pos.x, target.y - s.uav_pos.y);
        let action = Action {
            ax: dx.clamp(-cfg.uav.max_step_x, cfg.uav.max_step_x),
            ay: dy.clamp(-cfg.uav.max_step_y, cfg.uav.max_step_y),
            // charge longer once overhead
            delta: cfg.slot_len * if dx.hypot(dy) < 10.0 { 0.3 } else { 0.9 },
            schedule: n,
        };
        let out = step(&s, &action, &mut AoRisSelector, &cfg, &mut rng)?;
        let mean_aoi = out.next_state.aoi.iter().sum::<u32>() as f64 / cfg.n_iotds() as f64;
        println!(
            "{:>4} ({:>5.1},{:>5.1}) {:>6} {:>8} {:>9.2} {:>9.3} {:>8.2}",
            s.slot, out.next_state.uav_pos.x, out.next_state.uav_pos.y, n, out.success,
            out.reward_parts.aoi, out.reward_parts.energy, mean_aoi
        );
        s = out.next_state;
    }
    Ok(())
}
