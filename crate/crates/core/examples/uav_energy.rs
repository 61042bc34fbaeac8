//! Rotary-wing propulsion power over speed, the hover and max-endurance
//! operating points, and the per-slot cost of the UAV's speed range.
//!
//!     cargo run --release --example uav_energy

use risuav::energy::{max_endurance_speed, propulsion_energy, propulsion_power};
use risuav::ScenarioConfig;

fn main() {
    let cfg = ScenarioConfig::full_size();
    let e = &cfg.energy;
    println!("{:>8} {:>10} {:>12}", "v (m/s)", "P (W)", "J per meter");
    for v in [0.0, 2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0] {
        let p = propulsion_power(v, e);
        let per_m = if v > 0.0 { format!("{:.2}", p / v) } else { "-".into() };
        println!("{v:>8.1} {p:>10.2} {per_m:>12}");
    }
    let v_me = max_endurance_speed(e, 1.0, 40.0);
    println!("\nhover: {:.2} W", propulsion_power(0.0, e));
    println!("max endurance speed: {v_me:.2} m/s at {:.2} J/m", propulsion_power(v_me, e) / v_me);
    let v_max = cfg.uav.max_step_x.hypot(cfg.uav.max_step_y) / cfg.slot_len;
    println!(
        "one slot of {} s costs {:.1} J hovering and {:.1} J at the full diagonal step ({v_max:.1} m/s)",
        cfg.slot_len,
        propulsion_energy(0.0, &cfg),
        propulsion_energy(v_max, &cfg)
    );
}
