//! Coordinate ascent over quantized RIS phases versus exhaustive search on
//! small surfaces, then timing on the full-size surface.
//!
//!     cargo run --release --example ris_phase_optimization

use std::time::Instant;

use rand::Rng;
use risuav::channel::{composite_channel, sample_realization};
use risuav::config::Position3;
use risuav::ris::{brute_force_phases, optimize_phases, AoRisConfig, RisObjective};
use risuav::{RngStream, ScenarioConfig};

fn main() -> risuav::Result<()> {
    let mut rng = RngStream::new(3, "example/ris");
    for (rows, cols, bits) in [(2, 2, 2), (2, 3, 2), (3, 3, 1), (2, 2, 3)] {
        let mut cfg = ScenarioConfig::smoke();
        (cfg.ris.rows, cfg.ris.cols, cfg.ris.bits) = (rows, cols, bits);
        let ao = AoRisConfig::new(cfg.ris.ao_iters, RisObjective::HarvestEnergy);
        let mut ratios = Vec::new();
        for _ in 0..50 {
            let uav = Position3::new(rng.random_range(0.0..cfg.area.x_max), rng.random_range(0.0..cfg.area.y_max), cfg.uav.altitude);
            let real = sample_realization(uav, &cfg, &mut rng);
            let n = rng.random_range(0..cfg.n_iotds());
            let p = optimize_phases(&real, n, &ao, bits, &mut rng);
            let (_, best) = brute_force_phases(&real, n, bits)?;
            ratios.push(composite_channel(&real, &p, n).norm_sqr() / best);
        }
        let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        println!("{rows}x{cols} RIS, {bits}-bit: AO/optimum mean {mean:.4}, worst {worst:.4}");
    }

    let cfg = ScenarioConfig::full_size();
    let ao = AoRisConfig::new(cfg.ris.ao_iters, RisObjective::DataRate);
    let real = sample_realization(Position3::new(30.0, 200.0, cfg.uav.altitude), &cfg, &mut rng);
    let t0 = Instant::now();
    let reps = 1000;
    for _ in 0..reps {
        optimize_phases(&real, 0, &ao, cfg.ris.bits, &mut rng);
    }
    println!(
        "{} elements, {} sweeps: {:.1} us per optimization",
        cfg.ris.elements(),
        cfg.ris.ao_iters,
        t0.elapsed().as_secs_f64() * 1e6 / reps as f64
    );
    Ok(())
}
