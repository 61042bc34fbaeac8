//! Empirical link powers against the path-loss model, and what the RIS
//! adds to the composite channel as the UAV moves away from it.
//!
//!     cargo run --release --example channel_stats

use risuav::channel::{composite_channel, sample_direct, sample_realization, PhaseConfig};
use risuav::config::{euclidean_distance, Position3};
use risuav::ris::{optimize_phases, AoRisConfig, RisObjective};
use risuav::{RngStream, ScenarioConfig};

fn main() {
    let cfg = ScenarioConfig::full_size();
    let mut rng = RngStream::new(7, "example/channel");
    let iotd = cfg.iotd.positions[0];

    println!("direct link, 20k draws per distance");
    println!("{:>8} {:>12} {:>12}", "d (m)", "mean |h|^2", "model");
    for dx in [5.0, 20.0, 50.0, 100.0, 200.0] {
        let uav = Position3::new(iotd.x + dx, iotd.y, cfg.uav.altitude);
        let d = euclidean_distance(uav, iotd);
        let mean = (0..20_000).map(|_| sample_direct(uav, iotd, &cfg, &mut rng).norm_sqr()).sum::<f64>() / 20_000.0;
        println!("{d:>8.1} {mean:>12.3e} {:>12.3e}", cfg.channel.ref_gain / d.powf(cfg.channel.k_ud));
    }

    // RIS gain for the IoTD nearest the surface
    let ris = cfg.ris.position;
    let n = (0..cfg.n_iotds())
        .min_by(|&a, &b| {
            euclidean_distance(cfg.iotd.positions[a], ris).total_cmp(&euclidean_distance(cfg.iotd.positions[b], ris))
        })
        .unwrap();
    let target = cfg.iotd.positions[n];
    let ao = AoRisConfig::new(cfg.ris.ao_iters, RisObjective::DataRate);
    println!("\nIoTD {n} at ({:.0}, {:.0}); UAV overhead vs RIS contribution", target.x, target.y);
    println!("{:>10} {:>14} {:>14} {:>14}", "UAV x", "|h_ud|^2", "random RIS", "AO RIS");
    for x in [target.x, (target.x + ris.x) / 2.0, ris.x + 1.0] {
        let uav = Position3::new(x, target.y, cfg.uav.altitude);
        let real = sample_realization(uav, &cfg, &mut rng);
        let random = PhaseConfig::random(cfg.ris.elements(), cfg.ris.bits, &mut rng);
        let tuned = optimize_phases(&real, n, &ao, cfg.ris.bits, &mut rng);
        println!(
            "{x:>10.1} {:>14.3e} {:>14.3e} {:>14.3e}",
            real.h_ud[n].norm_sqr(),
            composite_channel(&real, &random, n).norm_sqr(),
            composite_channel(&real, &tuned, n).norm_sqr()
        );
    }
}
