//! Non-learning reference policies.

use rand::Rng;

use crate::channel::PhaseConfig;
use crate::config::ScenarioConfig;
use crate::energy::max_endurance_speed;
use crate::env::{Action, FixedSelector, RandomSelector};
use crate::episode::{run_episode, EpisodeMetrics};
use crate::error::Result;
use crate::rng::RngStream;

/// Charging time used by the fixed policy, seconds.
pub const FIXED_DELTA: f64 = 0.5;

/// Uniformly random actions and RIS phases in every slot.
pub fn run_random_baseline(cfg: &ScenarioConfig, episodes: usize, seed: u64) -> Result<Vec<EpisodeMetrics>> {
    let mut actor = |_: &[f64], _: usize, cfg: &ScenarioConfig, rng: &mut RngStream| {
        let u = [
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        ];
        let d = rng.random_range(0..cfg.n_iotds());
        Ok((Action::from_unit(u, d, cfg), u.to_vec()))
    };
    (0..episodes)
        .map(|k| {
            let rng = RngStream::new(seed, format!("random/ep{k}"));
            run_episode(cfg, &mut actor, &mut RandomSelector, &rng).map(|e| e.metrics)
        })
        .collect()
}

/// Per-axis displacement of the diagonal shuttle, meters per slot.
pub fn fixed_step(cfg: &ScenarioConfig) -> (f64, f64) {
    let v = max_endurance_speed(&cfg.energy, 0.1, 60.0);
    let a = &cfg.area;
    let (w, h) = (a.x_max - a.x_min, a.y_max - a.y_min);
    let len = w.hypot(h);
    let dist = v * cfg.slot_len;
    let (mut sx, mut sy) = (dist * w / len, dist * h / len);
    // keep within the per-slot displacement bounds, preserving direction
    let shrink = (cfg.uav.max_step_x / sx).min(cfg.uav.max_step_y / sy).min(1.0);
    sx *= shrink;
    sy *= shrink;
    (sx, sy)
}

/// Shuttle along the main diagonal at maximum-endurance speed, reversing
/// before a step would leave the area; `delta = 0.5 s`, round-robin
/// scheduling and every RIS phase at the grid point nearest `pi/2`.
pub fn run_fixed_baseline(cfg: &ScenarioConfig, episodes: usize, seed: u64) -> Result<Vec<EpisodeMetrics>> {
    let (sx, sy) = fixed_step(cfg);
    let phases = PhaseConfig::uniform(cfg.ris.elements(), cfg.ris.bits, std::f64::consts::FRAC_PI_2);
    let delta = FIXED_DELTA.min(cfg.slot_len);
    (0..episodes)
        .map(|k| {
            let mut dir = 1.0;
            let mut actor = |obs: &[f64], slot: usize, cfg: &ScenarioConfig, _: &mut RngStream| {
                let a = &cfg.area;
                let x = a.x_min + obs[0] * (a.x_max - a.x_min);
                let y = a.y_min + obs[1] * (a.y_max - a.y_min);
                if !a.contains(x + dir * sx, y + dir * sy) {
                    dir = -dir;
                }
                let action = Action {
                    ax: dir * sx,
                    ay: dir * sy,
                    delta,
                    schedule: slot % cfg.n_iotds(),
                };
                Ok((action, action.to_unit(cfg).to_vec()))
            };
            let rng = RngStream::new(seed, format!("fixed/ep{k}"));
            run_episode(cfg, &mut actor, &mut FixedSelector(phases.clone()), &rng).map(|e| e.metrics)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_baseline_is_valid_and_deterministic() {
        let cfg = ScenarioConfig::smoke();
        let a = run_random_baseline(&cfg, 5, 1).unwrap();
        assert_eq!(a, run_random_baseline(&cfg, 5, 1).unwrap());
        for m in &a {
            assert!(m.avg_aoi >= 1.0);
            for r in &m.trace {
                assert!((0.0..=400.0).contains(&r.x) && (0.0..=400.0).contains(&r.y));
                assert!((0.0..=1.0).contains(&r.delta));
                assert!(r.scheduled < 3);
            }
        }
    }

    #[test]
    fn fixed_baseline_shape() {
        let mut cfg = ScenarioConfig::smoke();
        cfg.horizon = 60;
        let m = &run_fixed_baseline(&cfg, 1, 2).unwrap()[0];
        let e_p = m.trace[0].e_propulsion;
        for (t, r) in m.trace.iter().enumerate() {
            assert_eq!(r.delta, 0.5);
            assert_eq!(r.scheduled, t % 3);
            assert_eq!(r.r_penalty, 0.0);
            assert!((r.e_propulsion - e_p).abs() < 1e-9 * e_p);
        }
        // the shuttle turns around at least once in 60 slots
        let xs: Vec<f64> = m.trace.iter().map(|r| r.x).collect();
        assert!(xs.windows(2).any(|w| w[1] < w[0]));
    }

    #[test]
    fn fixed_speed_is_max_endurance() {
        let cfg = ScenarioConfig::smoke();
        let (sx, sy) = fixed_step(&cfg);
        let v = sx.hypot(sy);
        assert!(v > 10.0 && v < 30.0, "{v}");
        assert!((sx - sy).abs() < 1e-12);
    }
}
