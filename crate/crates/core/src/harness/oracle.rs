//! Self-checks run by the `oracle` command: closed-form physics values,
//! Monte-Carlo channel normalization, coordinate ascent against exhaustive
//! search, finite-difference gradients, replay sampling frequencies and
//! reward telescoping.

use std::time::Instant;

use ndarray::Array2;
use rand::Rng;

use crate::agent::{policy_loss_and_grad, value_loss_and_grad, Pdqn};
use crate::channel::{sample_direct, sample_realization, sample_ris_iotd, sample_uav_ris};
use crate::config::{dbm_to_watt, euclidean_distance, Position3, ScenarioConfig};
use crate::energy::propulsion_energy;
use crate::env::{reset, step, Action, AoRisSelector};
use crate::error::Result;
use crate::nn::{init_params, standard_activations, Activation, NetworkParams};
use crate::per::{Experience, PerBuffer, PerConfig};
use crate::ris::{brute_force_phases, objective_value, optimize_phases_traced, AoRisConfig, RisObjective};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn timed(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Result<OracleCheck> {
    let t0 = Instant::now();
    let (passed, detail) = f()?;
    Ok(OracleCheck {
        name,
        passed,
        detail,
        seconds: t0.elapsed().as_secs_f64(),
    })
}

/// Runs every check with draws derived from `seed`.
pub fn run_oracles(seed: u64) -> Result<Vec<OracleCheck>> {
    Ok(vec![
        timed("physics", || physics(seed))?,
        timed("channel-normalization", || channel_normalization(seed))?,
        timed("ao-ris-vs-exhaustive", || ao_vs_exhaustive(seed))?,
        timed("gradients", || gradients(seed))?,
        timed("per-distribution", || per_distribution(seed))?,
        timed("reward-telescoping", || telescoping(seed))?,
    ])
}

/// Propulsion power written out term by term from the rotor model.
fn reference_power(v: f64) -> f64 {
    let blade = 79.85 * (1.0 + 3.0 * v * v / (120.0 * 120.0));
    let induced = 88.63 * ((1.0 + v.powi(4) / (4.0 * 4.03f64.powi(4))).sqrt() - v * v / (2.0 * 4.03 * 4.03)).sqrt();
    let parasite = 0.5 * 0.6 * 1.225 * 0.05 * 0.503 * v.powi(3);
    blade + induced + parasite
}

fn physics(seed: u64) -> Result<(bool, String)> {
    let cfg = ScenarioConfig::smoke();
    let hover = propulsion_energy(0.0, &cfg);
    let hover_ok = ((hover - 168.48) / 168.48).abs() < 1e-9;
    let mut rng = RngStream::new(seed, "oracle/physics");
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let v: f64 = rng.random_range(0.0..40.0);
        let r = reference_power(v);
        worst = worst.max(((propulsion_energy(v, &cfg) - r) / r).abs());
    }
    let dbm_ok = dbm_to_watt(30.0) == 1.0 && dbm_to_watt(0.0) == 1e-3 && (dbm_to_watt(-30.0) - 1e-6).abs() < 1e-21;
    Ok((
        hover_ok && worst < 1e-12 && dbm_ok,
        format!("hover {hover:.12} J; worst relative error over 1000 speeds {worst:.1e}"),
    ))
}

fn channel_normalization(seed: u64) -> Result<(bool, String)> {
    let cfg = ScenarioConfig::smoke();
    let mut rng = RngStream::new(seed, "oracle/channel");
    let draws = 100_000;
    let uav = Position3::new(180.0, 150.0, cfg.uav.altitude);
    let iotd = cfg.iotd.positions[0];
    let ris = cfg.ris.position;
    let gain = |d: f64, k: f64| cfg.channel.ref_gain / d.powf(k);

    let expected_ud = gain(euclidean_distance(uav, iotd), cfg.channel.k_ud);
    let mean_ud = (0..draws)
        .map(|_| sample_direct(uav, iotd, &cfg, &mut rng).norm_sqr())
        .sum::<f64>()
        / draws as f64;

    let expected_ur = gain(euclidean_distance(uav, ris), cfg.channel.k_ur);
    let h_ur = sample_uav_ris(uav, ris, &cfg);
    let mean_ur = h_ur.iter().map(|h| h.norm_sqr()).sum::<f64>() / h_ur.len() as f64;

    let expected_rd = gain(euclidean_distance(ris, iotd), cfg.channel.k_rd);
    let per_draw = draws / cfg.ris.elements();
    let mean_rd = (0..per_draw)
        .flat_map(|_| sample_ris_iotd(ris, iotd, &cfg, &mut rng))
        .map(|h| h.norm_sqr())
        .sum::<f64>()
        / (per_draw * cfg.ris.elements()) as f64;

    let errs = [
        mean_ud / expected_ud - 1.0,
        mean_ur / expected_ur - 1.0,
        mean_rd / expected_rd - 1.0,
    ];
    Ok((
        errs.iter().all(|e| e.abs() < 0.02),
        format!(
            "relative error direct {:+.4}, UAV-RIS {:+.2e}, RIS-IoTD {:+.4}",
            errs[0], errs[1], errs[2]
        ),
    ))
}

fn ao_vs_exhaustive(seed: u64) -> Result<(bool, String)> {
    let mut cfg = ScenarioConfig::smoke();
    cfg.ris.rows = 2;
    cfg.ris.cols = 2;
    cfg.ris.bits = 2;
    let mut rng = RngStream::new(seed, "oracle/ao");
    let ao = AoRisConfig::new(cfg.ris.ao_iters, RisObjective::HarvestEnergy);
    let (mut good, mut violations) = (0, 0);
    for _ in 0..100 {
        let uav = Position3::new(rng.random_range(0.0..cfg.area.x_max), rng.random_range(0.0..cfg.area.y_max), cfg.uav.altitude);
        let real = sample_realization(uav, &cfg, &mut rng);
        let iotd = rng.random_range(0..cfg.n_iotds());
        let (phases, trace) = optimize_phases_traced(&real, iotd, &ao, cfg.ris.bits, &mut rng);
        violations += trace.iter().filter(|u| u.after < u.before).count();
        let (best, _) = brute_force_phases(&real, iotd, cfg.ris.bits)?;
        let value = |p| objective_value(&real, p, iotd, RisObjective::HarvestEnergy, 0.5, &cfg);
        if value(&phases) >= 0.95 * value(&best) {
            good += 1;
        }
    }
    Ok((
        good >= 90 && violations == 0,
        format!("{good}/100 instances within 95% of the optimum; {violations} decreasing updates"),
    ))
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn central_difference(params: &NetworkParams, f: impl Fn(&NetworkParams) -> f64) -> Vec<f64> {
    let h = 1e-5;
    let mut p = params.clone();
    (0..params.len())
        .map(|i| {
            let x = p.flat()[i];
            p.flat_mut()[i] = x + h;
            let up = f(&p);
            p.flat_mut()[i] = x - h;
            let down = f(&p);
            p.flat_mut()[i] = x;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn gradients(seed: u64) -> Result<(bool, String)> {
    let mut rng = RngStream::new(seed, "oracle/grad");
    let (obs, n, b) = (4, 2, 5);
    let policy = Pdqn::init_policy(obs, n, &[8], &mut rng)?;
    let vl = [obs + 3 * n, 8, n];
    let value = init_params(&vl, standard_activations(&vl, Activation::Identity), &mut rng)?;
    let states = Array2::from_shape_fn((b, obs), |_| rng.random_range(0.0..1.0));
    let inputs = Array2::from_shape_fn((b, obs + 3 * n), |_| rng.random_range(-1.0..1.0));
    let actions: Vec<usize> = (0..b).map(|_| rng.random_range(0..n)).collect();
    let targets: Vec<f64> = (0..b).map(|_| rng.random_range(-2.0..2.0)).collect();
    let weights: Vec<f64> = (0..b).map(|_| rng.random_range(0.1..1.0)).collect();

    let (_, _, g_value) = value_loss_and_grad(&value, inputs.clone(), &actions, &targets, &weights)?;
    let fd_value = central_difference(&value, |v| {
        value_loss_and_grad(v, inputs.clone(), &actions, &targets, &weights)
            .map(|r| r.0)
            .unwrap_or(f64::NAN)
    });
    let (_, g_policy) = policy_loss_and_grad(&policy, &value, states.clone())?;
    let fd_policy = central_difference(&policy, |p| {
        policy_loss_and_grad(p, &value, states.clone())
            .map(|r| r.0)
            .unwrap_or(f64::NAN)
    });
    let (ev, ep) = (relative_error(&g_value, &fd_value), relative_error(&g_policy, &fd_policy));
    Ok((
        ev < 1e-4 && ep < 1e-3,
        format!("value-path relative error {ev:.1e}; policy-through-critic {ep:.1e}"),
    ))
}

fn per_distribution(seed: u64) -> Result<(bool, String)> {
    let cfg = PerConfig {
        capacity: 8,
        ..PerConfig::default()
    };
    let mut buf = PerBuffer::new(cfg);
    let blank = Experience {
        state: vec![0.0],
        schedule: 0,
        params: vec![0.0; 3],
        reward: 0.0,
        next_state: vec![0.0],
        terminal: true,
    };
    for _ in 0..8 {
        buf.insert(blank.clone());
    }
    let mut rng = RngStream::new(seed, "oracle/per");
    let probe = buf.sample(8, 0.0, &mut rng)?;
    let mut slots: Vec<_> = probe.indices.clone();
    slots.sort_by_key(|i| i.slot);
    slots.dedup_by_key(|i| i.slot);
    // priorities 1..=8 on whatever slots came back, then fill the rest
    let td: Vec<f64> = slots.iter().map(|i| (i.slot + 1) as f64).collect();
    buf.update_priorities(&slots, &td)?;
    let expected: Vec<f64> = {
        let p: Vec<f64> = (0..8).map(|s| buf.priority(s).powf(cfg.alpha)).collect();
        let total: f64 = p.iter().sum();
        p.iter().map(|x| x / total).collect()
    };
    let draws = 100_000;
    let mut counts = [0usize; 8];
    for _ in 0..draws / 8 {
        for i in buf.sample(8, 0.4, &mut rng)?.indices {
            counts[i.slot] += 1;
        }
    }
    let worst = counts
        .iter()
        .zip(&expected)
        .map(|(&c, &p)| ((c as f64 / draws as f64) / p - 1.0).abs())
        .fold(0.0, f64::max);

    let mut flat = PerBuffer::new(cfg);
    for _ in 0..8 {
        flat.insert(blank.clone());
    }
    let w = flat.sample(8, 1.0, &mut rng)?.weights;
    let uniform_ok = w.iter().all(|&x| x == 1.0);
    Ok((
        worst < 0.05 && uniform_ok,
        format!("worst per-entry frequency error {:.2}%; uniform-priority weights all 1: {uniform_ok}", 100.0 * worst),
    ))
}

fn telescoping(seed: u64) -> Result<(bool, String)> {
    let cfg = ScenarioConfig::smoke();
    let mut rng = RngStream::new(seed, "oracle/telescoping");
    let mut mismatches = 0;
    for _ in 0..100 {
        let mut state = reset(&cfg);
        let start = state.aoi.clone();
        let mut sum = 0.0;
        while !state.is_terminal(&cfg) {
            let u = [
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            ];
            let action = Action::from_unit(u, rng.random_range(0..cfg.n_iotds()), &cfg);
            let out = step(&state, &action, &mut AoRisSelector, &cfg, &mut rng)?;
            sum += out.reward_parts.aoi;
            state = out.next_state;
        }
        let expected: i64 = start
            .iter()
            .zip(&state.aoi)
            .map(|(&a, &b)| i64::from(a) - i64::from(b))
            .sum();
        if sum != expected as f64 {
            mismatches += 1;
        }
    }
    Ok((mismatches == 0, format!("{mismatches}/100 episodes with a mismatch")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_oracles_pass() {
        for c in run_oracles(7).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
