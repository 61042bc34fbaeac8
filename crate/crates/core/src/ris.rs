//! RIS phase configuration by element-wise coordinate ascent, plus an
//! exhaustive search used to check it.
//!
//! Harvested energy and achievable rate are both strictly increasing in the
//! composite channel power `|H|^2`, so the search maximizes `|H|^2` directly
//! and the requested objective is only used for reporting.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{achievable_rate, composite_channel, ChannelRealization, PhaseConfig};
use crate::config::ScenarioConfig;
use crate::energy::harvested_energy;
use crate::error::{Error, Result};

/// Default cap on the number of configurations brute force may enumerate.
pub const BRUTE_FORCE_CAP_EXPONENT: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisObjective {
    /// Energy harvested during the charging window.
    HarvestEnergy,
    /// Achievable uplink rate during the data window.
    DataRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AoRisConfig {
    pub max_iters: usize,
    pub objective: RisObjective,
}

impl AoRisConfig {
    pub fn new(max_iters: usize, objective: RisObjective) -> Self {
        assert!(max_iters >= 1, "max_iters must be at least 1");
        Self {
            max_iters,
            objective,
        }
    }
}

/// One single-element update recorded during coordinate ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementUpdate {
    pub sweep: usize,
    pub element: usize,
    /// `|H|^2` before the update.
    pub before: f64,
    /// `|H|^2` after the update.
    pub after: f64,
}

/// Coordinate ascent over quantized phases for IoTD `iotd`.
///
/// Starts from uniformly random indices, then sweeps the elements in
/// row-major order `max_iters` times. Each element takes the level that
/// maximizes `|H|^2` with all others fixed; ties keep the lowest index.
pub fn optimize_phases<R: Rng + ?Sized>(
    real: &ChannelRealization,
    iotd: usize,
    ao: &AoRisConfig,
    bits: u32,
    rng: &mut R,
) -> PhaseConfig {
    run_ascent(real, iotd, ao.max_iters, bits, rng, None)
}

/// Same as [`optimize_phases`] but records every element update, with
/// `|H|^2` recomputed from scratch before and after each one.
pub fn optimize_phases_traced<R: Rng + ?Sized>(
    real: &ChannelRealization,
    iotd: usize,
    ao: &AoRisConfig,
    bits: u32,
    rng: &mut R,
) -> (PhaseConfig, Vec<ElementUpdate>) {
    let mut trace = Vec::new();
    let phases = run_ascent(real, iotd, ao.max_iters, bits, rng, Some(&mut trace));
    (phases, trace)
}

fn run_ascent<R: Rng + ?Sized>(
    real: &ChannelRealization,
    iotd: usize,
    max_iters: usize,
    bits: u32,
    rng: &mut R,
    mut trace: Option<&mut Vec<ElementUpdate>>,
) -> PhaseConfig {
    let m = real.elements();
    let levels = 1usize << bits;
    let rotations: Vec<Complex64> = (0..levels)
        .map(|k| Complex64::from_polar(1.0, crate::channel::index_to_phase(k as u16, bits)))
        .collect();
    let terms = real.cascaded(iotd);
    let mut phases = PhaseConfig::random(m, bits, rng);

    for sweep in 0..max_iters {
        // Resumming once per sweep keeps rounding drift from accumulating.
        let mut total = real.h_ud[iotd]
            + terms
                .iter()
                .zip(phases.indices())
                .map(|(t, &k)| t * rotations[k as usize])
                .sum::<Complex64>();
        for (element, term) in terms.iter().enumerate() {
            let before = trace
                .as_ref()
                .map(|_| composite_channel(real, &phases, iotd).norm_sqr());
            let current = phases.indices()[element] as usize;
            let rest = total - term * rotations[current];
            let mut best = (0usize, f64::NEG_INFINITY);
            for (k, rot) in rotations.iter().enumerate() {
                let v = (rest + term * rot).norm_sqr();
                if v > best.1 {
                    best = (k, v);
                }
            }
            phases.set(element, best.0 as u16);
            total = rest + term * rotations[best.0];
            if let (Some(t), Some(before)) = (trace.as_deref_mut(), before) {
                t.push(ElementUpdate {
                    sweep,
                    element,
                    before,
                    after: composite_channel(real, &phases, iotd).norm_sqr(),
                });
            }
        }
    }
    phases
}

/// Harvested energy or achievable rate for IoTD `iotd` under `phases`.
pub fn objective_value(
    real: &ChannelRealization,
    phases: &PhaseConfig,
    iotd: usize,
    objective: RisObjective,
    delta: f64,
    cfg: &ScenarioConfig,
) -> f64 {
    let h = composite_channel(real, phases, iotd);
    match objective {
        RisObjective::HarvestEnergy => harvested_energy(delta, h, cfg),
        RisObjective::DataRate => achievable_rate(h, cfg.iotd.tx_power, cfg.channel.noise),
    }
}

/// Global maximizer of `|H|^2` by enumerating all `2^(b M)` configurations.
pub fn brute_force_phases(
    real: &ChannelRealization,
    iotd: usize,
    bits: u32,
) -> Result<(PhaseConfig, f64)> {
    brute_force_phases_capped(real, iotd, bits, BRUTE_FORCE_CAP_EXPONENT)
}

pub fn brute_force_phases_capped(
    real: &ChannelRealization,
    iotd: usize,
    bits: u32,
    cap_exponent: u32,
) -> Result<(PhaseConfig, f64)> {
    let m = real.elements();
    let exponent = bits as usize * m;
    if exponent > cap_exponent as usize {
        return Err(Error::InstanceTooLarge {
            exponent: exponent as u32,
            cap_exponent,
        });
    }
    let levels = 1usize << bits;
    let mut idx = vec![0u16; m];
    let mut best_idx = idx.clone();
    let mut best = f64::NEG_INFINITY;
    loop {
        let v = composite_channel(real, &PhaseConfig::new(idx.clone(), bits), iotd).norm_sqr();
        if v > best {
            best = v;
            best_idx.clone_from(&idx);
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok((PhaseConfig::new(best_idx, bits), best));
            }
            idx[pos] += 1;
            if (idx[pos] as usize) < levels {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_normal;
    use crate::rng::RngStream;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_instance(m: usize, rng: &mut RngStream) -> ChannelRealization {
        ChannelRealization {
            h_ud: vec![complex_normal(rng)],
            h_ur: (0..m).map(|_| complex_normal(rng)).collect(),
            h_rd: vec![(0..m).map(|_| complex_normal(rng)).collect()],
        }
    }

    #[test]
    fn single_element_matches_exhaustive_four_levels() {
        let mut rng = RngStream::new(3, "ao");
        for _ in 0..50 {
            let real = random_instance(1, &mut rng);
            let ao = AoRisConfig::new(1, RisObjective::DataRate);
            let got = optimize_phases(&real, 0, &ao, 2, &mut rng);
            let mut best = (0u16, f64::NEG_INFINITY);
            for k in 0..4u16 {
                let v = composite_channel(&real, &PhaseConfig::new(vec![k], 2), 0).norm_sqr();
                if v > best.1 {
                    best = (k, v);
                }
            }
            assert_eq!(got.indices()[0], best.0);
        }
    }

    #[test]
    fn aligned_term_picks_zero() {
        let real = ChannelRealization {
            h_ud: vec![c(0.0, 0.0)],
            h_ur: vec![c(2.0, 0.0)],
            h_rd: vec![vec![c(0.5, 0.0)]],
        };
        let ao = AoRisConfig::new(3, RisObjective::HarvestEnergy);
        let mut rng = RngStream::new(1, "x");
        assert_eq!(optimize_phases(&real, 0, &ao, 2, &mut rng).indices(), &[0]);
    }

    #[test]
    fn more_sweeps_never_hurt() {
        let mut rng = RngStream::new(4, "inst");
        for i in 0..30 {
            let real = random_instance(9, &mut rng);
            let one = optimize_phases(
                &real,
                0,
                &AoRisConfig::new(1, RisObjective::DataRate),
                2,
                &mut RngStream::new(i, "init"),
            );
            let two = optimize_phases(
                &real,
                0,
                &AoRisConfig::new(2, RisObjective::DataRate),
                2,
                &mut RngStream::new(i, "init"),
            );
            let v1 = composite_channel(&real, &one, 0).norm_sqr();
            let v2 = composite_channel(&real, &two, 0).norm_sqr();
            assert!(v2 >= v1, "{v2} < {v1}");
        }
    }

    #[test]
    fn traced_updates_are_monotone_and_deterministic() {
        let mut rng = RngStream::new(5, "inst");
        let real = random_instance(16, &mut rng);
        let ao = AoRisConfig::new(3, RisObjective::DataRate);
        let (p1, trace) = optimize_phases_traced(&real, 0, &ao, 2, &mut RngStream::new(9, "i"));
        let (p2, _) = optimize_phases_traced(&real, 0, &ao, 2, &mut RngStream::new(9, "i"));
        assert_eq!(p1, p2);
        assert_eq!(trace.len(), 3 * 16);
        assert!(trace.iter().all(|u| u.after >= u.before));
        assert_eq!(p1, optimize_phases(&real, 0, &ao, 2, &mut RngStream::new(9, "i")));
    }

    #[test]
    fn objectives_share_argmax() {
        let cfg = ScenarioConfig::smoke();
        let mut rng = RngStream::new(6, "inst");
        for _ in 0..100 {
            let real = random_instance(4, &mut rng);
            let argmax = |obj| {
                let mut best = (0usize, f64::NEG_INFINITY);
                for code in 0..256usize {
                    let idx = (0..4).map(|e| ((code >> (2 * e)) & 3) as u16).collect();
                    let v = objective_value(&real, &PhaseConfig::new(idx, 2), 0, obj, 0.5, &cfg);
                    if v > best.1 {
                        best = (code, v);
                    }
                }
                best.0
            };
            assert_eq!(argmax(RisObjective::HarvestEnergy), argmax(RisObjective::DataRate));
        }
    }

    #[test]
    fn objective_values() {
        let cfg = ScenarioConfig::smoke();
        let real = ChannelRealization {
            h_ud: vec![c(1e-3, 0.0)],
            h_ur: vec![c(1.0, 0.0)],
            h_rd: vec![vec![c(0.0, 0.0)]],
        };
        let p = PhaseConfig::zeros(1, 2);
        let rate = objective_value(&real, &p, 0, RisObjective::DataRate, 0.3, &cfg);
        let snr = cfg.iotd.tx_power * 1e-6 / cfg.channel.noise;
        assert!((rate - (1.0 + snr).log2()).abs() < 1e-12);
        assert_eq!(objective_value(&real, &p, 0, RisObjective::HarvestEnergy, 0.0, &cfg), 0.0);
    }

    #[test]
    fn brute_force_two_levels() {
        let real = ChannelRealization {
            h_ud: vec![c(1.0, 0.0)],
            h_ur: vec![c(1.0, 0.0)],
            h_rd: vec![vec![c(-0.5, 0.0)]],
        };
        let (p, v) = brute_force_phases(&real, 0, 1).unwrap();
        assert_eq!(p.indices(), &[1]);
        assert!((v - 2.25).abs() < 1e-12);
    }

    #[test]
    fn brute_force_aligns_with_direct_path() {
        // Dominant reflected term: the best grid phase is the grid point
        // nearest to the continuous optimum arg(h_ud) - arg(term).
        let mut rng = RngStream::new(8, "align");
        for _ in 0..50 {
            let h_ud = complex_normal(&mut rng) * 0.1;
            let term = complex_normal(&mut rng) * 10.0;
            let real = ChannelRealization {
                h_ud: vec![h_ud],
                h_ur: vec![c(1.0, 0.0)],
                h_rd: vec![vec![term]],
            };
            let bits = 3;
            let (p, _) = brute_force_phases(&real, 0, bits).unwrap();
            let continuous = (h_ud.arg() - term.arg()).rem_euclid(2.0 * PI);
            let grid = crate::channel::phase_to_index(continuous, bits);
            assert_eq!(p.indices()[0], grid);
        }
    }

    #[test]
    fn brute_force_dominates_ascent() {
        let mut rng = RngStream::new(10, "inst");
        for _ in 0..20 {
            let real = random_instance(5, &mut rng);
            let ao = optimize_phases(&real, 0, &AoRisConfig::new(3, RisObjective::DataRate), 2, &mut rng);
            let (_, best) = brute_force_phases(&real, 0, 2).unwrap();
            assert!(best >= composite_channel(&real, &ao, 0).norm_sqr());
        }
    }

    #[test]
    fn brute_force_rejects_large_instances() {
        let mut rng = RngStream::new(11, "inst");
        let real = random_instance(11, &mut rng);
        let err = brute_force_phases(&real, 0, 2).unwrap_err();
        assert!(matches!(err, Error::InstanceTooLarge { exponent: 22, .. }));
    }
}
