//! IoTD energy buffers, UAV energy accounting and the AoI update law.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{EnergyConfig, ScenarioConfig};
use crate::error::{Error, Result};

/// Age of information and stored energy of one IoTD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IotdState {
    /// Slots, at least 1.
    pub aoi: u32,
    /// Joules, in `[0, E_max]`.
    pub buffer: f64,
}

impl IotdState {
    pub fn fresh(buffer: f64) -> Self {
        Self { aoi: 1, buffer }
    }
}

/// Cumulative UAV energy split into charging and propulsion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UavEnergyLedger {
    pub charge_j: f64,
    pub propulsion_j: f64,
}

impl UavEnergyLedger {
    pub fn total(&self) -> f64 {
        self.charge_j + self.propulsion_j
    }
}

/// Energy harvested during a charging window of `delta` seconds (linear
/// harvesting model). This is the single point to swap in another model.
pub fn harvested_energy(delta: f64, composite: Complex64, cfg: &ScenarioConfig) -> f64 {
    delta * cfg.energy.eta * cfg.uav.tx_power * composite.norm_sqr()
}

pub fn update_buffer(state: IotdState, harvested: f64, cfg: &ScenarioConfig) -> IotdState {
    debug_assert!(harvested >= 0.0);
    IotdState {
        buffer: (state.buffer + harvested).min(cfg.iotd.buffer_cap),
        ..state
    }
}

/// UAV energy spent on wireless power transfer.
pub fn charge_energy(delta: f64, cfg: &ScenarioConfig) -> f64 {
    cfg.uav.tx_power * delta
}

pub fn horizontal_velocity(ax: f64, ay: f64, slot_len: f64) -> f64 {
    ax.hypot(ay) / slot_len
}

/// Rotary-wing propulsion power at horizontal speed `v`, watts.
///
/// Sum of blade profile, induced and parasite power.
pub fn propulsion_power(v: f64, e: &EnergyConfig) -> f64 {
    let tip = v / e.tip_speed;
    let blade = e.p_blade * (1.0 + 3.0 * tip * tip);
    let r = v / e.hover_induced_velocity;
    let r2 = r * r;
    let induced = e.p_induced * ((1.0 + 0.25 * r2 * r2).sqrt() - 0.5 * r2).sqrt();
    let parasite = 0.5 * e.drag_ratio * e.air_density * e.rotor_solidity * e.rotor_area * v.powi(3);
    blade + induced + parasite
}

/// Propulsion energy over one slot.
pub fn propulsion_energy(v: f64, cfg: &ScenarioConfig) -> f64 {
    debug_assert!(v >= 0.0);
    propulsion_power(v, &cfg.energy) * cfg.slot_len
}

/// Adds one slot of charging and propulsion energy.
pub fn total_energy(ledger: UavEnergyLedger, e_c: f64, e_p: f64) -> UavEnergyLedger {
    debug_assert!(e_c >= 0.0 && e_p >= 0.0);
    UavEnergyLedger {
        charge_j: ledger.charge_j + e_c,
        propulsion_j: ledger.propulsion_j + e_p,
    }
}

/// Applies one slot of the AoI law to a single IoTD.
///
/// The upload succeeds when the IoTD is scheduled, the data window carries
/// at least `Z_min` and the buffer covers the transmit energy. A successful
/// upload resets the age to 1 and draws the transmit energy from the buffer.
pub fn update_aoi(
    state: IotdState,
    scheduled: bool,
    delta: f64,
    rate: f64,
    cfg: &ScenarioConfig,
) -> (IotdState, bool) {
    let window = cfg.slot_len - delta;
    let tx_energy = window * cfg.iotd.tx_power;
    let success = scheduled && window * rate >= cfg.task.z_min && tx_energy <= state.buffer;
    if success {
        debug_assert!(state.buffer >= tx_energy);
        (
            IotdState {
                aoi: 1,
                buffer: (state.buffer - tx_energy).max(0.0),
            },
            true,
        )
    } else {
        (
            IotdState {
                aoi: state.aoi + 1,
                ..state
            },
            false,
        )
    }
}

/// Mean age over all IoTDs.
pub fn average_aoi(ages: &[u32]) -> Result<f64> {
    if ages.is_empty() {
        return Err(Error::InvalidScenario(
            "average AoI of an empty IoTD set".into(),
        ));
    }
    Ok(ages.iter().map(|&a| f64::from(a)).sum::<f64>() / ages.len() as f64)
}

/// Speed minimizing propulsion energy per meter, found by golden-section
/// search on `[lo, hi]`.
pub fn max_endurance_speed(e: &EnergyConfig, lo: f64, hi: f64) -> f64 {
    let cost = |v: f64| propulsion_power(v, e) / v;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    while (b - a).abs() > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::smoke()
    }

    #[test]
    fn harvest_examples() {
        let cfg = cfg();
        let h = Complex64::new(1e-9f64.sqrt(), 0.0);
        assert_eq!(harvested_energy(0.0, h, &cfg), 0.0);
        assert_relative_eq!(harvested_energy(1.0, h, &cfg), 8e-10, max_relative = 1e-12);
        let one = harvested_energy(0.3, h, &cfg);
        assert_eq!(harvested_energy(0.6, h, &cfg), 2.0 * one);
    }

    #[test]
    fn buffer_clamps_and_adds() {
        let cfg = cfg();
        let cap = cfg.iotd.buffer_cap;
        assert_eq!(update_buffer(IotdState::fresh(cap), 1e-6, &cfg).buffer, cap);
        assert_eq!(update_buffer(IotdState::fresh(0.0), 0.0, &cfg).buffer, 0.0);
        assert_relative_eq!(
            update_buffer(IotdState::fresh(1e-6), 2e-6, &cfg).buffer,
            3e-6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn charging_energy() {
        let cfg = cfg();
        assert_eq!(charge_energy(0.0, &cfg), 0.0);
        assert_relative_eq!(charge_energy(0.5, &cfg), 0.5, max_relative = 1e-12);
        assert_relative_eq!(charge_energy(cfg.slot_len, &cfg), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn velocities() {
        assert_eq!(horizontal_velocity(3.0, 4.0, 1.0), 5.0);
        assert_eq!(horizontal_velocity(0.0, 0.0, 1.0), 0.0);
        assert_relative_eq!(horizontal_velocity(20.0, 20.0, 1.0), 800f64.sqrt());
    }

    #[test]
    fn hover_and_parasite() {
        let cfg = cfg();
        assert_relative_eq!(propulsion_energy(0.0, &cfg), 168.48, max_relative = 1e-12);
        let e = &cfg.energy;
        let parasite = 0.5 * e.drag_ratio * e.air_density * e.rotor_solidity * e.rotor_area * 1000.0;
        assert_relative_eq!(parasite, 9.243, max_relative = 1e-3);
    }

    #[test]
    fn ledger_accumulates() {
        let l = total_energy(UavEnergyLedger::default(), 1.0, 168.48);
        assert_eq!((l.charge_j, l.propulsion_j), (1.0, 168.48));
        assert_eq!(total_energy(l, 0.0, 0.0), l);
        let two = total_energy(total_energy(UavEnergyLedger::default(), 0.5, 100.0), 0.5, 100.0);
        assert_eq!((two.charge_j, two.propulsion_j), (1.0, 200.0));
        assert_eq!(two.total(), 201.0);
    }

    #[test]
    fn aoi_branches() {
        let cfg = cfg();
        let full = IotdState { aoi: 7, buffer: cfg.iotd.buffer_cap };
        let (s, ok) = update_aoi(full, true, 0.2, 1e3, &cfg);
        assert!(ok);
        assert_eq!(s.aoi, 1);
        assert_relative_eq!(s.buffer, cfg.iotd.buffer_cap - 0.8 * cfg.iotd.tx_power);

        let (s, ok) = update_aoi(full, false, 0.2, 1e3, &cfg);
        assert!(!ok);
        assert_eq!(s, IotdState { aoi: 8, ..full });

        // window * rate just below the threshold
        let rate = (cfg.task.z_min - 1e-9) / 0.5;
        let (s, ok) = update_aoi(full, true, 0.5, rate, &cfg);
        assert!(!ok);
        assert_eq!(s.aoi, 8);

        // not enough stored energy
        let empty = IotdState { aoi: 2, buffer: 0.79 * cfg.iotd.tx_power };
        let (s, ok) = update_aoi(empty, true, 0.2, 1e3, &cfg);
        assert!(!ok);
        assert_eq!(s.buffer, empty.buffer);

        // zero-length data window never uploads
        let (_, ok) = update_aoi(full, true, cfg.slot_len, 1e9, &cfg);
        assert!(!ok);
    }

    #[test]
    fn averages() {
        assert_eq!(average_aoi(&[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(average_aoi(&[1, 3]).unwrap(), 2.0);
        assert_eq!(average_aoi(&[9; 5]).unwrap(), 9.0);
        assert!(average_aoi(&[]).is_err());
    }

    #[test]
    fn endurance_speed_matches_grid_scan() {
        let e = EnergyConfig::default();
        let v = max_endurance_speed(&e, 0.5, 60.0);
        let mut best = (f64::INFINITY, 0.0);
        let mut s = 0.5;
        while s <= 60.0 {
            let c = propulsion_power(s, &e) / s;
            if c < best.0 {
                best = (c, s);
            }
            s += 0.01;
        }
        assert!((v - best.1).abs() < 0.02, "golden {v} vs grid {}", best.1);
    }
}
