//! Episodic environment: UAV motion, per-slot channels, charging, uploads,
//! AoI bookkeeping and the shaped reward.
//!
//! A slot runs in three stages. [`apply_move`] moves and clamps the UAV,
//! [`sample_realization`] draws the channels at the new position, and
//! [`resolve_slot`] applies charging and upload under two given phase
//! configurations. [`step`] chains the three with a [`PhaseSelector`].

use serde::{Deserialize, Serialize};

use crate::channel::{
    achievable_rate, composite_channel, sample_realization, ChannelRealization, PhaseConfig,
};
use crate::config::{Position3, ScenarioConfig};
use crate::energy::{
    charge_energy, harvested_energy, horizontal_velocity, propulsion_energy, update_aoi,
    update_buffer, IotdState, UavEnergyLedger,
};
use crate::error::{Error, Result};
use crate::ris::{optimize_phases, AoRisConfig, RisObjective};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub uav_pos: Position3,
    pub aoi: Vec<u32>,
    pub buffers: Vec<f64>,
    pub slot: usize,
    pub ledger: UavEnergyLedger,
}

impl EnvState {
    pub fn iotd(&self, n: usize) -> IotdState {
        IotdState {
            aoi: self.aoi[n],
            buffer: self.buffers[n],
        }
    }

    pub fn is_terminal(&self, cfg: &ScenarioConfig) -> bool {
        self.slot >= cfg.horizon
    }
}

/// Hybrid action: horizontal displacement, charging time and the scheduled
/// IoTD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub ax: f64,
    pub ay: f64,
    pub delta: f64,
    pub schedule: usize,
}

impl Action {
    pub fn validate(&self, cfg: &ScenarioConfig) -> Result<()> {
        let within = |v: f64, lo: f64, hi: f64| v.is_finite() && v >= lo && v <= hi;
        let (xm, ym) = (cfg.uav.max_step_x, cfg.uav.max_step_y);
        if !within(self.ax, -xm, xm) {
            return Err(Error::InvalidAction(format!("ax = {} outside ±{xm}", self.ax)));
        }
        if !within(self.ay, -ym, ym) {
            return Err(Error::InvalidAction(format!("ay = {} outside ±{ym}", self.ay)));
        }
        if !within(self.delta, 0.0, cfg.slot_len) {
            return Err(Error::InvalidAction(format!(
                "delta = {} outside [0, {}]",
                self.delta, cfg.slot_len
            )));
        }
        if self.schedule >= cfg.n_iotds() {
            return Err(Error::InvalidAction(format!(
                "schedule = {} but only {} IoTDs",
                self.schedule,
                cfg.n_iotds()
            )));
        }
        Ok(())
    }

    /// Maps a point of `[-1, 1]^3` onto the displacement and charging-time
    /// bounds.
    pub fn from_unit(unit: [f64; 3], schedule: usize, cfg: &ScenarioConfig) -> Self {
        let u = unit.map(|v| v.clamp(-1.0, 1.0));
        Self {
            ax: u[0] * cfg.uav.max_step_x,
            ay: u[1] * cfg.uav.max_step_y,
            delta: 0.5 * (u[2] + 1.0) * cfg.slot_len,
            schedule,
        }
    }

    /// Inverse of [`Action::from_unit`].
    pub fn to_unit(&self, cfg: &ScenarioConfig) -> [f64; 3] {
        let div = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        [
            div(self.ax, cfg.uav.max_step_x),
            div(self.ay, cfg.uav.max_step_y),
            2.0 * self.delta / cfg.slot_len - 1.0,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParts {
    pub aoi: f64,
    pub energy: f64,
    pub penalty: f64,
}

impl RewardParts {
    pub fn total(&self) -> f64 {
        self.aoi + self.energy + self.penalty
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: EnvState,
    pub reward: f64,
    pub reward_parts: RewardParts,
    pub success: bool,
    pub rate: f64,
    /// `(E^C, E^P)` for this slot, joules.
    pub energy_slot: (f64, f64),
    pub out_of_bounds: bool,
    pub done: bool,
}

/// One row of the per-slot trajectory trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub slot: usize,
    pub x: f64,
    pub y: f64,
    pub delta: f64,
    pub scheduled: usize,
    pub success: bool,
    pub rate: f64,
    pub e_charge: f64,
    pub e_propulsion: f64,
    pub r_aoi: f64,
    pub r_energy: f64,
    pub r_penalty: f64,
    pub avg_aoi: f64,
}

impl TraceRow {
    pub fn new(action: &Action, out: &StepOutcome) -> Self {
        let s = &out.next_state;
        Self {
            slot: s.slot,
            x: s.uav_pos.x,
            y: s.uav_pos.y,
            delta: action.delta,
            scheduled: action.schedule,
            success: out.success,
            rate: out.rate,
            e_charge: out.energy_slot.0,
            e_propulsion: out.energy_slot.1,
            r_aoi: out.reward_parts.aoi,
            r_energy: out.reward_parts.energy,
            r_penalty: out.reward_parts.penalty,
            avg_aoi: mean_aoi(&s.aoi),
        }
    }
}

pub(crate) fn mean_aoi(aoi: &[u32]) -> f64 {
    aoi.iter().map(|&a| f64::from(a)).sum::<f64>() / aoi.len() as f64
}

pub fn reset(cfg: &ScenarioConfig) -> EnvState {
    let n = cfg.n_iotds();
    EnvState {
        uav_pos: cfg.start_position(),
        aoi: vec![1; n],
        buffers: vec![cfg.iotd.initial_fill * cfg.iotd.buffer_cap; n],
        slot: 0,
        ledger: UavEnergyLedger::default(),
    }
}

/// Moves the UAV and clamps it to the area. The flag is set when the raw
/// move would have left the area.
pub fn apply_move(pos: Position3, action: &Action, cfg: &ScenarioConfig) -> (Position3, bool) {
    let a = &cfg.area;
    let (x, y) = (pos.x + action.ax, pos.y + action.ay);
    let out = !a.contains(x, y);
    (
        Position3::new(x.clamp(a.x_min, a.x_max), y.clamp(a.y_min, a.y_max), pos.z),
        out,
    )
}

/// AoI reward: positive when the summed age drops. The paper-literal sign
/// flips it.
pub fn reward_aoi(prev: &[u32], next: &[u32], paper_literal_sign: bool) -> f64 {
    debug_assert_eq!(prev.len(), next.len());
    let sum: i64 = prev
        .iter()
        .zip(next)
        .map(|(&p, &n)| i64::from(p) - i64::from(n))
        .sum();
    if paper_literal_sign {
        -(sum as f64)
    } else {
        sum as f64
    }
}

pub fn reward_energy(e_u: f64, omega: f64) -> f64 {
    debug_assert!(omega > 0.0);
    -e_u / omega
}

/// Normalized observation `[x, y, aoi/T ..., buffer/E_max ...]`, every
/// entry in `[0, 1]`.
pub fn observe(state: &EnvState, cfg: &ScenarioConfig) -> Vec<f64> {
    let a = &cfg.area;
    let t = cfg.horizon as f64;
    let mut obs = Vec::with_capacity(cfg.observation_len());
    obs.push((state.uav_pos.x - a.x_min) / (a.x_max - a.x_min));
    obs.push((state.uav_pos.y - a.y_min) / (a.y_max - a.y_min));
    // Terminal ages can reach T + 1.
    obs.extend(state.aoi.iter().map(|&v| (f64::from(v) / t).min(1.0)));
    obs.extend(state.buffers.iter().map(|&b| b / cfg.iotd.buffer_cap));
    obs
}

fn check_step(state: &EnvState, action: &Action, cfg: &ScenarioConfig) -> Result<()> {
    if state.is_terminal(cfg) {
        return Err(Error::EpisodeOver {
            slot: state.slot,
            horizon: cfg.horizon,
        });
    }
    action.validate(cfg)
}

/// Charging and upload for one slot, after the move and channel draw.
#[allow(clippy::too_many_arguments)]
pub fn resolve_slot(
    state: &EnvState,
    action: &Action,
    new_pos: Position3,
    out_of_bounds: bool,
    real: &ChannelRealization,
    phase_wpt: &PhaseConfig,
    phase_data: &PhaseConfig,
    cfg: &ScenarioConfig,
) -> StepOutcome {
    let n = cfg.n_iotds();
    let mut aoi = Vec::with_capacity(n);
    let mut buffers = Vec::with_capacity(n);
    let data = composite_channel(real, phase_data, action.schedule);
    let rate = achievable_rate(data, cfg.iotd.tx_power, cfg.channel.noise);
    let mut success = false;
    for i in 0..n {
        let h = composite_channel(real, phase_wpt, i);
        let charged = update_buffer(state.iotd(i), harvested_energy(action.delta, h, cfg), cfg);
        let (next, ok) = update_aoi(charged, i == action.schedule, action.delta, rate, cfg);
        success |= ok;
        aoi.push(next.aoi);
        buffers.push(next.buffer);
    }

    let v = horizontal_velocity(new_pos.x - state.uav_pos.x, new_pos.y - state.uav_pos.y, cfg.slot_len);
    let e_c = charge_energy(action.delta, cfg);
    let e_p = propulsion_energy(v, cfg);
    let reward_parts = RewardParts {
        aoi: reward_aoi(&state.aoi, &aoi, cfg.task.paper_literal_reward_sign),
        energy: reward_energy(e_c + e_p, cfg.task.omega),
        penalty: if out_of_bounds {
            cfg.task.boundary_penalty
        } else {
            0.0
        },
    };
    let next_state = EnvState {
        uav_pos: new_pos,
        aoi,
        buffers,
        slot: state.slot + 1,
        ledger: crate::energy::total_energy(state.ledger, e_c, e_p),
    };
    let done = next_state.is_terminal(cfg);
    StepOutcome {
        next_state,
        reward: reward_parts.total(),
        reward_parts,
        success,
        rate,
        energy_slot: (e_c, e_p),
        out_of_bounds,
        done,
    }
}

/// One slot with caller-supplied phase configurations.
pub fn step_with_phases(
    state: &EnvState,
    action: &Action,
    phase_wpt: &PhaseConfig,
    phase_data: &PhaseConfig,
    cfg: &ScenarioConfig,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    check_step(state, action, cfg)?;
    for p in [phase_wpt, phase_data] {
        if p.len() != cfg.ris.elements() {
            return Err(Error::Dimension {
                context: "RIS phase configuration",
                expected: cfg.ris.elements(),
                actual: p.len(),
            });
        }
    }
    let (pos, out) = apply_move(state.uav_pos, action, cfg);
    let real = sample_realization(pos, cfg, rng);
    Ok(resolve_slot(state, action, pos, out, &real, phase_wpt, phase_data, cfg))
}

/// Chooses the two per-slot phase configurations once channels are known.
pub trait PhaseSelector {
    /// Returns `(phase_wpt, phase_data)`.
    fn select(
        &mut self,
        real: &ChannelRealization,
        scheduled: usize,
        cfg: &ScenarioConfig,
        rng: &mut RngStream,
    ) -> (PhaseConfig, PhaseConfig);
}

/// Coordinate-ascent phases for the scheduled IoTD in both sub-slots.
#[derive(Debug, Clone, Copy)]
pub struct AoRisSelector;

impl PhaseSelector for AoRisSelector {
    fn select(
        &mut self,
        real: &ChannelRealization,
        scheduled: usize,
        cfg: &ScenarioConfig,
        rng: &mut RngStream,
    ) -> (PhaseConfig, PhaseConfig) {
        let wpt = AoRisConfig::new(cfg.ris.ao_iters, RisObjective::HarvestEnergy);
        let data = AoRisConfig::new(cfg.ris.ao_iters, RisObjective::DataRate);
        (
            optimize_phases(real, scheduled, &wpt, cfg.ris.bits, rng),
            optimize_phases(real, scheduled, &data, cfg.ris.bits, rng),
        )
    }
}

/// The same configuration in every slot.
#[derive(Debug, Clone)]
pub struct FixedSelector(pub PhaseConfig);

impl PhaseSelector for FixedSelector {
    fn select(
        &mut self,
        _: &ChannelRealization,
        _: usize,
        _: &ScenarioConfig,
        _: &mut RngStream,
    ) -> (PhaseConfig, PhaseConfig) {
        (self.0.clone(), self.0.clone())
    }
}

/// Independent uniform phase indices for each sub-slot.
#[derive(Debug, Clone, Copy)]
pub struct RandomSelector;

impl PhaseSelector for RandomSelector {
    fn select(
        &mut self,
        _: &ChannelRealization,
        _: usize,
        cfg: &ScenarioConfig,
        rng: &mut RngStream,
    ) -> (PhaseConfig, PhaseConfig) {
        let m = cfg.ris.elements();
        (
            PhaseConfig::random(m, cfg.ris.bits, rng),
            PhaseConfig::random(m, cfg.ris.bits, rng),
        )
    }
}

/// One full slot: move, draw channels, select phases, resolve.
pub fn step(
    state: &EnvState,
    action: &Action,
    selector: &mut dyn PhaseSelector,
    cfg: &ScenarioConfig,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    check_step(state, action, cfg)?;
    let (pos, out) = apply_move(state.uav_pos, action, cfg);
    let real = sample_realization(pos, cfg, rng);
    let (wpt, data) = selector.select(&real, action.schedule, cfg, rng);
    Ok(resolve_slot(state, action, pos, out, &real, &wpt, &data, cfg))
}

/// Writes trace rows as CSV.
pub fn write_trace<W: std::io::Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
