//! Scenario constants, geometry primitives and the config-file loader.
//!
//! A scenario is read from a TOML file with one table per group. Every key
//! is optional and falls back to [`ScenarioConfig::default`]. Power fields
//! take either a bare number (watts) or a string with a unit suffix, e.g.
//! `"30 dBm"`, `"1 W"` or `"1e-6 W"`.
//!
//! ```toml
//! layout_seed = 3
//!
//! [area]
//! x_max = 400.0
//!
//! [uav]
//! tx_power = "30 dBm"
//!
//! [iotd]
//! count = 3
//! positions = [{ x = 50.0, y = 60.0, z = 0.0 }]   # optional; drawn from layout_seed otherwise
//!
//! [task]
//! z_min = 3.0
//! ```
//!
//! Internally every power is kept in watts.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Converts a power level from dBm to watts.
pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

/// A point in the scenario frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

pub fn euclidean_distance(a: Position3, b: Position3) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AreaConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 400.0,
            y_min: 0.0,
            y_max: 400.0,
        }
    }
}

impl AreaConfig {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RisConfig {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing along rows, in wavelengths.
    pub row_spacing_wl: f64,
    /// Element spacing along columns, in wavelengths.
    pub col_spacing_wl: f64,
    /// Phase quantization bits.
    pub bits: u32,
    pub position: Position3,
    /// Coordinate-ascent sweeps per phase optimization.
    pub ao_iters: usize,
}

impl Default for RisConfig {
    fn default() -> Self {
        Self {
            rows: 8,
            cols: 8,
            row_spacing_wl: 0.5,
            col_spacing_wl: 0.5,
            bits: 2,
            position: Position3::new(0.0, 200.0, 20.0),
            ao_iters: 3,
        }
    }
}

impl RisConfig {
    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn levels(&self) -> usize {
        1usize << self.bits
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavConfig {
    pub altitude: f64,
    pub max_step_x: f64,
    pub max_step_y: f64,
    #[serde(deserialize_with = "de_power")]
    pub tx_power: f64,
    /// Horizontal start position; area center when absent.
    pub start: Option<(f64, f64)>,
}

impl Default for UavConfig {
    fn default() -> Self {
        Self {
            altitude: 20.0,
            max_step_x: 20.0,
            max_step_y: 20.0,
            tx_power: dbm_to_watt(30.0),
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IotdConfig {
    pub count: usize,
    #[serde(deserialize_with = "de_power")]
    pub tx_power: f64,
    /// Energy buffer capacity, joules.
    pub buffer_cap: f64,
    /// Buffer level at episode reset as a fraction of capacity.
    pub initial_fill: f64,
    /// Explicit ground positions; drawn uniformly from `layout_seed` when empty.
    pub positions: Vec<Position3>,
}

impl Default for IotdConfig {
    fn default() -> Self {
        Self {
            count: 10,
            tx_power: dbm_to_watt(-30.0),
            buffer_cap: 5e-6,
            initial_fill: 0.5,
            positions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Channel gain at the 1 m reference distance.
    pub ref_gain: f64,
    pub wavelength: f64,
    /// Path-loss exponent, UAV to IoTD.
    pub k_ud: f64,
    /// Path-loss exponent, UAV to RIS.
    pub k_ur: f64,
    /// Path-loss exponent, RIS to IoTD.
    pub k_rd: f64,
    /// Rician factor of the direct link; `inf` disables the scattered part.
    pub rician_ud: f64,
    pub rician_rd: f64,
    #[serde(deserialize_with = "de_power")]
    pub noise: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            ref_gain: 1e-3,
            wavelength: 0.125,
            k_ud: 2.0,
            k_ur: 2.2,
            k_rd: 2.8,
            rician_ud: 1.0,
            rician_rd: 1.0,
            noise: dbm_to_watt(-100.0),
        }
    }
}

/// Harvest efficiency and rotary-wing propulsion constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub eta: f64,
    /// Blade profile power in hover, W.
    pub p_blade: f64,
    /// Induced power in hover, W.
    pub p_induced: f64,
    /// Rotor blade tip speed, m/s.
    pub tip_speed: f64,
    /// Mean rotor induced velocity in hover, m/s.
    pub hover_induced_velocity: f64,
    pub drag_ratio: f64,
    pub air_density: f64,
    pub rotor_solidity: f64,
    pub rotor_area: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            eta: 0.8,
            p_blade: 79.85,
            p_induced: 88.63,
            tip_speed: 120.0,
            hover_induced_velocity: 4.03,
            drag_ratio: 0.6,
            air_density: 1.225,
            rotor_solidity: 0.05,
            rotor_area: 0.503,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    /// Minimum upload size, bits/Hz.
    pub z_min: f64,
    /// Energy reward scale.
    pub omega: f64,
    /// Reward applied when a move would leave the area (negative).
    pub boundary_penalty: f64,
    /// Literal sign convention for the AoI reward: rewards AoI growth.
    pub paper_literal_reward_sign: bool,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            z_min: 3.0,
            omega: 1000.0,
            boundary_penalty: -100.0,
            paper_literal_reward_sign: false,
        }
    }
}

/// Complete, immutable description of one simulated network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Seed for drawing IoTD positions when none are listed.
    pub layout_seed: u64,
    /// Slots per episode.
    pub horizon: usize,
    /// Slot length, seconds.
    pub slot_len: f64,
    pub area: AreaConfig,
    pub ris: RisConfig,
    pub uav: UavConfig,
    pub iotd: IotdConfig,
    pub channel: ChannelConfig,
    pub energy: EnergyConfig,
    pub task: TaskConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            layout_seed: 1,
            horizon: 120,
            slot_len: 1.0,
            area: AreaConfig::default(),
            ris: RisConfig::default(),
            uav: UavConfig::default(),
            iotd: IotdConfig::default(),
            channel: ChannelConfig::default(),
            energy: EnergyConfig::default(),
            task: TaskConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Full-size scenario with IoTD positions drawn from the layout seed.
    pub fn full_size() -> Self {
        Self::default().resolved().expect("default scenario is valid")
    }

    /// Desk-scale scenario: 3 IoTDs and 20 slots on a 200 m square, so
    /// every device is a few slots' flight from the start. The RIS keeps
    /// its mid-edge placement and the boundary penalty is scaled to the
    /// smaller per-slot AoI reward.
    pub fn smoke() -> Self {
        let mut cfg = Self::default();
        cfg.iotd.count = 3;
        cfg.horizon = 20;
        cfg.area.x_max = 200.0;
        cfg.area.y_max = 200.0;
        cfg.ris.position = Position3::new(0.0, 100.0, 20.0);
        cfg.task.boundary_penalty = -10.0;
        cfg.resolved().expect("smoke scenario is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| text[s].lines().next().unwrap_or("").trim().to_owned())
                .unwrap_or_default();
            Error::config(field, e.message().to_owned())
        })?;
        cfg.resolved()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    /// Fills in IoTD positions from the layout seed when absent, then
    /// validates.
    pub fn resolved(mut self) -> Result<Self> {
        if self.iotd.positions.is_empty() {
            // the layout draw needs a sane area
            self.validate()?;
            self.iotd.positions = random_layout(&self.area, self.iotd.count, self.layout_seed);
        } else if self.iotd.positions.len() != self.iotd.count {
            return Err(Error::config(
                "iotd.positions",
                format!(
                    "{} positions listed but iotd.count = {}",
                    self.iotd.positions.len(),
                    self.iotd.count
                ),
            ));
        }
        self.validate()?;
        Ok(self)
    }

    /// Regenerates positions for a new count, keeping the layout seed.
    pub fn with_iotd_count(mut self, count: usize) -> Result<Self> {
        self.iotd.count = count;
        self.iotd.positions.clear();
        self.resolved()
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.area;
        check(
            "area.x_min",
            a.x_min < a.x_max,
            "must be below area.x_max",
        )?;
        check(
            "area.y_min",
            a.y_min < a.y_max,
            "must be below area.y_max",
        )?;
        check("iotd.count", self.iotd.count >= 1, "must be at least 1")?;
        check("horizon", self.horizon >= 1, "must be at least 1")?;
        check("slot_len", self.slot_len > 0.0, "must be positive")?;
        let eta = self.energy.eta;
        check("energy.eta", eta > 0.0 && eta < 1.0, "must lie in (0, 1)")?;
        check(
            "iotd.buffer_cap",
            self.iotd.buffer_cap > 0.0,
            "must be positive",
        )?;
        check(
            "iotd.initial_fill",
            (0.0..=1.0).contains(&self.iotd.initial_fill),
            "must lie in [0, 1]",
        )?;
        check("ris.bits", self.ris.bits >= 1, "must be at least 1")?;
        check("ris.bits", self.ris.bits <= 16, "must be at most 16")?;
        check("ris.rows", self.ris.rows >= 1, "must be at least 1")?;
        check("ris.cols", self.ris.cols >= 1, "must be at least 1")?;
        check("ris.ao_iters", self.ris.ao_iters >= 1, "must be at least 1")?;
        check(
            "ris.position",
            self.ris.position.is_finite(),
            "must be finite",
        )?;
        check("uav.altitude", self.uav.altitude >= 0.0, "must be non-negative")?;
        check(
            "uav.max_step_x",
            self.uav.max_step_x >= 0.0,
            "must be non-negative",
        )?;
        check(
            "uav.max_step_y",
            self.uav.max_step_y >= 0.0,
            "must be non-negative",
        )?;
        if let Some((x, y)) = self.uav.start {
            check("uav.start", a.contains(x, y), "must lie inside the area")?;
        }
        check("uav.tx_power", self.uav.tx_power > 0.0, "must be positive")?;
        check("iotd.tx_power", self.iotd.tx_power > 0.0, "must be positive")?;
        let c = &self.channel;
        check("channel.ref_gain", c.ref_gain > 0.0, "must be positive")?;
        check("channel.wavelength", c.wavelength > 0.0, "must be positive")?;
        check("channel.noise", c.noise > 0.0, "must be positive")?;
        check("channel.rician_ud", c.rician_ud >= 0.0, "must be non-negative")?;
        check("channel.rician_rd", c.rician_rd >= 0.0, "must be non-negative")?;
        check("task.omega", self.task.omega > 0.0, "must be positive")?;
        check(
            "task.boundary_penalty",
            self.task.boundary_penalty <= 0.0,
            "must be non-positive",
        )?;
        for (i, p) in self.iotd.positions.iter().enumerate() {
            if !p.is_finite() || !a.contains(p.x, p.y) {
                return Err(Error::config(
                    format!("iotd.positions[{i}]"),
                    format!("({}, {}) lies outside the area", p.x, p.y),
                ));
            }
        }
        Ok(())
    }

    pub fn n_iotds(&self) -> usize {
        self.iotd.count
    }

    pub fn row_spacing(&self) -> f64 {
        self.ris.row_spacing_wl * self.channel.wavelength
    }

    pub fn col_spacing(&self) -> f64 {
        self.ris.col_spacing_wl * self.channel.wavelength
    }

    pub fn start_position(&self) -> Position3 {
        let (x, y) = self.uav.start.unwrap_or_else(|| self.area.center());
        Position3::new(x, y, self.uav.altitude)
    }

    /// Length of the observation vector, `2 + 2N`.
    pub fn observation_len(&self) -> usize {
        2 + 2 * self.n_iotds()
    }
}

fn check(field: &str, ok: bool, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, reason))
    }
}

fn random_layout(area: &AreaConfig, count: usize, seed: u64) -> Vec<Position3> {
    let mut rng = RngStream::new(seed, "layout/iotd");
    (0..count)
        .map(|_| {
            let x = rng.random_range(area.x_min..=area.x_max);
            let y = rng.random_range(area.y_min..=area.y_max);
            Position3::new(x, y, 0.0)
        })
        .collect()
}

/// Parses a power literal: a bare number is watts, strings take a `dBm`,
/// `mW` or `W` suffix.
pub fn parse_power(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (num, scale): (&str, fn(f64) -> f64) = if let Some(n) = lower.strip_suffix("dbm") {
        (n, dbm_to_watt)
    } else if let Some(n) = lower.strip_suffix("mw") {
        (n, |v| v * 1e-3)
    } else if let Some(n) = lower.strip_suffix('w') {
        (n, |v| v)
    } else {
        (lower.as_str(), |v| v)
    };
    num.trim()
        .parse::<f64>()
        .map(scale)
        .map_err(|_| format!("cannot parse power `{t}` (expected e.g. \"30 dBm\" or \"1 W\")"))
}

fn de_power<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Text(s) => parse_power(&s).map_err(serde::de::Error::custom),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dbm_conversions() {
        assert_relative_eq!(dbm_to_watt(30.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watt(-30.0), 1e-6, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watt(-100.0), 1e-13, max_relative = 1e-15);
    }

    #[test]
    fn distances() {
        let o = Position3::new(0.0, 0.0, 0.0);
        assert_eq!(euclidean_distance(o, Position3::new(3.0, 4.0, 0.0)), 5.0);
        let p = Position3::new(1.0, 1.0, 1.0);
        assert_eq!(euclidean_distance(p, p), 0.0);
        assert_eq!(euclidean_distance(Position3::new(0.0, 0.0, 50.0), o), 50.0);
    }

    #[test]
    fn power_literals() {
        assert_relative_eq!(parse_power("30 dBm").unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(parse_power("-30dBm").unwrap(), 1e-6, max_relative = 1e-15);
        assert_eq!(parse_power("2 W").unwrap(), 2.0);
        assert_eq!(parse_power("5 mW").unwrap(), 5e-3);
        assert_eq!(parse_power("0.25").unwrap(), 0.25);
        assert!(parse_power("loud").is_err());
    }

    #[test]
    fn defaults_are_valid() {
        let cfg = ScenarioConfig::full_size();
        assert_eq!(cfg.iotd.positions.len(), 10);
        assert_eq!(cfg.ris.elements(), 64);
        assert_eq!(cfg.observation_len(), 22);
        let smoke = ScenarioConfig::smoke();
        assert_eq!(smoke.iotd.positions.len(), 3);
        assert_eq!(smoke.horizon, 20);
    }

    #[test]
    fn toml_overrides_and_units() {
        let cfg = ScenarioConfig::from_toml_str(
            r#"
            horizon = 30
            [uav]
            tx_power = "27 dBm"
            [iotd]
            count = 2
            positions = [{ x = 10.0, y = 20.0, z = 0.0 }, { x = 30.0, y = 40.0, z = 0.0 }]
            [channel]
            noise = "-90 dBm"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.horizon, 30);
        assert_relative_eq!(cfg.uav.tx_power, dbm_to_watt(27.0));
        assert_relative_eq!(cfg.channel.noise, 1e-12, max_relative = 1e-12);
        assert_eq!(cfg.iotd.positions[1], Position3::new(30.0, 40.0, 0.0));
    }

    #[test]
    fn validation_names_the_field() {
        let err = ScenarioConfig::from_toml_str("[energy]\neta = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("energy.eta"), "{err}");

        let err = ScenarioConfig::from_toml_str("[area]\nx_min = 500.0\n").unwrap_err();
        assert!(err.to_string().contains("area.x_min"), "{err}");

        let err = ScenarioConfig::from_toml_str(
            "[iotd]\ncount = 1\npositions = [{ x = 900.0, y = 0.0, z = 0.0 }]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("iotd.positions[0]"), "{err}");

        let err = ScenarioConfig::from_toml_str("[ris]\nbits = 0\n").unwrap_err();
        assert!(err.to_string().contains("ris.bits"), "{err}");

        assert!(ScenarioConfig::from_toml_str("[uav]\nwarp = 3\n").is_err());
    }

    #[test]
    fn layout_is_seeded() {
        let a = ScenarioConfig::smoke();
        let b = ScenarioConfig::smoke();
        assert_eq!(a.iotd.positions, b.iotd.positions);
        let mut c = ScenarioConfig::default();
        c.iotd.count = 3;
        c.horizon = 20;
        c.layout_seed = 99;
        let c = c.resolved().unwrap();
        assert_ne!(a.iotd.positions, c.iotd.positions);
    }
}
