//! Per-slot channel synthesis for the direct and RIS-reflected links.
//!
//! The direct UAV-IoTD link and the RIS-IoTD link are Rician; the UAV-RIS
//! link is deterministic line-of-sight. Angles of arrival/departure are the
//! elevation (`theta`) and azimuth (`xi`) of the link vector seen from the
//! RIS. Scattered components are redrawn on every call (block fading per
//! slot).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{euclidean_distance, Position3, ScenarioConfig};

/// Quantized RIS phase indices, one per element in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseConfig {
    indices: Vec<u16>,
    bits: u32,
}

impl PhaseConfig {
    pub fn new(indices: Vec<u16>, bits: u32) -> Self {
        let levels = 1u32 << bits;
        assert!(
            indices.iter().all(|&i| u32::from(i) < levels),
            "phase index outside [0, 2^{bits})"
        );
        Self { indices, bits }
    }

    pub fn zeros(elements: usize, bits: u32) -> Self {
        Self::new(vec![0; elements], bits)
    }

    /// Every element set to the grid point nearest `phase` (radians).
    pub fn uniform(elements: usize, bits: u32, phase: f64) -> Self {
        Self::new(vec![phase_to_index(phase, bits); elements], bits)
    }

    pub fn random<R: Rng + ?Sized>(elements: usize, bits: u32, rng: &mut R) -> Self {
        let levels = 1u16 << bits;
        Self::new(
            (0..elements).map(|_| rng.random_range(0..levels)).collect(),
            bits,
        )
    }

    pub fn indices(&self) -> &[u16] {
        &self.indices
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn set(&mut self, element: usize, index: u16) {
        assert!(u32::from(index) < (1u32 << self.bits));
        self.indices[element] = index;
    }

    pub fn phase(&self, element: usize) -> f64 {
        index_to_phase(self.indices[element], self.bits)
    }

    /// Unit-modulus reflection coefficients `e^{j phi_m}`.
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.indices
            .iter()
            .map(|&i| Complex64::from_polar(1.0, index_to_phase(i, self.bits)))
            .collect()
    }
}

pub fn index_to_phase(index: u16, bits: u32) -> f64 {
    2.0 * PI * f64::from(index) / f64::from(1u32 << bits)
}

/// Nearest quantization level to `phase`, wrapping around `2 pi`.
pub fn phase_to_index(phase: f64, bits: u32) -> u16 {
    let levels = f64::from(1u32 << bits);
    let step = 2.0 * PI / levels;
    let k = (phase.rem_euclid(2.0 * PI) / step).round() as u32;
    (k % (1u32 << bits)) as u16
}

/// Complex channel coefficients of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Direct UAV-IoTD coefficient per IoTD.
    pub h_ud: Vec<Complex64>,
    /// UAV-RIS vector, one entry per element.
    pub h_ur: Vec<Complex64>,
    /// RIS-IoTD vector per IoTD.
    pub h_rd: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    pub fn n_iotds(&self) -> usize {
        self.h_ud.len()
    }

    pub fn elements(&self) -> usize {
        self.h_ur.len()
    }

    /// Per-element cascaded gains `h_rd[n][m] * h_ur[m]` for one IoTD.
    pub fn cascaded(&self, iotd: usize) -> Vec<Complex64> {
        self.h_rd[iotd]
            .iter()
            .zip(&self.h_ur)
            .map(|(rd, ur)| rd * ur)
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.h_ud.iter().chain(&self.h_ur).all(|c| c.is_finite())
            && self.h_rd.iter().flatten().all(|c| c.is_finite())
    }
}

/// Uniform planar array response: Kronecker product of the row and column
/// steering vectors, row-major.
pub fn steering_vector(
    theta: f64,
    xi: f64,
    rows: usize,
    cols: usize,
    row_spacing: f64,
    col_spacing: f64,
    wavelength: f64,
) -> Vec<Complex64> {
    let row_step = -2.0 * PI * row_spacing * theta.sin() * xi.cos() / wavelength;
    let col_step = -2.0 * PI * col_spacing * theta.sin() * xi.sin() / wavelength;
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let phase = row_step * r as f64 + col_step * c as f64;
            out.push(Complex64::from_polar(1.0, phase));
        }
    }
    out
}

/// Elevation and azimuth of `to` as seen from `from`.
pub fn link_angles(from: Position3, to: Position3) -> (f64, f64) {
    let (dx, dy, dz) = (to.x - from.x, to.y - from.y, to.z - from.z);
    let horizontal = dx.hypot(dy);
    (dz.atan2(horizontal), dy.atan2(dx))
}

/// LoS and NLoS amplitude weights for a Rician factor; an infinite factor
/// means pure line of sight.
pub fn rician_weights(k: f64) -> (f64, f64) {
    if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
    }
}

/// Draws a circularly-symmetric complex normal with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn path_amplitude(cfg: &ScenarioConfig, distance: f64, exponent: f64) -> f64 {
    (cfg.channel.ref_gain / distance.powf(exponent)).sqrt()
}

pub fn sample_direct<R: Rng + ?Sized>(
    uav: Position3,
    iotd: Position3,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Complex64 {
    let d = euclidean_distance(uav, iotd);
    debug_assert!(d > 0.0, "UAV and IoTD coincide");
    let (w_los, w_nlos) = rician_weights(cfg.channel.rician_ud);
    let los = Complex64::from_polar(1.0, -2.0 * PI * d / cfg.channel.wavelength);
    let nlos = if w_nlos > 0.0 {
        complex_normal(rng)
    } else {
        Complex64::new(0.0, 0.0)
    };
    (los * w_los + nlos * w_nlos) * path_amplitude(cfg, d, cfg.channel.k_ud)
}

pub fn sample_uav_ris(uav: Position3, ris: Position3, cfg: &ScenarioConfig) -> Vec<Complex64> {
    let d = euclidean_distance(uav, ris);
    debug_assert!(d > 0.0, "UAV and RIS coincide");
    let (theta, xi) = link_angles(ris, uav);
    let amp = path_amplitude(cfg, d, cfg.channel.k_ur);
    steering_vector(
        theta,
        xi,
        cfg.ris.rows,
        cfg.ris.cols,
        cfg.row_spacing(),
        cfg.col_spacing(),
        cfg.channel.wavelength,
    )
    .into_iter()
    .map(|s| s * amp)
    .collect()
}

pub fn sample_ris_iotd<R: Rng + ?Sized>(
    ris: Position3,
    iotd: Position3,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Vec<Complex64> {
    let d = euclidean_distance(ris, iotd);
    debug_assert!(d > 0.0, "RIS and IoTD coincide");
    let (theta, xi) = link_angles(ris, iotd);
    let (w_los, w_nlos) = rician_weights(cfg.channel.rician_rd);
    let amp = path_amplitude(cfg, d, cfg.channel.k_rd);
    steering_vector(
        theta,
        xi,
        cfg.ris.rows,
        cfg.ris.cols,
        cfg.row_spacing(),
        cfg.col_spacing(),
        cfg.channel.wavelength,
    )
    .into_iter()
    .map(|s| {
        let nlos = if w_nlos > 0.0 {
            complex_normal(rng)
        } else {
            Complex64::new(0.0, 0.0)
        };
        (s * w_los + nlos * w_nlos) * amp
    })
    .collect()
}

/// Samples every link for a UAV position.
pub fn sample_realization<R: Rng + ?Sized>(
    uav: Position3,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> ChannelRealization {
    let ris = cfg.ris.position;
    let h_ud = cfg
        .iotd
        .positions
        .iter()
        .map(|&p| sample_direct(uav, p, cfg, rng))
        .collect();
    let h_ur = sample_uav_ris(uav, ris, cfg);
    let h_rd = cfg
        .iotd
        .positions
        .iter()
        .map(|&p| sample_ris_iotd(ris, p, cfg, rng))
        .collect();
    ChannelRealization { h_ud, h_ur, h_rd }
}

/// Effective UAV-IoTD channel: direct plus phase-shifted reflected paths.
pub fn composite_channel(real: &ChannelRealization, phases: &PhaseConfig, iotd: usize) -> Complex64 {
    debug_assert_eq!(phases.len(), real.elements());
    let reflected: Complex64 = real.h_rd[iotd]
        .iter()
        .zip(&real.h_ur)
        .zip(phases.indices())
        .map(|((rd, ur), &k)| rd * Complex64::from_polar(1.0, index_to_phase(k, phases.bits())) * ur)
        .sum();
    real.h_ud[iotd] + reflected
}

/// Achievable rate in bits/s/Hz.
pub fn achievable_rate(composite: Complex64, tx_power: f64, noise: f64) -> f64 {
    (1.0 + tx_power * composite.norm_sqr() / noise).log2()
}
