//! Synthetic radar data with exact heart-rate labels.
//!
//! A chest at range `r0` moves by `d(t)` (respiration + cardiac + drift).
//! FMCW chirps carry a beat tone whose one-sided range-FFT peak sits at
//! `(r0 + d) / Δr` with phase `4π (r0 + d) / λ`; IR-UWB profiles put the same
//! phase on a sinc-shaped return spanning ±2 bins around that range. Both add
//! three time-constant clutter returns and white Gaussian noise.

mod fmcw;
mod radar;
mod scene;
mod split;
mod uwb;

pub use fmcw::simulate_fmcw;
pub use radar::{RadarKind, RadarSpec};
pub use scene::{
    displacement_parts, displacement_series, heart_rate_series, DisplacementParts,
    RespirationWaveform, SceneSpec,
};
pub use split::{split_counts, SplitRatios};
pub use uwb::simulate_uwb;

use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::Rng as _;

use crate::rng::{self, stream};

/// Number of static clutter returns per scene.
pub const CLUTTER_RETURNS: usize = 3;

#[derive(Debug, Clone)]
pub(crate) struct ClutterReturn {
    pub bin: usize,
    pub amplitude: f64,
    /// Phase per antenna, rad.
    pub phases: Vec<f64>,
}

pub(crate) fn clutter_returns(scene: &SceneSpec, bins: usize, antennas: usize) -> Vec<ClutterReturn> {
    if scene.clutter_amplitude == 0.0 || bins < 2 {
        return Vec::new();
    }
    let mut rng = rng::seeded(scene.rng_seed, stream::CLUTTER);
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < CLUTTER_RETURNS.min(bins - 1) {
        let b = rng.random_range(1..bins);
        if !chosen.contains(&b) {
            chosen.push(b);
        }
    }
    chosen
        .into_iter()
        .map(|bin| ClutterReturn {
            bin,
            amplitude: scene.clutter_amplitude * rng.random_range(0.5..1.5),
            phases: (0..antennas).map(|_| rng.random_range(0.0..2.0 * PI)).collect(),
        })
        .collect()
}

/// Static per-antenna phase offsets from receiver placement, rad.
pub(crate) fn antenna_phases(scene: &SceneSpec, antennas: usize) -> Vec<f64> {
    let mut rng = rng::seeded(scene.rng_seed, stream::ANTENNA);
    (0..antennas)
        .map(|a| if a == 0 { 0.0 } else { rng.random_range(0.0..2.0 * PI) })
        .collect()
}
