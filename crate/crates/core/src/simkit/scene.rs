use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::radar::RadarSpec;
use crate::rng::{self, stream};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RespirationWaveform {
    Sinusoid,
    /// Squared raised cosine rescaled to [-1, 1]: fundamental plus a first
    /// harmonic a quarter of its size.
    #[default]
    RaisedCosine,
}

impl RespirationWaveform {
    /// Unit-amplitude waveform at phase `theta`.
    pub fn eval(self, theta: f64) -> f64 {
        match self {
            RespirationWaveform::Sinusoid => theta.sin(),
            RespirationWaveform::RaisedCosine => {
                let rc = 0.5 * (1.0 - theta.cos());
                2.0 * rc * rc - 1.0
            }
        }
    }
}

/// One synthetic subject in front of one radar.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SceneSpec {
    /// Mean chest distance, m.
    pub target_range: f64,
    /// Hz.
    pub respiration_rate: f64,
    /// Mean heart rate, bpm.
    pub heart_rate: f64,
    /// Slow sinusoidal heart-rate modulation depth, bpm.
    pub heart_rate_variation: f64,
    /// m.
    pub respiration_amplitude: f64,
    /// m.
    pub cardiac_amplitude: f64,
    /// Peak excursion of the slow postural drift, m.
    pub drift_amplitude: f64,
    pub respiration_waveform: RespirationWaveform,
    /// Standard deviation of additive noise per sample, linear amplitude units.
    pub noise_std: f64,
    pub rng_seed: u64,
    /// s.
    pub duration: f64,
    /// Per-antenna scale factors; empty means unit gain everywhere.
    pub antenna_gains: Vec<f64>,
    /// Target return amplitude before antenna gain.
    pub reflectivity: f64,
    /// Amplitude of each of the three static clutter returns.
    pub clutter_amplitude: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        let respiration_amplitude = 4.0e-3;
        SceneSpec {
            target_range: 1.0,
            respiration_rate: 0.25,
            heart_rate: 72.0,
            heart_rate_variation: 0.0,
            respiration_amplitude,
            cardiac_amplitude: respiration_amplitude / 20.0,
            drift_amplitude: 0.0,
            respiration_waveform: RespirationWaveform::default(),
            noise_std: 0.0,
            rng_seed: 0,
            duration: 60.0,
            antenna_gains: Vec::new(),
            reflectivity: 1.0,
            clutter_amplitude: 0.0,
        }
    }
}

/// Period of the heart-rate modulation, s.
const HR_MODULATION_PERIOD: f64 = 40.0;
/// Spacing of the drift random-walk knots, s. Keeps drift content below 0.05 Hz.
const DRIFT_KNOT_SPACING: f64 = 20.0;

impl SceneSpec {
    /// Sets the respiration amplitude and the cardiac amplitude to 1/20 of it.
    pub fn with_respiration_amplitude(mut self, amplitude: f64) -> Self {
        self.respiration_amplitude = amplitude;
        self.cardiac_amplitude = amplitude / 20.0;
        self
    }

    pub fn gain(&self, antenna: usize) -> f64 {
        self.antenna_gains.get(antenna).copied().unwrap_or(1.0)
    }

    /// Checks the scene against the radar it will be rendered for.
    pub fn validate(&self, spec: &RadarSpec) -> Result<()> {
        if !(30.0..=220.0).contains(&self.heart_rate) {
            return Err(Error::param("heart_rate", "must lie in [30, 220] bpm"));
        }
        if !(self.heart_rate_variation >= 0.0 && self.heart_rate_variation < self.heart_rate) {
            return Err(Error::param(
                "heart_rate_variation",
                "must be non-negative and below the mean heart rate",
            ));
        }
        if !(self.respiration_rate > 0.0) {
            return Err(Error::param("respiration_rate", "must be positive"));
        }
        for (name, v) in [
            ("respiration_amplitude", self.respiration_amplitude),
            ("cardiac_amplitude", self.cardiac_amplitude),
            ("drift_amplitude", self.drift_amplitude),
            ("noise_std", self.noise_std),
            ("reflectivity", self.reflectivity),
            ("clutter_amplitude", self.clutter_amplitude),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and non-negative"));
            }
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::param("duration", "must be positive"));
        }
        let excursion = self.respiration_amplitude + self.cardiac_amplitude + self.drift_amplitude;
        if !(self.target_range - excursion > 0.0) {
            return Err(Error::param("target_range", "target must stay in front of the radar"));
        }
        if self.target_range + excursion >= spec.max_range() {
            return Err(Error::param(
                "target_range",
                alloc::format!("beyond unambiguous range {:.3} m", spec.max_range()),
            ));
        }
        if self.antenna_gains.iter().any(|g| !g.is_finite()) {
            return Err(Error::param("antenna_gains", "must be finite"));
        }
        Ok(())
    }

    /// Instantaneous heart rate at `t` seconds, bpm.
    pub fn heart_rate_at(&self, t: f64) -> f64 {
        self.heart_rate + self.heart_rate_variation * self.hr_modulation_phase(t).sin()
    }

    fn hr_modulation_offset(&self) -> f64 {
        // Deterministic per seed without touching the random streams.
        (self.rng_seed % 1000) as f64 / 1000.0 * 2.0 * PI
    }

    fn hr_modulation_phase(&self, t: f64) -> f64 {
        2.0 * PI * t / HR_MODULATION_PERIOD + self.hr_modulation_offset()
    }

    /// Integrated cardiac phase, rad.
    fn cardiac_phase(&self, t: f64) -> f64 {
        let f0 = self.heart_rate / 60.0;
        let mut phase = 2.0 * PI * f0 * t;
        if self.heart_rate_variation > 0.0 {
            let fm = 1.0 / HR_MODULATION_PERIOD;
            let depth = self.heart_rate_variation / 60.0;
            let psi = self.hr_modulation_offset();
            phase -= depth / fm * ((self.hr_modulation_phase(t)).cos() - psi.cos());
        }
        phase
    }
}

/// The three additive parts of the chest displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementParts {
    pub respiration: Vec<f64>,
    pub cardiac: Vec<f64>,
    pub drift: Vec<f64>,
}

impl DisplacementParts {
    pub fn total(&self) -> Vec<f64> {
        self.respiration
            .iter()
            .zip(&self.cardiac)
            .zip(&self.drift)
            .map(|((r, c), d)| r + c + d)
            .collect()
    }
}

fn check_series_args(scene: &SceneSpec, rate: f64, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "at least one sample required"));
    }
    if !(rate > 0.0) {
        return Err(Error::param("rate", "must be positive"));
    }
    if !(scene.respiration_rate > 0.0) {
        return Err(Error::param("respiration_rate", "must be positive"));
    }
    if !(scene.heart_rate > 0.0) {
        return Err(Error::param("heart_rate", "must be positive"));
    }
    for (name, v) in [
        ("respiration_amplitude", scene.respiration_amplitude),
        ("cardiac_amplitude", scene.cardiac_amplitude),
        ("drift_amplitude", scene.drift_amplitude),
    ] {
        if !(v >= 0.0) {
            return Err(Error::param(name, "must be non-negative"));
        }
    }
    Ok(())
}

/// Respiration, cardiac and drift displacement sampled at `rate` Hz.
pub fn displacement_parts(scene: &SceneSpec, rate: f64, n: usize) -> Result<DisplacementParts> {
    check_series_args(scene, rate, n)?;
    let times = (0..n).map(|i| i as f64 / rate);
    let respiration = times
        .clone()
        .map(|t| {
            scene.respiration_amplitude
                * scene.respiration_waveform.eval(2.0 * PI * scene.respiration_rate * t)
        })
        .collect();
    let cardiac = times
        .clone()
        .map(|t| scene.cardiac_amplitude * scene.cardiac_phase(t).sin())
        .collect();
    let drift = drift_series(scene, rate, n);
    Ok(DisplacementParts {
        respiration,
        cardiac,
        drift,
    })
}

/// Total chest displacement, metres.
pub fn displacement_series(scene: &SceneSpec, rate: f64, n: usize) -> Result<Vec<f64>> {
    Ok(displacement_parts(scene, rate, n)?.total())
}

/// Per-sample heart rate, bpm.
pub fn heart_rate_series(scene: &SceneSpec, rate: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| scene.heart_rate_at(i as f64 / rate)).collect()
}

/// Random walk on coarse knots, cosine-interpolated, scaled to peak `drift_amplitude`.
fn drift_series(scene: &SceneSpec, rate: f64, n: usize) -> Vec<f64> {
    if scene.drift_amplitude == 0.0 {
        return alloc::vec![0.0; n];
    }
    let span = n as f64 / rate;
    let knots = (span / DRIFT_KNOT_SPACING).ceil() as usize + 2;
    let mut rng = rng::seeded(scene.rng_seed, stream::DRIFT);
    let mut walk = Vec::with_capacity(knots);
    let mut acc = 0.0;
    walk.push(0.0);
    for _ in 1..knots {
        let step: f64 = rng.sample(StandardNormal);
        acc += step;
        walk.push(acc);
    }
    let peak = walk.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 0.0 { scene.drift_amplitude / peak } else { 0.0 };
    (0..n)
        .map(|i| {
            let x = i as f64 / rate / DRIFT_KNOT_SPACING;
            let k = x.floor() as usize;
            let frac = x - k as f64;
            let w = 0.5 * (1.0 - (PI * frac).cos());
            scale * (walk[k] * (1.0 - w) + walk[k + 1] * w)
        })
        .collect()
}
