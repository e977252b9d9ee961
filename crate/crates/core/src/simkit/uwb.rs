use core::f64::consts::{FRAC_1_SQRT_2, PI};
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::radar::{RadarKind, RadarSpec};
use super::scene::{displacement_series, heart_rate_series, SceneSpec};
use super::{antenna_phases, clutter_returns};
use crate::dsp::{Cube3, RangeProfileCube};
use crate::rng::{self, stream};
use crate::{Complex, Error, Result};

/// Half-width of the sinc-shaped target return, bins.
const SPREAD: isize = 2;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Renders a raw IR-UWB range-profile stream at the radar's native rate.
///
/// The target contributes `g · sinc(b − x) · exp(i(4π r / λ + ψ))` to bins
/// `b` within ±2 of `x = r / Δr`. Noise is circular complex Gaussian with
/// total standard deviation `noise_std`.
pub fn simulate_uwb(scene: &SceneSpec, spec: &RadarSpec) -> Result<RangeProfileCube> {
    if spec.kind != RadarKind::IrUwb {
        return Err(Error::param("spec.kind", "simulate_uwb needs an IR-UWB radar"));
    }
    scene.validate(spec)?;
    let rate = spec.raw_rate;
    let slow = (scene.duration * rate).round() as usize;
    let (bins, antennas) = (spec.range_bins, spec.num_antennas);
    let dr = spec.range_resolution();
    let lambda = spec.wavelength();

    let displacement = displacement_series(scene, rate, slow)?;
    let psi = antenna_phases(scene, antennas);
    let clutter = clutter_returns(scene, bins, antennas);

    let mut cube = Cube3::<Complex>::zeros(bins, antennas, slow);
    for c in &clutter {
        for a in 0..antennas {
            let v = Complex::from_polar(c.amplitude, c.phases[a]);
            cube.series_mut(c.bin, a).iter_mut().for_each(|s| *s = v);
        }
    }

    for (t, &d) in displacement.iter().enumerate() {
        let r = scene.target_range + d;
        let x = r / dr;
        let centre = x.round() as isize;
        let phase = 4.0 * PI * r / lambda;
        for a in 0..antennas {
            let carrier = Complex::from_polar(scene.reflectivity * scene.gain(a), phase + psi[a]);
            for b in (centre - SPREAD)..=(centre + SPREAD) {
                if b < 0 || b as usize >= bins {
                    continue;
                }
                let b = b as usize;
                let i = cube.index(b, a, t);
                cube.as_mut_slice()[i] += carrier * sinc(b as f64 - x);
            }
        }
    }

    if scene.noise_std > 0.0 {
        let mut rng = rng::seeded(scene.rng_seed, stream::NOISE);
        let sigma = scene.noise_std * FRAC_1_SQRT_2;
        for v in cube.as_mut_slice() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex::new(re, im) * sigma;
        }
    }

    Ok(RangeProfileCube {
        values: cube,
        slow_time_rate: rate,
        spec: *spec,
        truth_hr: heart_rate_series(scene, rate, slow),
        start_time: 0.0,
    })
}
