use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::radar::{RadarKind, RadarSpec};
use super::scene::{displacement_series, heart_rate_series, SceneSpec};
use super::{antenna_phases, clutter_returns};
use crate::dsp::{ChirpCube, Cube3};
use crate::rng::{self, stream};
use crate::{Complex, Error, Result};

/// Renders burst-averaged FMCW chirps, `[fast time × antennas × slow time]`.
///
/// Each chirp is `g · cos(2π u (n − c) + φ)` with `u = (r0 + d) / (Δr · N)`
/// cycles per sample and `φ = 4π (r0 + d) / λ + ψ_antenna`. Time inside the
/// chirp is referenced to its centre `c = (N − 1)/2`, which makes the range
/// bin phase equal to `φ` up to a per-bin constant. `noise_std` is the noise
/// level after burst averaging.
pub fn simulate_fmcw(scene: &SceneSpec, spec: &RadarSpec) -> Result<ChirpCube> {
    if spec.kind != RadarKind::Fmcw {
        return Err(Error::param("spec.kind", "simulate_fmcw needs an FMCW radar"));
    }
    scene.validate(spec)?;
    let n_fast = spec.fast_time_samples;
    if n_fast < 2 {
        return Err(Error::param("fast_time_samples", "need at least two samples per chirp"));
    }
    let rate = spec.slow_time_rate;
    let slow = (scene.duration * rate).round() as usize;
    let antennas = spec.num_antennas;
    let dr = spec.range_resolution();
    let lambda = spec.wavelength();
    let centre = (n_fast as f64 - 1.0) / 2.0;

    let displacement = displacement_series(scene, rate, slow)?;
    let psi = antenna_phases(scene, antennas);

    // Clutter chirps are identical for every burst.
    let clutter = clutter_returns(scene, spec.range_bins, antennas);
    let clutter_chirps: Vec<Vec<f64>> = (0..antennas)
        .map(|a| {
            (0..n_fast)
                .map(|n| {
                    clutter
                        .iter()
                        .map(|c| {
                            c.amplitude
                                * (2.0 * PI * c.bin as f64 * (n as f64 - centre) / n_fast as f64
                                    + c.phases[a])
                                    .cos()
                        })
                        .sum()
                })
                .collect()
        })
        .collect();

    let mut noise_rng = rng::seeded(scene.rng_seed, stream::NOISE);
    let mut cube = Cube3::<f64>::zeros(n_fast, antennas, slow);
    let mut chirp = alloc::vec![0.0; n_fast];
    for (t, &d) in displacement.iter().enumerate() {
        let r = scene.target_range + d;
        let cycles = r / dr / n_fast as f64;
        let phase = 4.0 * PI * r / lambda;
        let step = Complex::from_polar(1.0, 2.0 * PI * cycles);
        for a in 0..antennas {
            let amp = scene.reflectivity * scene.gain(a);
            let mut z = Complex::from_polar(amp, phase + psi[a] - 2.0 * PI * cycles * centre);
            for (n, s) in chirp.iter_mut().enumerate() {
                *s = z.re + clutter_chirps[a][n];
                z *= step;
            }
            if scene.noise_std > 0.0 {
                for s in chirp.iter_mut() {
                    let e: f64 = noise_rng.sample(StandardNormal);
                    *s += scene.noise_std * e;
                }
            }
            for (n, &s) in chirp.iter().enumerate() {
                cube.set(n, a, t, s);
            }
        }
    }

    Ok(ChirpCube {
        values: cube,
        spec: *spec,
        truth_hr: heart_rate_series(scene, rate, slow),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{clutter_filter, range_fft, FastTimeWindow};
    use crate::simkit::RespirationWaveform;

    fn still_scene() -> SceneSpec {
        SceneSpec {
            respiration_amplitude: 0.0,
            cardiac_amplitude: 0.0,
            duration: 1.0,
            ..SceneSpec::default()
        }
    }

    #[test]
    fn shape_and_truth() {
        let cube = simulate_fmcw(&still_scene(), &RadarSpec::fmcw()).unwrap();
        assert_eq!(cube.values.dims(), [256, 3, 30]);
        assert_eq!(cube.truth_hr.len(), 30);
        assert!(cube.values.as_slice().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn target_at_one_metre_peaks_at_bin_37() {
        let cube = simulate_fmcw(&still_scene(), &RadarSpec::fmcw()).unwrap();
        let rp = range_fft(&cube, FastTimeWindow::Rectangular).unwrap();
        let mags: Vec<f64> = (0..129).map(|k| rp.values.get(k, 0, 0).norm()).collect();
        assert_eq!(crate::fft::argmax_from(&mags, 0), Some(37));
    }

    #[test]
    fn static_scene_without_target_motion_is_removed_by_clutter_filter() {
        let scene = SceneSpec {
            clutter_amplitude: 3.0,
            ..still_scene()
        };
        let cube = simulate_fmcw(&scene, &RadarSpec::fmcw()).unwrap();
        let filtered = clutter_filter(&cube.values);
        assert!(filtered.as_slice().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn deterministic_under_seed() {
        let scene = SceneSpec {
            noise_std: 0.1,
            clutter_amplitude: 1.0,
            rng_seed: 77,
            duration: 2.0,
            respiration_waveform: RespirationWaveform::RaisedCosine,
            ..SceneSpec::default()
        };
        let a = simulate_fmcw(&scene, &RadarSpec::fmcw()).unwrap();
        let b = simulate_fmcw(&scene, &RadarSpec::fmcw()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_wrong_radar_and_far_target() {
        assert!(simulate_fmcw(&still_scene(), &RadarSpec::uwb()).is_err());
        let far = SceneSpec {
            target_range: 3.6,
            ..still_scene()
        };
        assert!(simulate_fmcw(&far, &RadarSpec::fmcw()).is_err());
    }
}
