use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::cube::{ChirpCube, Cube3, RangeProfileCube};
use crate::fft::FftPlan;
use crate::{Complex, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FastTimeWindow {
    /// No taper; bin `k` maps exactly to range `k · Δr`.
    #[default]
    Rectangular,
    Hann,
}

impl FastTimeWindow {
    fn coefficients(self, n: usize) -> Option<Vec<f64>> {
        match self {
            FastTimeWindow::Rectangular => None,
            FastTimeWindow::Hann => Some(
                (0..n)
                    .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                    .collect(),
            ),
        }
    }
}

/// One-sided FFT along fast time: `[N × antennas × T]` real chirps to
/// `[N/2 + 1 × antennas × T]` complex range profiles.
pub fn range_fft(chirps: &ChirpCube, window: FastTimeWindow) -> Result<RangeProfileCube> {
    let cube = &chirps.values;
    let n = cube.rows();
    if n == 0 || n % 2 != 0 {
        return Err(Error::Shape(alloc::format!(
            "fast-time length must be even and positive, got {n}"
        )));
    }
    if cube.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("range_fft input".into()));
    }
    let bins = n / 2 + 1;
    let plan = FftPlan::new(n);
    let taper = window.coefficients(n);
    let (antennas, time) = (cube.antennas(), cube.time());
    let mut out = Cube3::<Complex>::zeros(bins, antennas, time);
    let mut buf = alloc::vec![Complex::new(0.0, 0.0); n];
    let sample = |f: usize, a: usize, t: usize| cube.get(f, a, t) * taper.as_ref().map_or(1.0, |w| w[f]);
    for a in 0..antennas {
        // Two real chirps share one complex transform: z = x + i·y gives
        // X[k] = (Z[k] + conj Z[N-k]) / 2 and Y[k] = (Z[k] - conj Z[N-k]) / 2i.
        for t in (0..time).step_by(2) {
            let pair = t + 1 < time;
            for (f, b) in buf.iter_mut().enumerate() {
                let y = if pair { sample(f, a, t + 1) } else { 0.0 };
                *b = Complex::new(sample(f, a, t), y);
            }
            plan.process(&mut buf);
            for k in 0..bins {
                let z = buf[k];
                let zc = buf[(n - k) % n].conj();
                out.set(k, a, t, (z + zc) * 0.5);
                if pair {
                    out.set(k, a, t + 1, (z - zc) * Complex::new(0.0, -0.5));
                }
            }
        }
    }
    Ok(RangeProfileCube {
        values: out,
        slow_time_rate: chirps.spec.slow_time_rate,
        spec: chirps.spec,
        truth_hr: chirps.truth_hr.clone(),
        start_time: 0.0,
    })
}
