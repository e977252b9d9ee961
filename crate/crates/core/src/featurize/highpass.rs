//! Zero-phase Butterworth high-pass.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Normalised biquad, transposed direct form II.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn highpass(cutoff: f64, rate: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff / rate;
        let (sin, cos) = (w0.sin(), w0.cos());
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Biquad {
            b: [(1.0 + cos) / 2.0 / a0, -(1.0 + cos) / a0, (1.0 + cos) / 2.0 / a0],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State for a constant input of 1 held forever.
    fn steady_state(&self) -> [f64; 2] {
        let y = self.dc_gain();
        let z2 = self.b[2] - self.a[1] * y;
        let z1 = self.b[1] - self.a[0] * y + z2;
        [z1, z2]
    }

    fn run(&self, data: &mut [f64], mut z: [f64; 2]) {
        for x in data.iter_mut() {
            let input = *x;
            let y = self.b[0] * input + z[0];
            z[0] = self.b[1] * input - self.a[0] * y + z[1];
            z[1] = self.b[2] * input - self.a[1] * y;
            *x = y;
        }
    }
}

/// Fourth-order Butterworth high-pass as two biquads.
#[derive(Debug, Clone)]
pub struct Highpass {
    sections: [Biquad; 2],
    pad: usize,
}

impl Highpass {
    pub fn new(cutoff: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::param("rate", "must be positive"));
        }
        if !(cutoff > 0.0 && cutoff < rate / 2.0) {
            return Err(Error::param("highpass_cutoff", "must lie strictly between 0 and Nyquist"));
        }
        // Butterworth pole pairs at angles π/8 and 3π/8 from the real axis.
        let q = |k: f64| 1.0 / (2.0 * (PI * (2.0 * k + 1.0) / 8.0).cos());
        Ok(Highpass {
            sections: [
                Biquad::highpass(cutoff, rate, q(0.0)),
                Biquad::highpass(cutoff, rate, q(1.0)),
            ],
            pad: (3.0 * rate / cutoff).ceil() as usize,
        })
    }

    fn pass(&self, data: &mut [f64]) {
        let mut level = data[0];
        for s in &self.sections {
            let zi = s.steady_state();
            s.run(data, [zi[0] * level, zi[1] * level]);
            level *= s.dc_gain();
        }
    }

    /// Forward-backward filtering with odd-reflection padding at both ends.
    pub fn filtfilt(&self, series: &[f64]) -> Vec<f64> {
        let n = series.len();
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            return alloc::vec![0.0];
        }
        let pad = self.pad.min(n - 1);
        let (first, last) = (series[0], series[n - 1]);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - series[i]));
        ext.extend_from_slice(series);
        ext.extend((1..=pad).map(|i| 2.0 * last - series[n - 1 - i]));
        self.pass(&mut ext);
        ext.reverse();
        self.pass(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }

    /// Magnitude response of one forward pass at `freq`.
    pub fn magnitude(&self, freq: f64, rate: f64) -> f64 {
        let w = 2.0 * PI * freq / rate;
        let z1 = crate::Complex::from_polar(1.0, -w);
        let z2 = z1 * z1;
        self.sections
            .iter()
            .map(|s| {
                let num = z2 * s.b[2] + z1 * s.b[1] + s.b[0];
                let den = z2 * s.a[1] + z1 * s.a[0] + 1.0;
                (num / den).norm()
            })
            .product()
    }
}

/// Zero-phase 4th-order Butterworth high-pass at `cutoff` Hz.
pub fn highpass(series: &[f64], cutoff: f64, rate: f64) -> Result<Vec<f64>> {
    Ok(Highpass::new(cutoff, rate)?.filtfilt(series))
}
