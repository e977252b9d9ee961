use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::Complex;

const TAU: f64 = 2.0 * PI;

/// Re-wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut w = x - TAU * (x / TAU).round();
    if w <= -PI {
        w += TAU;
    } else if w > PI {
        w -= TAU;
    }
    w
}

/// Removes 2π jumps from a wrapped angle series.
///
/// Each output sample is the input plus an integer multiple of 2π, chosen so
/// that successive differences stay within π.
pub fn unwrap_angles(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut turns = 0.0f64;
    let mut prev = match wrapped.first() {
        Some(&w) => w,
        None => return out,
    };
    out.push(prev);
    for &w in &wrapped[1..] {
        turns -= ((w - prev) / TAU).round();
        out.push(w + TAU * turns);
        prev = w;
    }
    out
}

/// Unwrapped argument of a complex series. Zero samples carry the previous phase.
pub fn unwrap_phase(series: &[Complex]) -> Vec<f64> {
    let mut last = 0.0;
    let wrapped: Vec<f64> = series
        .iter()
        .map(|z| {
            if z.re != 0.0 || z.im != 0.0 {
                last = z.arg();
            }
            last
        })
        .collect();
    unwrap_angles(&wrapped)
}
