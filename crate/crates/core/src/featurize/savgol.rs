//! Savitzky–Golay respiration-trend removal.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Central smoothing weights of a least-squares polynomial fit of degree
/// `order` over `window` (odd) samples.
pub fn savgol_coefficients(window: usize, order: usize) -> Result<Vec<f64>> {
    if window % 2 == 0 || window <= order + 1 {
        return Err(Error::param(
            "sg_window",
            alloc::format!("window {window} must be odd and larger than order + 1 = {}", order + 1),
        ));
    }
    let half = (window / 2) as f64;
    let p = order + 1;
    // Normal equations on positions scaled to [-1, 1].
    let xs: Vec<f64> = (0..window).map(|i| (i as f64 - half) / half).collect();
    let mut gram = vec![0.0; p * p];
    for &x in &xs {
        for r in 0..p {
            for c in 0..p {
                gram[r * p + c] += x.powi((r + c) as i32);
            }
        }
    }
    // The smoothed value is the fitted constant term: solve gram · w = e0.
    let mut rhs = vec![0.0; p];
    rhs[0] = 1.0;
    let w = solve(&mut gram, &mut rhs, p)?;
    Ok(xs
        .iter()
        .map(|&x| (0..p).map(|k| w[k] * x.powi(k as i32)).sum())
        .collect())
}

/// Gaussian elimination with partial pivoting on a dense `n × n` system.
fn solve(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>> {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap_or(col);
        if a[pivot * n + col].abs() < 1e-300 {
            return Err(Error::param("sg_window", "singular least-squares system"));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * n + row];
    }
    Ok(x)
}

/// Reflects `i` (possibly out of range) into `0..n` without repeating the edge sample.
fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut j = i.rem_euclid(period);
    if j >= n {
        j = period - j;
    }
    j as usize
}

/// Savitzky–Golay trend with mirror padding of half a window at each edge.
pub fn savgol_smooth(series: &[f64], window: usize, order: usize) -> Result<Vec<f64>> {
    if series.len() < window {
        return Err(Error::TooShort(alloc::format!(
            "series of {} samples is shorter than the {window}-sample window",
            series.len()
        )));
    }
    let coeffs = savgol_coefficients(window, order)?;
    let half = (window / 2) as isize;
    let n = series.len();
    Ok((0..n as isize)
        .map(|t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * series[mirror(t + k as isize - half, n)])
                .sum()
        })
        .collect())
}

/// Adaptive respiration filter: the series minus its Savitzky–Golay trend.
pub fn adaptive_respiration_filter(series: &[f64], order: usize, window: usize) -> Result<Vec<f64>> {
    let trend = savgol_smooth(series, window, order)?;
    Ok(series.iter().zip(&trend).map(|(x, t)| x - t).collect())
}

/// Gain of the trend-removal filter `1 − H_sg(f)` at `freq` Hz.
pub fn residual_response(coeffs: &[f64], freq: f64, rate: f64) -> f64 {
    let half = (coeffs.len() / 2) as isize;
    let w = 2.0 * PI * freq / rate;
    // Symmetric kernel: H is real.
    let h: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| c * (w * (k as isize - half) as f64).cos())
        .sum();
    (1.0 - h).abs()
}
