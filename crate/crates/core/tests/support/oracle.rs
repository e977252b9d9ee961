//! Reference implementations written independently of the crate.

use std::f64::consts::PI;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radar_vitals_core::presence::CfarConfig;
use radar_vitals_core::Complex;

/// Principal value via `atan2`, in `(-π, π]`.
pub fn wrap(x: f64) -> f64 {
    let w = x.sin().atan2(x.cos());
    // atan2 returns -π for the branch cut; the crate maps it to +π.
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Direct O(N²) discrete Fourier transform.
pub fn dft(x: &[Complex]) -> Vec<Complex> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * Complex::from_polar(1.0, -2.0 * PI * ((k * t) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Tabulated central weights of the quadratic/cubic Savitzky–Golay smoother
/// on `2m + 1` points: `3 (3m² + 3m − 1 − 5k²) / ((2m + 3)(2m + 1)(2m − 1))`.
pub fn savgol_cubic_weights(m: usize) -> Vec<f64> {
    let m = m as f64;
    let denom = (2.0 * m + 3.0) * (2.0 * m + 1.0) * (2.0 * m - 1.0);
    (-(m as i64)..=m as i64)
        .map(|k| {
            let k = k as f64;
            3.0 * (3.0 * m * m + 3.0 * m - 1.0 - 5.0 * k * k) / denom
        })
        .collect()
}

/// `|1 − Σ c_k cos(ω k)|`: gain of removing the smoothed trend.
pub fn savgol_residual_gain(weights: &[f64], freq: f64, rate: f64) -> f64 {
    let m = (weights.len() / 2) as f64;
    let w = 2.0 * PI * freq / rate;
    let h: f64 = weights
        .iter()
        .enumerate()
        .map(|(i, c)| c * (w * (i as f64 - m)).cos())
        .sum();
    (1.0 - h).abs()
}

/// Amplitude of the least-squares fit `a cos ωt + b sin ωt + c` to `y`,
/// whose first sample sits at index `offset`.
pub fn fitted_amplitude(y: &[f64], freq: f64, rate: f64, offset: usize) -> f64 {
    let basis = |i: usize| {
        let w = 2.0 * PI * freq * (i + offset) as f64 / rate;
        [w.cos(), w.sin(), 1.0]
    };
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (i, &v) in y.iter().enumerate() {
        let phi = basis(i);
        for r in 0..3 {
            b[r] += phi[r] * v;
            for c in 0..3 {
                a[r][c] += phi[r] * phi[c];
            }
        }
    }
    let x = solve3(a, b);
    x[0].hypot(x[1])
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cramer's rule.
fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let d = det3(a);
    std::array::from_fn(|k| {
        let mut m = a;
        for r in 0..3 {
            m[r][k] = b[r];
        }
        det3(m) / d
    })
}

/// Cell-averaging test on one power profile, written from the definition:
/// training cells lie `guard + 1 ..= guard + training` away on either side.
pub fn cfar_cells(powers: &[f64], cfg: &CfarConfig) -> Vec<bool> {
    let n = powers.len() as i64;
    (0..n)
        .map(|b| {
            let mut cells = Vec::new();
            for d in cfg.guard_cells as i64 + 1..=(cfg.guard_cells + cfg.training_cells) as i64 {
                for j in [b - d, b + d] {
                    if (0..n).contains(&j) {
                        cells.push(powers[j as usize]);
                    }
                }
            }
            let noise = if cells.is_empty() {
                0.0
            } else {
                cells.iter().sum::<f64>() / cells.len() as f64
            };
            let p = powers[b as usize];
            p > cfg.threshold * noise && p > 0.0
        })
        .collect()
}

/// Monte-Carlo false-alarm rates (per cell, per profile) on exponential
/// powers, drawn by inversion rather than from Gaussian samples.
pub fn cfar_false_alarms(trials: usize, bins: usize, cfg: &CfarConfig, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut cells, mut profiles) = (0usize, 0usize);
    for _ in 0..trials {
        let powers: Vec<f64> = (0..bins)
            .map(|_| -2.0 * (1.0 - rng.random::<f64>()).ln())
            .collect();
        let hits = cfar_cells(&powers, cfg).iter().filter(|&&h| h).count();
        cells += hits;
        profiles += usize::from(hits > 0);
    }
    (cells as f64 / (trials * bins) as f64, profiles as f64 / trials as f64)
}

/// `(1 + α/N)^(−N)` for `N` exponential training cells.
pub fn cfar_interior_closed_form(cfg: &CfarConfig) -> f64 {
    let n = 2.0 * cfg.training_cells as f64;
    (1.0 + cfg.threshold / n).powf(-n)
}

/// `[bias, sd, low, high]` from two explicit passes over the differences.
pub fn bland_altman(pred: &[f64], truth: &[f64]) -> [f64; 4] {
    let mut d = Vec::new();
    for i in 0..pred.len() {
        d.push(pred[i] - truth[i]);
    }
    let mut sum = 0.0;
    for v in &d {
        sum += v;
    }
    let bias = sum / d.len() as f64;
    let mut ss = 0.0;
    for v in &d {
        ss += (v - bias).powi(2);
    }
    let sd = (ss / (d.len() - 1) as f64).sqrt();
    [bias, sd, bias - 1.96 * sd, bias + 1.96 * sd]
}

/// Percentile bootstrap of the mean with the same replicate streams as the
/// crate (`seed + r` on stream 20) and numpy's linear interpolation.
pub fn bootstrap_ci(errors: &[f64], replicates: usize, level: f64, seed: u64) -> [f64; 2] {
    let n = errors.len();
    let mut means = Vec::new();
    for r in 0..replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + r as u64);
        rng.set_stream(20);
        let mut total = 0.0;
        for _ in 0..n {
            total += errors[rng.random_range(0..n)];
        }
        means.push(total / n as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| {
        let h = (means.len() - 1) as f64 * q;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        means[lo] + (h - lo as f64) * (means[hi] - means[lo])
    };
    let tail = (1.0 - level) / 2.0;
    [quantile(tail), quantile(1.0 - tail)]
}
