//! PCA beamforming across receive antennas.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dsp::{Cube3, RangeProfileCube};
use crate::{Complex, Error, Result};

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues (descending) and the matching column eigenvectors.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    (values, vectors)
}

/// Leading eigenvector of the antenna covariance of `signals` (one slice per
/// antenna), or `None` when the covariance has no unique leading direction.
pub fn principal_direction(signals: &[&[Complex]]) -> Option<Vec<Complex>> {
    let m = signals.len();
    let t = signals.first()?.len();
    if t == 0 {
        return None;
    }
    // Hermitian covariance C[i][j] = mean(x_i · conj(x_j)).
    let mut cov = vec![Complex::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            let s: Complex = signals[i]
                .iter()
                .zip(signals[j])
                .map(|(a, b)| a * b.conj())
                .sum();
            cov[i * m + j] = s / t as f64;
        }
    }
    // Real embedding [[Re, -Im], [Im, Re]]: every eigenvalue appears twice.
    let n = 2 * m;
    let mut real = vec![0.0; n * n];
    for i in 0..m {
        for j in 0..m {
            let c = cov[i * m + j];
            real[i * n + j] = c.re;
            real[i * n + j + m] = -c.im;
            real[(i + m) * n + j] = c.im;
            real[(i + m) * n + j + m] = c.re;
        }
    }
    let (values, vectors) = symmetric_eigen(&real, n);
    let top = values[0];
    if !(top > 0.0) {
        return None;
    }
    if m > 1 && values[2] >= top * (1.0 - 1e-9) {
        return None;
    }
    let w: Vec<Complex> = (0..m)
        .map(|i| Complex::new(vectors[i * n], vectors[(i + m) * n]))
        .collect();
    let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    Some(w.into_iter().map(|c| c / norm).collect())
}

/// Projects each range bin's antenna signals onto their first principal
/// component, producing a single-antenna cube.
///
/// The projection's phase is rotated so that its inner product with antenna 0
/// is real and positive. Bins without a unique leading direction fall back to
/// antenna 0.
pub fn pca_beamform(cube: &RangeProfileCube) -> Result<RangeProfileCube> {
    let antennas = cube.antennas();
    if antennas < 2 {
        return Err(Error::Shape("PCA beamforming needs at least two antennas".into()));
    }
    let (bins, time) = (cube.bins(), cube.time());
    let mut out = Cube3::<Complex>::zeros(bins, 1, time);
    for b in 0..bins {
        let signals: Vec<&[Complex]> = (0..antennas).map(|a| cube.values.series(b, a)).collect();
        let target = out.series_mut(b, 0);
        match principal_direction(&signals) {
            None => target.copy_from_slice(signals[0]),
            Some(w) => {
                for (t, y) in target.iter_mut().enumerate() {
                    *y = (0..antennas).map(|a| w[a].conj() * signals[a][t]).sum();
                }
                let corr: Complex = signals[0].iter().zip(target.iter()).map(|(x, y)| x.conj() * y).sum();
                if corr.norm() > 0.0 {
                    let rot = corr.conj() / corr.norm();
                    target.iter_mut().for_each(|y| *y *= rot);
                }
            }
        }
    }
    Ok(RangeProfileCube {
        values: out,
        slow_time_rate: cube.slow_time_rate,
        spec: cube.spec,
        truth_hr: cube.truth_hr.clone(),
        start_time: cube.start_time,
    })
}
