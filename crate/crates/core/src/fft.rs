//! Forward FFT for arbitrary lengths.
//!
//! Power-of-two sizes use an iterative radix-2 kernel; other sizes go through
//! Bluestein's chirp-z reformulation on a padded power-of-two transform.
//! Plans cache twiddles so the per-chirp range FFT does no trig.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::Complex;

#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    kind: PlanKind,
}

#[derive(Debug, Clone)]
enum PlanKind {
    Radix2(Radix2),
    Bluestein {
        inner: Radix2,
        chirp: Vec<Complex>,
        kernel_spectrum: Vec<Complex>,
    },
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    twiddles: Vec<Complex>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| Complex::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Radix2 { n, twiddles, bitrev }
    }

    fn process(&self, data: &mut [Complex]) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "FFT length must be positive");
        if n.is_power_of_two() {
            return FftPlan {
                n,
                kind: PlanKind::Radix2(Radix2::new(n)),
            };
        }
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // chirp[k] = exp(-i pi k^2 / n); k^2 reduced mod 2n keeps the angle small.
        let chirp: Vec<Complex> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128 % (2 * n as u128)) as f64;
                Complex::from_polar(1.0, -PI * k2 / n as f64)
            })
            .collect();
        let mut kernel = vec![Complex::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.process(&mut kernel);
        FftPlan {
            n,
            kind: PlanKind::Bluestein {
                inner,
                chirp,
                kernel_spectrum: kernel,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform, `X[k] = sum_n x[n] exp(-2 pi i k n / N)`.
    pub fn process(&self, data: &mut [Complex]) {
        assert_eq!(data.len(), self.n, "FFT buffer length mismatch");
        match &self.kind {
            PlanKind::Radix2(r) => r.process(data),
            PlanKind::Bluestein {
                inner,
                chirp,
                kernel_spectrum,
            } => {
                let m = inner.n;
                let mut buf = vec![Complex::new(0.0, 0.0); m];
                for k in 0..self.n {
                    buf[k] = data[k] * chirp[k];
                }
                inner.process(&mut buf);
                for (b, h) in buf.iter_mut().zip(kernel_spectrum) {
                    *b = (*b * h).conj();
                }
                // Inverse via conjugated forward transform.
                inner.process(&mut buf);
                let scale = 1.0 / m as f64;
                for k in 0..self.n {
                    data[k] = buf[k].conj() * scale * chirp[k];
                }
            }
        }
    }

    /// One-sided spectrum of a real series: `N/2 + 1` bins.
    pub fn real_forward(&self, input: &[f64]) -> Vec<Complex> {
        let mut buf: Vec<Complex> = input.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.process(&mut buf);
        buf.truncate(self.n / 2 + 1);
        buf
    }
}

/// Magnitude spectrum of a real series (one-sided).
pub fn magnitude_spectrum(series: &[f64]) -> Vec<f64> {
    FftPlan::new(series.len())
        .real_forward(series)
        .into_iter()
        .map(|c| c.norm())
        .collect()
}

/// Index of the largest entry, ties toward the lower index. Skips `skip` leading bins.
pub fn argmax_from(values: &[f64], skip: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate().skip(skip) {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex]) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex::new(0.0, 0.0), |acc, (j, &v)| {
                    acc + v * Complex::from_polar(1.0, -2.0 * PI * (k * j % n) as f64 / n as f64)
                })
            })
            .collect()
    }

    fn check(n: usize) {
        let x: Vec<Complex> = (0..n)
            .map(|i| Complex::new(((i * 7 + 3) % 11) as f64 - 5.0, ((i * 5) % 13) as f64 * 0.1))
            .collect();
        let want = naive_dft(&x);
        let mut got = x.clone();
        FftPlan::new(n).process(&mut got);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()), "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn matches_naive_dft_for_various_sizes() {
        for n in [1, 2, 3, 4, 5, 8, 12, 17, 64, 100, 256] {
            check(n);
        }
    }

    #[test]
    fn real_forward_is_one_sided() {
        let plan = FftPlan::new(256);
        assert_eq!(plan.real_forward(&[0.0; 256]).len(), 129);
    }
}
