use super::cube::Cube3;
use crate::Complex;

/// Sample types the clutter filter operates on.
pub trait ClutterSample: Copy + PartialEq {
    /// Mean of `series`, accurately summed.
    fn mean(series: &[Self]) -> Self;
    /// Squared magnitude.
    fn power(&self) -> f64;
    fn minus(self, other: Self) -> Self;
}

impl ClutterSample for f64 {
    fn mean(series: &[f64]) -> f64 {
        neumaier(series.iter().copied()) / series.len() as f64
    }

    fn power(&self) -> f64 {
        self * self
    }

    fn minus(self, other: f64) -> f64 {
        self - other
    }
}

impl ClutterSample for Complex {
    fn mean(series: &[Complex]) -> Complex {
        let n = series.len() as f64;
        Complex::new(
            neumaier(series.iter().map(|c| c.re)) / n,
            neumaier(series.iter().map(|c| c.im)) / n,
        )
    }

    fn power(&self) -> f64 {
        self.norm_sqr()
    }

    fn minus(self, other: Complex) -> Complex {
        self - other
    }
}

fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A residual mean at most this many ulps of the largest sample counts as zero.
const MEAN_TOLERANCE: f64 = 4.0 * f64::EPSILON;

/// Guard on mean-removal passes per series. Passes repeat until the residual
/// mean is within tolerance, so the output always passes the check and a
/// second application of the filter returns it unchanged.
const MAX_PASSES: usize = 16;

/// Subtracts the slow-time mean from every (row, antenna) series.
pub fn clutter_filter<T: ClutterSample>(cube: &Cube3<T>) -> Cube3<T> {
    let mut out = cube.clone();
    clutter_filter_in_place(&mut out);
    out
}

pub fn clutter_filter_in_place<T: ClutterSample>(cube: &mut Cube3<T>) {
    if cube.time() == 0 {
        return;
    }
    for r in 0..cube.rows() {
        for a in 0..cube.antennas() {
            remove_mean(cube.series_mut(r, a));
        }
    }
}

fn remove_mean<T: ClutterSample>(series: &mut [T]) {
    for _ in 0..MAX_PASSES {
        let mean = T::mean(series);
        let peak = series.iter().fold(0.0f64, |m, v| m.max(v.power()));
        if mean.power() <= MEAN_TOLERANCE * MEAN_TOLERANCE * peak {
            return;
        }
        series.iter_mut().for_each(|v| *v = v.minus(mean));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn constant_series_vanish() {
        let data: Vec<f64> = (0..4 * 2).flat_map(|k| [k as f64 + 0.3; 50]).collect();
        let cube = Cube3::from_vec(4, 2, 50, data).unwrap();
        assert!(clutter_filter(&cube).as_slice().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn shift_invariant() {
        let data: Vec<Complex> = (0..60)
            .map(|i| Complex::new((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let cube = Cube3::from_vec(3, 1, 20, data.clone()).unwrap();
        let shifted = Cube3::from_vec(
            3,
            1,
            20,
            data.iter().map(|v| v + Complex::new(5.0, -2.0)).collect(),
        )
        .unwrap();
        let a = clutter_filter(&cube);
        let b = clutter_filter(&shifted);
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn idempotent_and_zero_mean(values in proptest::collection::vec(-1e3f64..1e3, 2..300)) {
            let n = values.len();
            let cube = Cube3::from_vec(1, 1, n, values).unwrap();
            let once = clutter_filter(&cube);
            let twice = clutter_filter(&once);
            prop_assert_eq!(&once, &twice);
            let scale = once.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(f64::mean(once.as_slice()).abs() <= 4.0 * f64::EPSILON * scale);
        }
    }
}
