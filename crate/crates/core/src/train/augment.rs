use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::featurize::{FeatureTensor, RawFeatures};
use crate::rng::Rng;
use crate::{Error, Result};

/// Additive white noise on normalized features.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianNoise {
    pub std: f64,
    pub probability: f64,
}

impl GaussianNoise {
    pub const fn new(probability: f64) -> Self {
        GaussianNoise { std: 0.0005, probability }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FeatureSwap {
    #[default]
    Off,
    /// Per example with probability 1/2.
    Random,
    Always,
}

/// Time compression of pre-normalization rows, raising the apparent heart rate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HrAccelerate {
    pub min: f64,
    pub max: f64,
    pub probability: f64,
    /// Only labels at or above this are eligible, bpm.
    pub hr_floor: f64,
}

impl Default for HrAccelerate {
    fn default() -> Self {
        HrAccelerate {
            min: 1.0,
            max: 1.2,
            probability: 0.5,
            hr_floor: 70.0,
        }
    }
}

/// Loss weight for high heart rates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Upweight {
    pub factor: f64,
    pub hr_floor: f64,
}

impl Default for Upweight {
    fn default() -> Self {
        Upweight {
            factor: 1.5,
            hr_floor: 90.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct Augmentations {
    pub gaussian_noise: Option<GaussianNoise>,
    pub feature_swap: FeatureSwap,
    pub hr_accelerate: Option<HrAccelerate>,
    pub upweight: Option<Upweight>,
}

impl Augmentations {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if let Some(n) = self.gaussian_noise {
            if !prob(n.probability) || !(n.std >= 0.0) {
                return Err(Error::param("gaussian_noise", "probability in [0, 1] and std >= 0"));
            }
        }
        if let Some(h) = self.hr_accelerate {
            if !prob(h.probability) || !(h.min > 0.0 && h.min <= h.max) {
                return Err(Error::param("hr_accelerate", "probability in [0, 1] and 0 < min <= max"));
            }
        }
        if let Some(u) = self.upweight {
            if !(u.factor > 0.0) {
                return Err(Error::param("upweight", "factor must be positive"));
            }
        }
        Ok(())
    }
}

/// With probability `p`, adds N(0, std²) to every value. Returns whether it fired.
pub fn augment_gaussian(x: &mut FeatureTensor, noise: &GaussianNoise, rng: &mut Rng) -> bool {
    if !rng.random_bool(noise.probability.clamp(0.0, 1.0)) {
        return false;
    }
    if noise.std > 0.0 {
        let normal = Normal::new(0.0, noise.std).expect("finite std");
        x.values.iter_mut().for_each(|v| *v += normal.sample(rng));
    }
    true
}

/// Applies the swap mode. Returns whether rows were exchanged.
pub fn augment_feature_swap(x: &mut FeatureTensor, mode: FeatureSwap, rng: &mut Rng) -> Result<bool> {
    let apply = match mode {
        FeatureSwap::Off => false,
        FeatureSwap::Always => true,
        FeatureSwap::Random => rng.random_bool(0.5),
    };
    if apply {
        x.swap_feature_pairs()?;
    }
    Ok(apply)
}

/// Resamples every row at `t · m` by linear interpolation; reads past the
/// end reflect back into the series. The label is scaled by `m`.
pub fn accelerate(raw: &RawFeatures, m: f64) -> RawFeatures {
    let t = raw.time;
    let mut out = raw.clone();
    out.label_hr = raw.label_hr * m;
    if t < 2 || m == 1.0 {
        return out;
    }
    let last = (t - 1) as f64;
    for r in 0..raw.rows {
        let src = raw.row(r);
        let dst = out.row_mut(r);
        for (i, v) in dst.iter_mut().enumerate() {
            let mut p = i as f64 * m;
            let period = 2.0 * last;
            p %= period;
            if p > last {
                p = period - p;
            }
            let k = (p as usize).min(t - 2);
            let frac = p - k as f64;
            *v = src[k] * (1.0 - frac) + src[k + 1] * frac;
        }
    }
    out
}

/// Draws the HR augmentation for one example; returns the features (label
/// included) and the loss weight.
pub fn augment_hr_accelerate(
    raw: &RawFeatures,
    accel: Option<&HrAccelerate>,
    upweight: Option<&Upweight>,
    rng: &mut Rng,
) -> (RawFeatures, f64) {
    let mut out = None;
    if let Some(a) = accel {
        if raw.label_hr >= a.hr_floor && rng.random_bool(a.probability.clamp(0.0, 1.0)) {
            let m = if a.max > a.min { rng.random_range(a.min..=a.max) } else { a.min };
            out = Some(accelerate(raw, m));
        }
    }
    let out = out.unwrap_or_else(|| raw.clone());
    let weight = sample_weight(out.label_hr, upweight);
    (out, weight)
}

/// Loss weight for a (possibly accelerated) label.
pub fn sample_weight(label_hr: f64, upweight: Option<&Upweight>) -> f64 {
    match upweight {
        Some(u) if label_hr >= u.hr_floor => u.factor,
        _ => 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use alloc::vec;

    #[test]
    fn unit_multiplier_is_identity() {
        let raw = RawFeatures {
            rows: 2,
            time: 5,
            values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 0.0, -1.0, 0.0, 1.0, 0.0],
            label_hr: 80.0,
        };
        assert_eq!(accelerate(&raw, 1.0), raw);
    }

    #[test]
    fn label_rule() {
        let up = Upweight::default();
        assert_eq!(sample_weight(72.0 * 1.2, Some(&up)), 1.0);
        assert!((80.0f64 * 1.15 - 92.0).abs() < 1e-12);
        assert_eq!(sample_weight(80.0 * 1.15, Some(&up)), 1.5);
        assert_eq!(sample_weight(95.0, None), 1.0);
    }

    #[test]
    fn ineligible_labels_pass_through() {
        let raw = RawFeatures {
            rows: 1,
            time: 4,
            values: vec![0.0, 1.0, 2.0, 3.0],
            label_hr: 60.0,
        };
        let always = HrAccelerate {
            probability: 1.0,
            ..HrAccelerate::default()
        };
        let mut rng = seeded(1, 0);
        let (out, w) = augment_hr_accelerate(&raw, Some(&always), None, &mut rng);
        assert_eq!(out, raw);
        assert_eq!(w, 1.0);
    }

    #[test]
    fn reflection_past_the_end() {
        let raw = RawFeatures {
            rows: 1,
            time: 5,
            values: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            label_hr: 70.0,
        };
        let out = accelerate(&raw, 1.5);
        // Positions 0, 1.5, 3, 4.5 -> 3.5, 6 -> 2.
        assert_eq!(out.values, vec![0.0, 1.5, 3.0, 3.5, 2.0]);
    }
}
