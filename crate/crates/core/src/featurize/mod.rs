//! Model input construction.
//!
//! A detected segment goes through bin selection, per-(bin, antenna)
//! magnitude and unwrapped phase, a zero-phase high-pass, Savitzky–Golay
//! respiration removal and per-row min-max scaling. Rows are laid out
//! bin-major, then antenna, with the feature pair innermost, so neighbouring
//! rows are one physical step apart.

mod highpass;
mod pca;
mod savgol;
mod unwrap;

use alloc::vec;
use alloc::vec::Vec;

pub use highpass::{highpass, Highpass};
pub use pca::{pca_beamform, principal_direction, symmetric_eigen};
pub use savgol::{adaptive_respiration_filter, residual_response, savgol_coefficients, savgol_smooth};
pub use unwrap::{unwrap_angles, unwrap_phase, wrap_angle};

use crate::dsp::{Cube3, RangeProfileCube};
use crate::presence::PresenceResult;
use crate::{Complex, Error, Result};

/// Which per-sample features become rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FeatureSet {
    #[default]
    Both,
    AngleOnly,
    MagnitudeOnly,
}

impl FeatureSet {
    pub fn count(self) -> usize {
        match self {
            FeatureSet::Both => 2,
            _ => 1,
        }
    }
}

/// Order of the two rows in a feature pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FeatureOrder {
    #[default]
    AngleMagnitude,
    MagnitudeAngle,
}

/// How receive antennas map to examples.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AntennaMode {
    /// Every antenna, concatenated into one example.
    #[default]
    All,
    /// The listed antennas, concatenated.
    Select(Vec<usize>),
    /// One single-antenna example per antenna.
    Split,
    /// The listed antennas merged by PCA beamforming into one virtual antenna.
    Pca(Vec<usize>),
}

impl AntennaMode {
    /// Antenna groups, one per produced example.
    pub fn groups(&self, antennas: usize) -> Result<Vec<Vec<usize>>> {
        let check = |list: &Vec<usize>| -> Result<()> {
            if list.is_empty() {
                return Err(Error::param("antennas", "empty antenna list"));
            }
            if let Some(&a) = list.iter().find(|&&a| a >= antennas) {
                return Err(Error::param(
                    "antennas",
                    alloc::format!("antenna {a} out of range for {antennas} antennas"),
                ));
            }
            Ok(())
        };
        Ok(match self {
            AntennaMode::All => vec![(0..antennas).collect()],
            AntennaMode::Select(list) | AntennaMode::Pca(list) => {
                check(list)?;
                vec![list.clone()]
            }
            AntennaMode::Split => (0..antennas).map(|a| vec![a]).collect(),
        })
    }

    /// Antennas contributing rows to one example.
    pub fn rows_per_example(&self, antennas: usize) -> usize {
        match self {
            AntennaMode::All => antennas,
            AntennaMode::Select(list) => list.len(),
            AntennaMode::Split | AntennaMode::Pca(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct FeatureConfig {
    pub num_range_bins: usize,
    pub antennas: AntennaMode,
    pub features: FeatureSet,
    /// High-pass cutoff, Hz.
    pub highpass_cutoff: f64,
    pub sg_order: usize,
    /// Savitzky–Golay window in samples.
    pub sg_window: usize,
    pub feature_order: FeatureOrder,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            num_range_bins: 32,
            antennas: AntennaMode::All,
            features: FeatureSet::Both,
            highpass_cutoff: 0.3,
            sg_order: 3,
            sg_window: 45,
            feature_order: FeatureOrder::AngleMagnitude,
        }
    }
}

impl FeatureConfig {
    /// One bin of one antenna, as used for transfer learning.
    pub fn single(antenna: usize) -> Self {
        FeatureConfig {
            num_range_bins: 1,
            antennas: AntennaMode::Select(vec![antenna]),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_range_bins == 0 {
            return Err(Error::param("num_range_bins", "must be at least 1"));
        }
        if self.sg_window % 2 == 0 || self.sg_window <= self.sg_order + 1 {
            return Err(Error::param("sg_window", "must be odd and larger than sg_order + 1"));
        }
        if !(self.highpass_cutoff > 0.0) {
            return Err(Error::param("highpass_cutoff", "must be positive"));
        }
        Ok(())
    }

    /// Rows per example for a radar with `antennas` receivers.
    pub fn width(&self, antennas: usize) -> usize {
        self.features.count() * self.antennas.rows_per_example(antennas) * self.num_range_bins
    }
}

/// `k` consecutive bins around `center`: `k/2` below and `k/2 - 1` above
/// for even `k`. Windows that run off the array are shifted back inside it;
/// bins are zero-filled only when the cube has fewer than `k` bins.
pub fn select_bins(cube: &RangeProfileCube, center: usize, k: usize) -> RangeProfileCube {
    let bins = cube.bins();
    let start = selection_start(bins, center, k);
    let (a, t) = (cube.antennas(), cube.time());
    let mut out = Cube3::<Complex>::zeros(k, a, t);
    for row in 0..k.min(bins) {
        for ant in 0..a {
            out.series_mut(row, ant).copy_from_slice(cube.values.series(start + row, ant));
        }
    }
    RangeProfileCube {
        values: out,
        slow_time_rate: cube.slow_time_rate,
        spec: cube.spec,
        truth_hr: cube.truth_hr.clone(),
        start_time: cube.start_time,
    }
}

/// First bin index kept by [`select_bins`].
pub fn selection_start(bins: usize, center: usize, k: usize) -> usize {
    if k >= bins {
        0
    } else {
        (center as isize - (k / 2) as isize).clamp(0, (bins - k) as isize) as usize
    }
}

/// Filtered feature rows before min-max scaling, row-major `[S × T]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawFeatures {
    pub rows: usize,
    pub time: usize,
    pub values: Vec<f64>,
    pub label_hr: f64,
}

impl RawFeatures {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.time..(r + 1) * self.time]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.time..(r + 1) * self.time]
    }

    /// Min-max scaled model input.
    pub fn normalize(&self) -> FeatureTensor {
        let (s, t) = (self.rows, self.time);
        let mut values = vec![0.0; s * t];
        for r in 0..s {
            let row = self.row(r);
            for (i, v) in normalize_row(row).into_iter().enumerate() {
                values[i * s + r] = v;
            }
        }
        FeatureTensor {
            time: t,
            width: s,
            values,
            label_hr: self.label_hr,
        }
    }
}

/// Scales a row to `[0, 1]`; constant rows become all 0.5.
pub fn normalize_row(row: &[f64]) -> Vec<f64> {
    let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![0.5; row.len()];
    }
    row.iter().map(|&v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
}

/// Model input: `T × S × 1`, stored time-major (`values[t * width + s]`).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureTensor {
    pub time: usize,
    pub width: usize,
    pub values: Vec<f64>,
    pub label_hr: f64,
}

impl FeatureTensor {
    pub fn get(&self, t: usize, s: usize) -> f64 {
        self.values[t * self.width + s]
    }

    /// Column `s` over time.
    pub fn row(&self, s: usize) -> Vec<f64> {
        (0..self.time).map(|t| self.get(t, s)).collect()
    }

    /// Exchanges every adjacent row pair `(2k, 2k + 1)`.
    pub fn swap_feature_pairs(&mut self) -> Result<()> {
        if self.width % 2 != 0 {
            return Err(Error::Shape(alloc::format!(
                "feature swap needs an even width, got {}",
                self.width
            )));
        }
        for t in 0..self.time {
            let line = &mut self.values[t * self.width..(t + 1) * self.width];
            for pair in line.chunks_exact_mut(2) {
                pair.swap(0, 1);
            }
        }
        Ok(())
    }
}

fn filter_row(series: &[f64], hp: &Highpass, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let y = hp.filtfilt(series);
    adaptive_respiration_filter(&y, cfg.sg_order, cfg.sg_window)
}

/// Builds filtered rows for each antenna group of a clutter-filtered segment
/// with its range bin already chosen.
pub fn extract_raw_features(
    cube: &RangeProfileCube,
    center: usize,
    label_hr: f64,
    cfg: &FeatureConfig,
) -> Result<Vec<RawFeatures>> {
    cfg.validate()?;
    if cube.time() < cfg.sg_window {
        return Err(Error::TooShort(alloc::format!(
            "segment of {} samples is shorter than the {}-sample trend window",
            cube.time(),
            cfg.sg_window
        )));
    }
    if center >= cube.bins() {
        return Err(Error::Shape(alloc::format!("bin {center} of {}", cube.bins())));
    }
    let hp = Highpass::new(cfg.highpass_cutoff, cube.slow_time_rate)?;
    let window = select_bins(cube, center, cfg.num_range_bins);
    let mut out = Vec::new();
    for group in cfg.antennas.groups(cube.antennas())? {
        let mut sub = RangeProfileCube {
            values: window.values.select_antennas(&group)?,
            ..window.clone()
        };
        if matches!(cfg.antennas, AntennaMode::Pca(_)) && group.len() > 1 {
            sub = pca_beamform(&sub)?;
        }
        let t = sub.time();
        let mut values = Vec::with_capacity(cfg.width(cube.antennas()) * t);
        for b in 0..sub.bins() {
            for a in 0..sub.antennas() {
                let series = sub.values.series(b, a);
                let angle = || -> Result<Vec<f64>> { filter_row(&unwrap_phase(series), &hp, cfg) };
                let magnitude = || -> Result<Vec<f64>> {
                    let m: Vec<f64> = series.iter().map(|z| z.norm()).collect();
                    filter_row(&m, &hp, cfg)
                };
                match (cfg.features, cfg.feature_order) {
                    (FeatureSet::AngleOnly, _) => values.extend(angle()?),
                    (FeatureSet::MagnitudeOnly, _) => values.extend(magnitude()?),
                    (FeatureSet::Both, FeatureOrder::AngleMagnitude) => {
                        values.extend(angle()?);
                        values.extend(magnitude()?);
                    }
                    (FeatureSet::Both, FeatureOrder::MagnitudeAngle) => {
                        values.extend(magnitude()?);
                        values.extend(angle()?);
                    }
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature rows".into()));
        }
        out.push(RawFeatures {
            rows: values.len() / t,
            time: t,
            values,
            label_hr,
        });
    }
    Ok(out)
}

/// Full featurization of a detected segment. Rejected when no user was found.
pub fn assemble_features(
    cube: &RangeProfileCube,
    presence: &PresenceResult,
    label_hr: f64,
    cfg: &FeatureConfig,
) -> Result<Vec<FeatureTensor>> {
    if !presence.detected {
        return Err(Error::Rejected("no user detected".into()));
    }
    Ok(extract_raw_features(cube, presence.bin_index, label_hr, cfg)?
        .iter()
        .map(RawFeatures::normalize)
        .collect())
}
