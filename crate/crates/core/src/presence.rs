//! User presence detection with cell-averaging CFAR.
//!
//! Per-bin power is the mean of `|x|²` over all antennas and the whole
//! segment. A bin is a detection when its power exceeds `threshold` times the
//! mean power of its training cells (guard cells excluded). The strongest
//! detection is reported as the user's range bin.
//!
//! The threshold is a power ratio; the source material does not say whether
//! its 1.5 applies to power or amplitude.

use alloc::vec::Vec;

use crate::dsp::RangeProfileCube;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct CfarConfig {
    /// Power ratio over the local noise estimate.
    pub threshold: f64,
    /// Training cells on each side.
    pub training_cells: usize,
    /// Guard cells on each side.
    pub guard_cells: usize,
}

impl Default for CfarConfig {
    fn default() -> Self {
        CfarConfig {
            threshold: 1.5,
            training_cells: 8,
            guard_cells: 2,
        }
    }
}

impl CfarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::param("threshold", "must be positive"));
        }
        if self.training_cells == 0 {
            return Err(Error::param("training_cells", "need at least one training cell"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PresenceResult {
    pub detected: bool,
    /// Strongest detected bin; the strongest bin overall when nothing is detected.
    pub bin_index: usize,
    pub peak_power: f64,
    /// Training-cell mean at `bin_index`.
    pub noise_floor: f64,
}

/// Mean `|x|²` per range bin over antennas and time.
pub fn bin_powers(cube: &RangeProfileCube) -> Vec<f64> {
    let count = (cube.antennas() * cube.time()).max(1) as f64;
    (0..cube.bins())
        .map(|b| {
            (0..cube.antennas())
                .map(|a| cube.values.series(b, a).iter().map(|v| v.norm_sqr()).sum::<f64>())
                .sum::<f64>()
                / count
        })
        .collect()
}

/// Training-cell mean for `bin`; edge bins fall back to whichever side exists.
pub fn noise_estimate(powers: &[f64], bin: usize, cfg: &CfarConfig) -> f64 {
    let n = powers.len();
    let reach = cfg.guard_cells + cfg.training_cells;
    let mut sum = 0.0;
    let mut count = 0usize;
    let lo_end = bin.saturating_sub(cfg.guard_cells);
    let lo_start = bin.saturating_sub(reach);
    for &p in &powers[lo_start..lo_end] {
        sum += p;
        count += 1;
    }
    let hi_start = (bin + cfg.guard_cells + 1).min(n);
    let hi_end = (bin + reach + 1).min(n);
    for &p in &powers[hi_start..hi_end] {
        sum += p;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Bins that pass the CFAR test.
pub fn cfar_detections(powers: &[f64], cfg: &CfarConfig) -> Vec<usize> {
    (0..powers.len())
        .filter(|&b| {
            let noise = noise_estimate(powers, b, cfg);
            powers[b] > cfg.threshold * noise && powers[b] > 0.0
        })
        .collect()
}

/// Finds the user's range bin in a clutter-filtered cube.
pub fn detect(cube: &RangeProfileCube, cfg: &CfarConfig) -> Result<PresenceResult> {
    cfg.validate()?;
    let powers = bin_powers(cube);
    if powers.is_empty() {
        return Err(Error::TooShort("cube has no range bins".into()));
    }
    let strongest = |bins: &mut dyn Iterator<Item = usize>| {
        bins.fold(None::<usize>, |best, b| match best {
            Some(o) if powers[b] <= powers[o] => Some(o),
            _ => Some(b),
        })
    };
    let detections = cfar_detections(&powers, cfg);
    let (detected, bin) = match strongest(&mut detections.iter().copied()) {
        Some(b) => (true, b),
        None => (false, strongest(&mut (0..powers.len())).unwrap_or(0)),
    };
    Ok(PresenceResult {
        detected,
        bin_index: bin,
        peak_power: powers[bin],
        noise_floor: noise_estimate(&powers, bin, cfg),
    })
}

/// Detected segments over total segments.
pub fn recall(results: &[PresenceResult]) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    results.iter().filter(|r| r.detected).count() as f64 / results.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::Cube3;
    use crate::simkit::RadarSpec;
    use crate::Complex;
    use alloc::vec;

    fn cube_with_powers(powers: &[f64]) -> RangeProfileCube {
        let data = powers.iter().map(|p| Complex::new(p.sqrt(), 0.0)).collect();
        RangeProfileCube {
            values: Cube3::from_vec(powers.len(), 1, 1, data).unwrap(),
            slow_time_rate: 30.0,
            spec: RadarSpec::uwb(),
            truth_hr: vec![],
            start_time: 0.0,
        }
    }

    #[test]
    fn zero_cube_is_not_detected() {
        let r = detect(&cube_with_powers(&[0.0; 40]), &CfarConfig::default()).unwrap();
        assert!(!r.detected);
    }

    #[test]
    fn strongest_detection_wins() {
        let mut p = vec![1.0; 60];
        p[20] = 10.0;
        p[45] = 30.0;
        let r = detect(&cube_with_powers(&p), &CfarConfig::default()).unwrap();
        assert!(r.detected);
        assert_eq!(r.bin_index, 45);
        assert!(r.peak_power > 1.5 * r.noise_floor);
    }

    #[test]
    fn ties_break_toward_lower_bin() {
        let mut p = vec![1.0; 60];
        p[20] = 10.0;
        p[45] = 10.0;
        assert_eq!(detect(&cube_with_powers(&p), &CfarConfig::default()).unwrap().bin_index, 20);
    }

    #[test]
    fn edge_bins_use_one_sided_windows() {
        let mut p = vec![1.0; 8];
        p[0] = 5.0;
        let r = detect(&cube_with_powers(&p), &CfarConfig::default()).unwrap();
        assert!(r.detected);
        assert_eq!(r.bin_index, 0);
        assert!((r.noise_floor - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_config() {
        let cfg = CfarConfig {
            training_cells: 0,
            ..CfarConfig::default()
        };
        assert!(detect(&cube_with_powers(&[1.0; 4]), &cfg).is_err());
    }
}
