use crate::SPEED_OF_LIGHT;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RadarKind {
    Fmcw,
    IrUwb,
}

/// Static description of a radar front end.
///
/// Range resolution and wavelength are derived, never stored, so they always
/// agree with the bandwidth and carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RadarSpec {
    pub kind: RadarKind,
    /// Hz.
    pub carrier_frequency: f64,
    /// Hz.
    pub bandwidth: f64,
    pub num_antennas: usize,
    /// Samples per chirp (FMCW only; 0 for IR-UWB).
    pub fast_time_samples: usize,
    pub range_bins: usize,
    /// Slow-time rate after preprocessing, Hz.
    pub slow_time_rate: f64,
    /// Native slow-time rate of the raw stream, Hz.
    pub raw_rate: f64,
    /// Chirps per burst (FMCW only).
    pub chirps_per_burst: usize,
}

impl RadarSpec {
    /// 60 GHz, 5.5 GHz sweep, three receivers, 256 samples per chirp.
    pub fn fmcw() -> Self {
        RadarSpec {
            kind: RadarKind::Fmcw,
            carrier_frequency: 60.0e9,
            bandwidth: 5.5e9,
            num_antennas: 3,
            fast_time_samples: 256,
            range_bins: 129,
            slow_time_rate: 30.0,
            raw_rate: 30.0,
            chirps_per_burst: 20,
        }
    }

    /// 8 GHz, 500 MHz pulses, two receivers, 52 range bins at 200 Hz.
    pub fn uwb() -> Self {
        RadarSpec {
            kind: RadarKind::IrUwb,
            carrier_frequency: 8.0e9,
            bandwidth: 500.0e6,
            num_antennas: 2,
            fast_time_samples: 0,
            range_bins: 52,
            slow_time_rate: 30.0,
            raw_rate: 200.0,
            chirps_per_burst: 1,
        }
    }

    pub fn preset(kind: RadarKind) -> Self {
        match kind {
            RadarKind::Fmcw => Self::fmcw(),
            RadarKind::IrUwb => Self::uwb(),
        }
    }

    /// `c / 2B`, metres.
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth)
    }

    /// `c / f_carrier`, metres.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Farthest range representable in the cube.
    pub fn max_range(&self) -> f64 {
        self.range_bins as f64 * self.range_resolution()
    }

    /// Range bin nearest to `range`.
    pub fn bin_of(&self, range: f64) -> usize {
        num_traits::Float::round(range / self.range_resolution()) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_reference_front_ends() {
        let f = RadarSpec::fmcw();
        assert!((f.range_resolution() - 0.027).abs() < 0.0005);
        assert!((f.range_resolution() - SPEED_OF_LIGHT / 11.0e9).abs() < 1e-12);
        assert_eq!(f.num_antennas, 3);
        assert!((f.wavelength() - 0.004_996_5).abs() < 1e-6);

        let u = RadarSpec::uwb();
        assert!((u.range_resolution() - 0.3).abs() < 0.001);
        assert_eq!(u.num_antennas, 2);
        assert_eq!(u.range_bins, 52);
    }

    #[test]
    fn bin_mapping() {
        assert_eq!(RadarSpec::fmcw().bin_of(1.0), 37);
        assert_eq!(RadarSpec::uwb().bin_of(0.6), 2);
        assert_eq!(RadarSpec::uwb().bin_of(1.5), 5);
    }
}
