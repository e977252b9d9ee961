//! Segment-level glue: presence detection plus featurization, and synthetic
//! cohorts rendered straight to training examples.

use alloc::vec::Vec;
use rand::Rng as _;

use crate::dsp::{fmcw_segments, uwb_segments, FastTimeWindow, Segment, SEGMENT_SECONDS, STEP_SECONDS};
use crate::featurize::{extract_raw_features, FeatureConfig, RawFeatures};
use crate::presence::{detect, CfarConfig, PresenceResult};
use crate::rng::{self, stream};
use crate::simkit::{simulate_fmcw, simulate_uwb, RadarKind, RadarSpec, SceneSpec};
use crate::train::Example;
use crate::{Error, Result};

/// Presence detection followed by feature extraction for one segment.
/// Segments without a detected user are rejected.
pub fn process_segment(
    segment: &Segment,
    cfar: &CfarConfig,
    features: &FeatureConfig,
) -> Result<(PresenceResult, Vec<RawFeatures>)> {
    let presence = detect(&segment.cube, cfar)?;
    if !presence.detected {
        return Err(Error::Rejected("no user detected".into()));
    }
    let raw = extract_raw_features(&segment.cube, presence.bin_index, segment.label_hr, features)?;
    Ok((presence, raw))
}

/// Renders a scene and cuts it into clutter-filtered 60 s segments.
pub fn render_segments(scene: &SceneSpec, spec: &RadarSpec) -> Result<Vec<Segment>> {
    match spec.kind {
        RadarKind::Fmcw => fmcw_segments(&simulate_fmcw(scene, spec)?, FastTimeWindow::Rectangular),
        RadarKind::IrUwb => uwb_segments(&simulate_uwb(scene, spec)?),
    }
}

/// Recording length that yields exactly `segments` windows.
pub fn duration_for(segments: usize) -> f64 {
    SEGMENT_SECONDS + STEP_SECONDS * segments.saturating_sub(1) as f64
}

/// Random subjects drawn from uniform ranges.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct CohortSpec {
    pub kind: RadarKind,
    pub subjects: usize,
    pub segments_per_subject: usize,
    /// Mean heart rate range, bpm.
    pub heart_rate: (f64, f64),
    pub heart_rate_variation: f64,
    /// Chest distance range, m.
    pub distance: (f64, f64),
    /// Hz.
    pub respiration_rate: (f64, f64),
    /// m; the cardiac amplitude is 1/20 of it.
    pub respiration_amplitude: (f64, f64),
    pub drift_amplitude: f64,
    pub noise_std: f64,
    pub clutter_amplitude: f64,
    /// Id of the first subject; the rest follow consecutively.
    pub first_subject: u32,
    pub seed: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        Self::fmcw()
    }
}

impl CohortSpec {
    pub fn fmcw() -> Self {
        CohortSpec {
            kind: RadarKind::Fmcw,
            subjects: 10,
            segments_per_subject: 5,
            heart_rate: (45.0, 100.0),
            heart_rate_variation: 2.0,
            distance: (0.5, 2.0),
            respiration_rate: (0.2, 0.33),
            respiration_amplitude: (3e-3, 6e-3),
            drift_amplitude: 1e-3,
            noise_std: 1.0,
            clutter_amplitude: 5.0,
            first_subject: 0,
            seed: 0,
        }
    }

    pub fn uwb() -> Self {
        CohortSpec {
            kind: RadarKind::IrUwb,
            distance: (0.5, 2.5),
            noise_std: 0.1,
            clutter_amplitude: 2.0,
            ..Self::fmcw()
        }
    }

    pub fn radar(&self) -> RadarSpec {
        RadarSpec::preset(self.kind)
    }

    /// Scene of subject `index` (0-based within this cohort).
    pub fn scene(&self, index: usize) -> SceneSpec {
        let id = self.first_subject as u64 + index as u64;
        let mut rng = rng::seeded(self.seed ^ id.wrapping_mul(0x9e37_79b9_7f4a_7c15), stream::SCENES);
        let mut draw = |(lo, hi): (f64, f64)| if hi > lo { rng.random_range(lo..hi) } else { lo };
        let heart_rate = draw(self.heart_rate);
        let target_range = draw(self.distance);
        let respiration_rate = draw(self.respiration_rate);
        let amplitude = draw(self.respiration_amplitude);
        SceneSpec {
            target_range,
            respiration_rate,
            heart_rate,
            heart_rate_variation: self.heart_rate_variation.min(heart_rate / 2.0),
            drift_amplitude: self.drift_amplitude,
            noise_std: self.noise_std,
            clutter_amplitude: self.clutter_amplitude,
            rng_seed: rng.random(),
            duration: duration_for(self.segments_per_subject),
            ..SceneSpec::default()
        }
        .with_respiration_amplitude(amplitude)
    }
}

/// Examples of a synthetic cohort plus the number of rejected segments.
pub fn synthesize(cohort: &CohortSpec, features: &FeatureConfig, cfar: &CfarConfig) -> Result<(Vec<Example>, usize)> {
    let spec = cohort.radar();
    let mut examples = Vec::new();
    let mut rejected = 0;
    for i in 0..cohort.subjects {
        let scene = cohort.scene(i);
        for segment in render_segments(&scene, &spec)? {
            match process_segment(&segment, cfar, features) {
                Ok((_, raws)) => examples.extend(raws.into_iter().map(|features| Example {
                    features,
                    subject: cohort.first_subject + i as u32,
                })),
                Err(Error::Rejected(_)) => rejected += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok((examples, rejected))
}
