use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::clutter::clutter_filter_in_place;
use super::cube::{ChirpCube, RangeProfileCube};
use super::range::{range_fft, FastTimeWindow};
use super::resample::downsample_uwb;
use crate::Result;

pub const SEGMENT_SECONDS: f64 = 60.0;
pub const STEP_SECONDS: f64 = 15.0;

/// A 60 s model-ready window of range profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub cube: RangeProfileCube,
    /// Mean reference heart rate over the window, bpm.
    pub label_hr: f64,
    pub valid: bool,
}

/// Start indices of every complete window; trailing partial windows are dropped.
pub fn segment_starts(total: usize, rate: f64, window_s: f64, step_s: f64) -> Vec<usize> {
    let window = (window_s * rate).round() as usize;
    let step = ((step_s * rate).round() as usize).max(1);
    if window == 0 || total < window {
        return Vec::new();
    }
    (0..=(total - window) / step).map(|k| k * step).collect()
}

fn label_of(truth: &[f64]) -> (f64, bool) {
    if truth.is_empty() {
        return (0.0, false);
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    (mean, mean.is_finite() && mean > 0.0)
}

/// Splits a range-profile stream into overlapping windows without filtering.
pub fn segment_stream(cube: &RangeProfileCube, window_s: f64, step_s: f64) -> Vec<Segment> {
    let window = (window_s * cube.slow_time_rate).round() as usize;
    segment_starts(cube.time(), cube.slow_time_rate, window_s, step_s)
        .into_iter()
        .map(|start| {
            let truth = if cube.truth_hr.len() >= start + window {
                cube.truth_hr[start..start + window].to_vec()
            } else {
                Vec::new()
            };
            let (label_hr, valid) = label_of(&truth);
            Segment {
                cube: RangeProfileCube {
                    values: cube.values.slice_time(start, window),
                    slow_time_rate: cube.slow_time_rate,
                    spec: cube.spec,
                    truth_hr: truth,
                    start_time: cube.start_time + start as f64 / cube.slow_time_rate,
                },
                label_hr,
                valid,
            }
        })
        .collect()
}

/// FMCW front end: range profiles of the burst-averaged chirps, cut into
/// windows with the clutter removed per window.
///
/// Mean removal over slow time commutes with the fast-time FFT, so the whole
/// stream is transformed once and each window's mean is removed in the range
/// domain. This gives the same profiles as filtering the chirps first.
pub fn fmcw_segments(chirps: &ChirpCube, window: FastTimeWindow) -> Result<Vec<Segment>> {
    let rate = chirps.spec.slow_time_rate;
    let len = (SEGMENT_SECONDS * rate).round() as usize;
    let profiles = range_fft(chirps, window)?;
    let mut segments = segment_stream(&profiles, SEGMENT_SECONDS, STEP_SECONDS);
    debug_assert!(segments.iter().all(|s| s.cube.time() == len));
    for s in &mut segments {
        clutter_filter_in_place(&mut s.cube.values);
    }
    Ok(segments)
}

/// IR-UWB front end: average down to 30 Hz, window, remove clutter per window.
pub fn uwb_segments(raw: &RangeProfileCube) -> Result<Vec<Segment>> {
    let resampled = downsample_uwb(raw)?;
    let mut segments = segment_stream(&resampled, SEGMENT_SECONDS, STEP_SECONDS);
    for s in &mut segments {
        clutter_filter_in_place(&mut s.cube.values);
    }
    Ok(segments)
}
