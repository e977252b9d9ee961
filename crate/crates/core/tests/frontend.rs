mod support;

use radar_vitals_core::dsp::{clutter_filter, fmcw_segments, range_fft, ChirpCube, FastTimeWindow};
use radar_vitals_core::simkit::{simulate_fmcw, RadarSpec, SceneSpec};

#[test]
fn cfar_picks_the_target_range_bin() {
    support::range_mapping().unwrap();
}

#[test]
fn phase_tracks_displacement() {
    support::phase_law().unwrap();
}

#[test]
fn clutter_filter_and_fft_identities() {
    support::clutter_and_linearity().unwrap();
}

/// The front end transforms once and filters each window in the range
/// domain; filtering each window's chirps before the FFT must agree.
#[test]
fn windowed_filtering_commutes_with_range_fft() {
    let spec = RadarSpec::fmcw();
    let scene = SceneSpec {
        duration: 75.0,
        noise_std: 1.0,
        clutter_amplitude: 5.0,
        drift_amplitude: 1e-3,
        rng_seed: 9,
        ..SceneSpec::default()
    };
    let chirps = simulate_fmcw(&scene, &spec).unwrap();
    let segments = fmcw_segments(&chirps, FastTimeWindow::Rectangular).unwrap();
    assert_eq!(segments.len(), 2);
    let len = 1800;
    for (k, seg) in segments.iter().enumerate() {
        let start = k * 450;
        let window = ChirpCube {
            values: clutter_filter(&chirps.values.slice_time(start, len)),
            spec,
            truth_hr: chirps.truth_hr[start..start + len].to_vec(),
        };
        let reference = range_fft(&window, FastTimeWindow::Rectangular).unwrap();
        let got = seg.cube.values.as_slice();
        let want = reference.values.as_slice();
        assert_eq!(got.len(), want.len());
        let err: f64 = got.iter().zip(want).map(|(a, b)| (a - b).norm_sqr()).sum();
        let scale: f64 = want.iter().map(|b| b.norm_sqr()).sum();
        assert!((err / scale).sqrt() < 1e-9, "window {k}: {:e}", (err / scale).sqrt());
    }
}

#[test]
fn segment_labels_average_the_reference() {
    let spec = RadarSpec::fmcw();
    let scene = SceneSpec {
        duration: 120.0,
        heart_rate_variation: 5.0,
        ..SceneSpec::default()
    };
    let chirps = simulate_fmcw(&scene, &spec).unwrap();
    let segments = fmcw_segments(&chirps, FastTimeWindow::Rectangular).unwrap();
    assert_eq!(segments.len(), 5);
    for (k, s) in segments.iter().enumerate() {
        let window = &chirps.truth_hr[k * 450..k * 450 + 1800];
        let mean = window.iter().sum::<f64>() / window.len() as f64;
        assert!((s.label_hr - mean).abs() < 1e-9);
        assert_eq!(s.cube.time(), 1800);
        assert!((s.cube.start_time - 15.0 * k as f64).abs() < 1e-12);
    }
}
