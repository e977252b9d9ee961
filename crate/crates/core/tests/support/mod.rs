//! Independent oracles plus one check per acceptance property. Each check
//! returns a short summary on success and the failing measurement otherwise.
//! The unit-of-work tests and the acceptance runner share these bodies.

#![allow(dead_code)]

pub mod oracle;

use std::f64::consts::PI;
use std::fmt::Display;
use std::time::{Duration, Instant};

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use radar_vitals_core::dsp::{clutter_filter, range_fft, Cube3, FastTimeWindow, RangeProfileCube};
use radar_vitals_core::featurize::{
    adaptive_respiration_filter, residual_response, savgol_coefficients, unwrap_angles, unwrap_phase, wrap_angle,
    FeatureTensor, RawFeatures,
};
use radar_vitals_core::fft::{argmax_from, magnitude_spectrum, FftPlan};
use radar_vitals_core::metrics::{bland_altman, bootstrap_ci, BootstrapConfig};
use radar_vitals_core::nn::{Graph, LossKind, Model, ModelSpec, NormStats, StageSpec, Tensor, Var};
use radar_vitals_core::pipeline::render_segments;
use radar_vitals_core::presence::{bin_powers, cfar_detections, detect, CfarConfig};
use radar_vitals_core::rng::{seeded, Rng};
use radar_vitals_core::simkit::{simulate_fmcw, simulate_uwb, RadarSpec, SceneSpec};
use radar_vitals_core::train::{
    accelerate, augment_feature_swap, augment_gaussian, augment_hr_accelerate, FeatureSwap, GaussianNoise,
    HrAccelerate, Upweight,
};
use radar_vitals_core::Complex;

pub type Outcome = Result<String, String>;

pub fn fail<E: Display>(e: E) -> String {
    e.to_string()
}

pub fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration, what: &str) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent <= budget, || format!("{what} took {spent:.1?}, budget {budget:?}"))
}

fn complex_noise(rng: &mut Rng, n: usize) -> Vec<Complex> {
    (0..n)
        .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

fn profile_cube(values: Cube3<Complex>, spec: RadarSpec) -> RangeProfileCube {
    RangeProfileCube {
        values,
        slow_time_rate: spec.slow_time_rate,
        spec,
        truth_hr: Vec::new(),
        start_time: 0.0,
    }
}

// Range mapping

pub fn range_mapping() -> Outcome {
    let start = Instant::now();
    let cfar = CfarConfig::default();
    let cases = [
        (RadarSpec::fmcw(), 0.027, vec![0.5, 1.0, 2.0], 1, 1.0, 5.0),
        (RadarSpec::uwb(), 0.3, vec![0.6, 1.5], 0, 0.1, 2.0),
    ];
    let mut notes = Vec::new();
    for (spec, nominal, ranges, tolerance, noise_std, clutter_amplitude) in cases {
        for r0 in ranges {
            let scene = SceneSpec {
                target_range: r0,
                noise_std,
                clutter_amplitude,
                rng_seed: 11,
                ..SceneSpec::default()
            };
            let segments = render_segments(&scene, &spec).map_err(fail)?;
            let p = detect(&segments[0].cube, &cfar).map_err(fail)?;
            let want = (r0 / nominal).round() as i64;
            ensure(p.detected && (p.bin_index as i64 - want).abs() <= tolerance, || {
                format!(
                    "{:?} target at {r0} m: detected {} at bin {}, expected {want} ± {tolerance}",
                    spec.kind, p.detected, p.bin_index
                )
            })?;
            notes.push(format!("{r0} m -> {}", p.bin_index));
        }
    }
    within_budget(start, Duration::from_secs(5), "range mapping")?;
    Ok(format!("bins {} in {:.1?}", notes.join(", "), start.elapsed()))
}

// Phase law

/// `2/N |Σ x e^{-2πi f t}|`: amplitude of the `freq` component of a detrended series.
pub fn tone_amplitude(series: &[f64], freq: f64, rate: f64) -> f64 {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let (mut re, mut im) = (0.0, 0.0);
    for (i, &x) in series.iter().enumerate() {
        let w = 2.0 * PI * freq * i as f64 / rate;
        re += (x - mean) * w.cos();
        im -= (x - mean) * w.sin();
    }
    2.0 * (re * re + im * im).sqrt() / n
}

fn phase_series(spec: &RadarSpec, scene: &SceneSpec) -> Result<(Vec<f64>, f64), String> {
    let bin = spec.bin_of(scene.target_range);
    Ok(match spec.kind {
        radar_vitals_core::simkit::RadarKind::Fmcw => {
            let chirps = simulate_fmcw(scene, spec).map_err(fail)?;
            let rp = range_fft(&chirps, FastTimeWindow::Rectangular).map_err(fail)?;
            (unwrap_phase(rp.values.series(bin, 0)), rp.slow_time_rate)
        }
        radar_vitals_core::simkit::RadarKind::IrUwb => {
            let raw = simulate_uwb(scene, spec).map_err(fail)?;
            (unwrap_phase(raw.values.series(bin, 0)), raw.slow_time_rate)
        }
    })
}

pub fn phase_law() -> Outcome {
    let amplitude = 5e-4;
    let freq = 1.2;
    let mut notes = Vec::new();
    for spec in [RadarSpec::fmcw(), RadarSpec::uwb()] {
        let scene = SceneSpec {
            respiration_amplitude: 0.0,
            cardiac_amplitude: amplitude,
            heart_rate: freq * 60.0,
            heart_rate_variation: 0.0,
            duration: 60.0,
            ..SceneSpec::default()
        };
        let (phase, rate) = phase_series(&spec, &scene)?;
        let want = 4.0 * PI * amplitude / spec.wavelength();
        let got = tone_amplitude(&phase, freq, rate);
        let err = (got / want - 1.0).abs();
        ensure(err < 0.01, || {
            format!("{:?}: phase amplitude {got:.5} rad, law gives {want:.5} ({:.2}% off)", spec.kind, err * 100.0)
        })?;
        let n = phase.len();
        let mean = phase.iter().sum::<f64>() / n as f64;
        let centred: Vec<f64> = phase.iter().map(|p| p - mean).collect();
        let spectrum = magnitude_spectrum(&centred);
        let resolution = rate / n as f64;
        let peak = argmax_from(&spectrum, 1).unwrap_or(0) as f64 * resolution;
        ensure((peak - freq).abs() <= resolution + 1e-12, || {
            format!("{:?}: spectral peak at {peak:.4} Hz", spec.kind)
        })?;
        notes.push(format!("{:?} {got:.4}/{want:.4} rad, peak {peak:.4} Hz", spec.kind));
    }
    Ok(notes.join("; "))
}

// Unwrapping

pub fn unwrap_round_trips(trials: usize) -> Outcome {
    let mut rng = seeded(3, 0);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let n = rng.random_range(2..600);
        let max_step = rng.random_range(0.05..0.99) * PI;
        let mut x = Vec::with_capacity(n);
        let mut v: f64 = rng.random_range(-50.0..50.0);
        for _ in 0..n {
            x.push(v);
            v += rng.random_range(-max_step..max_step);
        }
        let wrapped: Vec<f64> = x.iter().map(|&v| oracle::wrap(v)).collect();
        for (&w, &v) in wrapped.iter().zip(&x) {
            ensure((w - wrap_angle(v)).abs() < 1e-12, || format!("trial {trial}: wrap_angle({v}) disagrees"))?;
        }
        let u = unwrap_angles(&wrapped);
        let turns = ((u[0] - x[0]) / (2.0 * PI)).round();
        for (i, (&a, &b)) in u.iter().zip(&x).enumerate() {
            let err = (a - b - 2.0 * PI * turns).abs();
            worst = worst.max(err);
            ensure(err < 1e-9, || format!("trial {trial}, sample {i}: off by {err:e} after a {turns} turn offset"))?;
        }
    }
    Ok(format!("{trials} trials, worst deviation {worst:.1e} rad"))
}

// Clutter filter and FFT

fn static_profiles(spec: &RadarSpec) -> Result<RangeProfileCube, String> {
    let scene = SceneSpec {
        respiration_amplitude: 0.0,
        cardiac_amplitude: 0.0,
        clutter_amplitude: 5.0,
        reflectivity: 2.0,
        duration: 20.0,
        rng_seed: 5,
        ..SceneSpec::default()
    };
    match spec.kind {
        radar_vitals_core::simkit::RadarKind::Fmcw => {
            range_fft(&simulate_fmcw(&scene, spec).map_err(fail)?, FastTimeWindow::Rectangular).map_err(fail)
        }
        radar_vitals_core::simkit::RadarKind::IrUwb => simulate_uwb(&scene, spec).map_err(fail),
    }
}

fn energy(values: &[Complex]) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum()
}

pub fn clutter_and_linearity() -> Outcome {
    let mut notes = Vec::new();
    for spec in [RadarSpec::fmcw(), RadarSpec::uwb()] {
        let cube = static_profiles(&spec)?;
        let filtered = clutter_filter(&cube.values);
        let ratio = energy(filtered.as_slice()) / energy(cube.values.as_slice());
        ensure(ratio <= 1e-20, || format!("{:?} static residual {ratio:e}", spec.kind))?;
        notes.push(format!("{:?} static residual {ratio:.1e}", spec.kind));
    }

    let mut rng = seeded(4, 0);
    for trial in 0..20 {
        let (rows, antennas, time) = (rng.random_range(1..6), rng.random_range(1..4), rng.random_range(2..400));
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let data = complex_noise(&mut rng, rows * antennas * time)
            .into_iter()
            .map(|v| v * scale + Complex::new(7.0 * scale, -3.0 * scale))
            .collect();
        let cube = Cube3::from_vec(rows, antennas, time, data).map_err(fail)?;
        let once = clutter_filter(&cube);
        ensure(clutter_filter(&once) == once, || format!("trial {trial}: second pass changed the cube"))?;
    }
    notes.push("idempotent on 20 random cubes".into());

    let mut worst = 0.0f64;
    for n in [256usize, 129, 1800, 52, 1000] {
        let x = complex_noise(&mut rng, n);
        let mut y = x.clone();
        FftPlan::new(n).process(&mut y);
        let rel = (energy(&y) / n as f64 - energy(&x)).abs() / energy(&x);
        worst = worst.max(rel);
        ensure(rel < 1e-9, || format!("Parseval off by {rel:e} at N = {n}"))?;
        let reference = oracle::dft(&x);
        let err = y.iter().zip(&reference).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / energy(&reference);
        ensure(err.sqrt() < 1e-9, || format!("FFT differs from the direct DFT by {:e} at N = {n}", err.sqrt()))?;
    }
    notes.push(format!("Parseval worst {worst:.1e}"));

    let spec = RadarSpec::fmcw();
    let chirps = |seed: u64, amp: f64| {
        let scene = SceneSpec {
            rng_seed: seed,
            noise_std: 0.5,
            clutter_amplitude: amp,
            duration: 2.0,
            ..SceneSpec::default()
        };
        simulate_fmcw(&scene, &spec)
    };
    let a = chirps(1, 1.0).map_err(fail)?;
    let b = chirps(2, 3.0).map_err(fail)?;
    let (p, q) = (0.7, -1.9);
    let mut mix = a.clone();
    for (m, (x, y)) in mix.values.as_mut_slice().iter_mut().zip(a.values.as_slice().iter().zip(b.values.as_slice())) {
        *m = p * x + q * y;
    }
    let fa = range_fft(&a, FastTimeWindow::Hann).map_err(fail)?;
    let fb = range_fft(&b, FastTimeWindow::Hann).map_err(fail)?;
    let fm = range_fft(&mix, FastTimeWindow::Hann).map_err(fail)?;
    let expect: Vec<Complex> = fa
        .values
        .as_slice()
        .iter()
        .zip(fb.values.as_slice())
        .map(|(x, y)| x * p + y * q)
        .collect();
    let err: f64 = fm.values.as_slice().iter().zip(&expect).map(|(x, y)| (x - y).norm_sqr()).sum();
    let rel = (err / energy(&expect)).sqrt();
    ensure(rel < 1e-9, || format!("range FFT is not linear: {rel:e}"))?;
    notes.push(format!("range FFT linearity {rel:.1e}"));
    Ok(notes.join("; "))
}

// Savitzky-Golay trend removal

const SG_RATE: f64 = 30.0;

/// Residual amplitude of a unit sinusoid after trend removal, measured on
/// samples whose window does not reach either edge.
pub fn measured_residual_gain(freq: f64) -> Result<f64, String> {
    let n = 1800;
    let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * freq * i as f64 / SG_RATE + 0.3).cos()).collect();
    let y = adaptive_respiration_filter(&x, 3, 45).map_err(fail)?;
    Ok(oracle::fitted_amplitude(&y[45..n - 45], freq, SG_RATE, 45))
}

pub fn savgol_response() -> Outcome {
    let coeffs = savgol_coefficients(45, 3).map_err(fail)?;
    let closed = oracle::savgol_cubic_weights(22);
    let coeff_err = coeffs.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(coeff_err < 1e-12, || format!("weights differ from the closed form by {coeff_err:e}"))?;
    let mut notes = Vec::new();
    for f in [0.25, 0.5, 1.2] {
        let want = 20.0 * oracle::savgol_residual_gain(&closed, f, SG_RATE).log10();
        let got = 20.0 * measured_residual_gain(f)?.log10();
        let reported = 20.0 * residual_response(&coeffs, f, SG_RATE).log10();
        ensure((got - want).abs() <= 1.0 && (reported - want).abs() <= 1.0, || {
            format!("{f} Hz: measured {got:.2} dB, reported {reported:.2} dB, oracle {want:.2} dB")
        })?;
        notes.push(format!("{f} Hz {got:.2}/{want:.2} dB"));
    }

    let n = 1800;
    let mut rng = seeded(8, 0);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let u = (i as f64 - n as f64 / 2.0) / (n as f64 / 2.0);
                c[0] + c[1] * u + c[2] * u * u + c[3] * u * u * u
            })
            .collect();
        let r = adaptive_respiration_filter(&x, 3, 45).map_err(fail)?;
        let inner = &r[22..n - 22];
        let rms = (inner.iter().map(|v| v * v).sum::<f64>() / inner.len() as f64).sqrt();
        worst = worst.max(rms);
    }
    ensure(worst <= 1e-9, || format!("cubic residual RMS {worst:e}"))?;
    notes.push(format!("cubic residual {worst:.1e}"));
    Ok(notes.join("; "))
}

// CFAR

pub fn cfar_scale_invariance(cubes: usize) -> Outcome {
    let cfg = CfarConfig::default();
    let mut rng = seeded(12, 0);
    let mut detections = 0;
    for trial in 0..cubes {
        let (bins, antennas, time) = (rng.random_range(20..90), rng.random_range(1..4), rng.random_range(4..64));
        let mut data = complex_noise(&mut rng, bins * antennas * time);
        if rng.random_bool(0.7) {
            let target = rng.random_range(0..bins);
            let gain = rng.random_range(0.5..4.0);
            for a in 0..antennas {
                for t in 0..time {
                    data[(target * antennas + a) * time + t] += Complex::from_polar(gain, t as f64 * 0.3);
                }
            }
        }
        let cube = profile_cube(Cube3::from_vec(bins, antennas, time, data).map_err(fail)?, RadarSpec::fmcw());
        let base = detect(&cube, &cfg).map_err(fail)?;
        detections += usize::from(base.detected);
        let scale = 10f64.powf(rng.random_range(-6.0..6.0));
        let mut scaled = cube.clone();
        scaled.values.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
        let other = detect(&scaled, &cfg).map_err(fail)?;
        ensure((base.detected, base.bin_index) == (other.detected, other.bin_index), || {
            format!(
                "cube {trial}: ({}, {}) became ({}, {}) at scale {scale:e}",
                base.detected, base.bin_index, other.detected, other.bin_index
            )
        })?;
    }
    Ok(format!("{cubes} cubes unchanged under scaling, {detections} with detections"))
}

pub const FALSE_ALARM_BINS: usize = 64;

/// Per-cell and per-segment false-alarm rates of the detector on
/// single-sample complex Gaussian noise.
pub fn implementation_false_alarms(trials: usize, cfg: &CfarConfig, seed: u64) -> Result<(f64, f64), String> {
    let mut rng = seeded(seed, 0);
    let (mut cells, mut segments) = (0usize, 0usize);
    for _ in 0..trials {
        let data = complex_noise(&mut rng, FALSE_ALARM_BINS);
        let cube = profile_cube(Cube3::from_vec(FALSE_ALARM_BINS, 1, 1, data).map_err(fail)?, RadarSpec::fmcw());
        let hits = cfar_detections(&bin_powers(&cube), cfg).len();
        cells += hits;
        segments += usize::from(detect(&cube, cfg).map_err(fail)?.detected);
    }
    Ok((
        cells as f64 / (trials * FALSE_ALARM_BINS) as f64,
        segments as f64 / trials as f64,
    ))
}

pub fn cfar_false_alarms(trials: usize) -> Outcome {
    let cfg = CfarConfig::default();
    let (cell, segment) = implementation_false_alarms(trials, &cfg, 21)?;
    let (oracle_cell, oracle_segment) = oracle::cfar_false_alarms(trials, FALSE_ALARM_BINS, &cfg, 99);
    let interior = oracle::cfar_interior_closed_form(&cfg);
    let close = |a: f64, b: f64| (a / b - 1.0).abs() <= 0.2;
    ensure(close(cell, oracle_cell) && close(segment, oracle_segment), || {
        format!("per-cell {cell:.4} vs oracle {oracle_cell:.4}; per-segment {segment:.4} vs oracle {oracle_segment:.4}")
    })?;
    Ok(format!(
        "per-cell {cell:.4} (oracle {oracle_cell:.4}, interior closed form {interior:.4}), \
         per-segment {segment:.4} (oracle {oracle_segment:.4}) over {trials} trials"
    ))
}

// Gradients

pub const GRAD_STEP: f64 = 1e-5;
/// Gradients smaller than this are compared in absolute terms.
pub const GRAD_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_FLOOR)
}

fn random_tensor(rng: &mut Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.sample(StandardNormal)).collect()).expect("shape")
}

/// Fixed quadratic head so any op output becomes a scalar loss.
fn l2_head(g: &mut Graph, y: Var) -> Var {
    let n = g.value(y).len();
    let target: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    let weights: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (i % 3) as f64).collect();
    g.loss(y, &target, &weights, LossKind::L2).expect("loss")
}

/// Largest relative error between backprop and central differences over
/// every element of every input of `build`.
pub fn gradient_error<F>(inputs: &[Tensor], build: F) -> f64
where
    F: Fn(&mut Graph, &[Var]) -> Var,
{
    let eval = |values: &[Tensor]| -> f64 {
        let mut g = Graph::new();
        let vars: Vec<Var> = values.iter().map(|t| g.param(t.clone())).collect();
        let loss = build(&mut g, &vars);
        g.value(loss).data[0]
    };
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.param(t.clone())).collect();
    let loss = build(&mut g, &vars);
    g.backward(loss).expect("backward");
    let mut worst = 0.0f64;
    for (k, input) in inputs.iter().enumerate() {
        let analytic = g.grad(vars[k]).map_or_else(|| vec![0.0; input.len()], <[f64]>::to_vec);
        for i in 0..input.len() {
            let mut plus = inputs.to_vec();
            plus[k].data[i] += GRAD_STEP;
            let mut minus = inputs.to_vec();
            minus[k].data[i] -= GRAD_STEP;
            let numeric = (eval(&plus) - eval(&minus)) / (2.0 * GRAD_STEP);
            worst = worst.max(relative_error(analytic[i], numeric));
        }
    }
    worst
}

/// Per-op gradient errors, by op name.
pub fn op_gradient_errors() -> Vec<(&'static str, f64)> {
    let mut rng = seeded(31, 0);
    let mut out = Vec::new();
    for (name, stride) in [("conv2d", [1, 1]), ("conv2d strided", [2, 1]), ("conv2d 1d", [2, 2])] {
        let x = random_tensor(&mut rng, &[2, 2, 5, 4]);
        let w = random_tensor(&mut rng, &[3, 2, 3, if name == "conv2d 1d" { 1 } else { 3 }]);
        out.push((
            name,
            gradient_error(&[x, w], |g, v| {
                let y = g.conv2d(v[0], v[1], stride).expect("conv");
                l2_head(g, y)
            }),
        ));
    }
    let x = random_tensor(&mut rng, &[3, 2, 3, 2]);
    let gamma = random_tensor(&mut rng, &[2]);
    let beta = random_tensor(&mut rng, &[2]);
    out.push((
        "batch_norm train",
        gradient_error(&[x.clone(), gamma.clone(), beta.clone()], |g, v| {
            let (mut mean, mut var) = (vec![0.0; 2], vec![1.0; 2]);
            let stats = NormStats::Train {
                running_mean: &mut mean,
                running_var: &mut var,
                momentum: 0.9,
                eps: 1e-5,
            };
            let y = g.batch_norm(v[0], v[1], v[2], stats).expect("bn");
            l2_head(g, y)
        }),
    ));
    out.push((
        "batch_norm eval",
        gradient_error(&[x, gamma, beta], |g, v| {
            let stats = NormStats::Eval {
                running_mean: &[0.3, -0.2],
                running_var: &[1.7, 0.4],
                eps: 1e-5,
            };
            let y = g.batch_norm(v[0], v[1], v[2], stats).expect("bn");
            l2_head(g, y)
        }),
    ));
    // Keep inputs away from the kink so the finite difference never straddles it.
    let mut x = random_tensor(&mut rng, &[4, 5]);
    x.data.iter_mut().for_each(|v| *v += 0.05f64.copysign(*v));
    out.push((
        "relu",
        gradient_error(&[x], |g, v| {
            let y = g.relu(v[0]);
            l2_head(g, y)
        }),
    ));
    let a = random_tensor(&mut rng, &[3, 4]);
    let b = random_tensor(&mut rng, &[3, 4]);
    out.push((
        "add",
        gradient_error(&[a.clone(), b], |g, v| {
            let y = g.add(v[0], v[1]).expect("add");
            l2_head(g, y)
        }),
    ));
    out.push((
        "add (shared input)",
        gradient_error(&[a], |g, v| {
            let y = g.add(v[0], v[0]).expect("add");
            l2_head(g, y)
        }),
    ));
    let x = random_tensor(&mut rng, &[2, 3, 4, 2]);
    for (name, axis) in [("mean axis 1", 1), ("mean axis 2", 2), ("mean axis 3", 3)] {
        out.push((
            name,
            gradient_error(std::slice::from_ref(&x), |g, v| {
                let y = g.mean_axis(v[0], axis).expect("mean");
                l2_head(g, y)
            }),
        ));
    }
    out.push((
        "reshape",
        gradient_error(&[x], |g, v| {
            let y = g.reshape(v[0], &[6, 8]).expect("reshape");
            l2_head(g, y)
        }),
    ));
    let x = random_tensor(&mut rng, &[3, 4]);
    let w = random_tensor(&mut rng, &[2, 4]);
    let b = random_tensor(&mut rng, &[2]);
    out.push((
        "linear",
        gradient_error(&[x, w, b], |g, v| {
            let y = g.linear(v[0], v[1], v[2]).expect("linear");
            l2_head(g, y)
        }),
    ));
    let p = random_tensor(&mut rng, &[6]);
    for (name, kind) in [("loss l1", LossKind::L1), ("loss l2", LossKind::L2)] {
        out.push((
            name,
            gradient_error(std::slice::from_ref(&p), |g, v| {
                // Targets sit well away from the predictions so L1 stays differentiable.
                let target: Vec<f64> = (0..6).map(|i| if i % 2 == 0 { 5.0 } else { -5.0 }).collect();
                g.loss(v[0], &target, &[1.0, 2.0, 0.5, 1.0, 3.0, 1.0], kind).expect("loss")
            }),
        ));
    }
    out
}

/// A narrow instance of the full topology, cheap enough to difference every
/// parameter tensor.
pub fn gradient_check_spec() -> ModelSpec {
    ModelSpec {
        stem2d_filters: 3,
        stages2d: vec![StageSpec::new(1, 3, 2), StageSpec::new(1, 4, 2)],
        stem1d_filters: 4,
        stages1d: vec![
            StageSpec::new(1, 4, 2),
            StageSpec::new(2, 5, 2),
            StageSpec::new(1, 5, 2),
            StageSpec::new(1, 6, 2),
        ],
        ..ModelSpec::desk()
    }
}

/// Backprop vs central differences through the whole network at T=64, S=4.
/// `per_tensor` coordinates are drawn from each parameter tensor; `None`
/// checks all of them.
pub fn model_gradient_error(spec: ModelSpec, per_tensor: Option<usize>) -> Result<(f64, usize), String> {
    let (n, t, s) = (4, 64, 4);
    let mut rng = seeded(41, 0);
    let input = random_tensor(&mut rng, &[n, 1, t, s]);
    let target: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut model = Model::new(spec, 5).map_err(fail)?;
    let loss_of = |model: &mut Model| -> Result<(Graph, Var, Vec<Var>), String> {
        let mut g = Graph::new();
        let x = g.input(input.clone());
        let pass = model.forward(&mut g, x, true).map_err(fail)?;
        let loss = g.loss(pass.output, &target, &[], LossKind::L2).map_err(fail)?;
        Ok((g, loss, pass.params))
    };
    let (mut g, loss, params) = loss_of(&mut model)?;
    g.backward(loss).map_err(fail)?;
    let analytic: Vec<Vec<f64>> = params
        .iter()
        .zip(&model.store.params)
        .map(|(&v, p)| g.grad(v).map_or_else(|| vec![0.0; p.value.len()], <[f64]>::to_vec))
        .collect();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for k in 0..model.store.params.len() {
        let len = model.store.params[k].value.len();
        let picks: Vec<usize> = match per_tensor {
            Some(m) if m < len => (0..m).map(|_| rng.random_range(0..len)).collect(),
            _ => (0..len).collect(),
        };
        for i in picks {
            let orig = model.store.params[k].value[i];
            model.store.params[k].value[i] = orig + GRAD_STEP;
            let (g, l, _) = loss_of(&mut model)?;
            let up = g.value(l).data[0];
            model.store.params[k].value[i] = orig - GRAD_STEP;
            let (g, l, _) = loss_of(&mut model)?;
            let down = g.value(l).data[0];
            model.store.params[k].value[i] = orig;
            let numeric = (up - down) / (2.0 * GRAD_STEP);
            worst = worst.max(relative_error(analytic[k][i], numeric));
            checked += 1;
        }
    }
    Ok((worst, checked))
}

pub fn gradient_checks() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (name, err) in op_gradient_errors() {
        ensure(err < 1e-4, || format!("{name}: relative error {err:e}"))?;
        notes.push(format!("{name} {err:.1e}"));
    }
    let (err, checked) = model_gradient_error(gradient_check_spec(), None)?;
    ensure(err < 1e-4, || format!("full model: relative error {err:e} over {checked} parameters"))?;
    notes.push(format!("full model {err:.1e} over all {checked} parameters"));
    within_budget(start, Duration::from_secs(60), "gradient checks")?;
    Ok(format!("{} in {:.1?}", notes.join(", "), start.elapsed()))
}

// Shapes

pub fn shape_contract() -> Outcome {
    let spec = ModelSpec::paper();
    let (after, end) = spec.output_extents(1800, 192);
    ensure(after == [225, 24] && end == 8, || format!("declared extents {after:?} then {end}"))?;
    let mut model = Model::new(spec, 0).map_err(fail)?;
    let count = model.parameter_count();
    let mut g = Graph::new();
    let x = g.input(Tensor::zeros(&[1, 1, 1800, 192]));
    let pass = model.forward(&mut g, x, false).map_err(fail)?;
    let shape2d = g.value(pass.after_2d).shape.clone();
    let embed = g.value(pass.embedding).shape.clone();
    ensure(shape2d == [1, 128, 225, 24], || format!("2D section output {shape2d:?}"))?;
    ensure(embed == [1, 1024], || format!("embedding {embed:?}"))?;
    ensure((count as f64 / 16.0e6 - 1.0).abs() <= 0.2, || format!("{count} parameters"))?;
    Ok(format!(
        "2D output 225x24x128, embedding 1024, {:.2}M parameters",
        count as f64 / 1e6
    ))
}

// Metrics

pub fn metrics_oracles() -> Outcome {
    let mut rng = seeded(51, 0);
    let mut notes = Vec::new();
    for fixture in 0..5 {
        let n = 10 + 17 * fixture;
        let truth: Vec<f64> = (0..n).map(|_| rng.random_range(45.0..100.0)).collect();
        let pred: Vec<f64> = truth.iter().map(|t| t + rng.random_range(-6.0..8.0)).collect();
        let ba = bland_altman(&pred, &truth).map_err(fail)?;
        let [bias, sd, lo, hi] = oracle::bland_altman(&pred, &truth);
        let err = [ba.bias - bias, ba.sd - sd, ba.loa_low - lo, ba.loa_high - hi]
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()));
        ensure(err <= 1e-9, || format!("fixture {fixture}: Bland–Altman off by {err:e}"))?;
        let errors: Vec<f64> = pred.iter().zip(&truth).map(|(p, t)| (p - t).abs()).collect();
        let cfg = BootstrapConfig {
            replicates: 500,
            level: 0.95,
            seed: fixture as u64,
        };
        let ci = bootstrap_ci(&errors, &cfg).map_err(fail)?;
        let want = oracle::bootstrap_ci(&errors, cfg.replicates, cfg.level, cfg.seed);
        let err = (ci[0] - want[0]).abs().max((ci[1] - want[1]).abs());
        ensure(err <= 1e-9, || format!("fixture {fixture}: bootstrap {ci:?} vs brute force {want:?}"))?;
    }
    notes.push("5 fixtures match brute force".to_string());

    let ba = bland_altman(&[61.0, 59.0], &[60.0, 60.0]).map_err(fail)?;
    ensure(
        ba.bias.abs() < 1e-12 && (ba.sd - 2f64.sqrt()).abs() < 1e-12 && (ba.loa_high - 2.772).abs() < 5e-4,
        || format!("two-point fixture gave {ba:?}"),
    )?;

    let coverage = bootstrap_coverage(200)?;
    ensure((0.91..=0.99).contains(&coverage), || format!("bootstrap coverage {coverage:.3}"))?;
    notes.push(format!("coverage {:.1}% over 200 meta-trials", coverage * 100.0));
    Ok(notes.join("; "))
}

/// Fraction of 95% intervals covering the true mean absolute error of a
/// known error law, `|N(0, 3²)|`.
pub fn bootstrap_coverage(meta_trials: usize) -> Result<f64, String> {
    let sigma = 3.0;
    let true_mae = sigma * (2.0 / PI).sqrt();
    let normal = Normal::new(0.0, sigma).map_err(fail)?;
    let mut rng = seeded(61, 0);
    let mut covered = 0;
    for trial in 0..meta_trials {
        let errors: Vec<f64> = (0..80).map(|_| normal.sample(&mut rng).abs()).collect();
        let cfg = BootstrapConfig {
            replicates: 1000,
            level: 0.95,
            seed: 1000 * trial as u64,
        };
        let [lo, hi] = bootstrap_ci(&errors, &cfg).map_err(fail)?;
        covered += usize::from(lo <= true_mae && true_mae <= hi);
    }
    Ok(covered as f64 / meta_trials as f64)
}

// Augmentations

fn tensor(rng: &mut Rng, time: usize, width: usize) -> FeatureTensor {
    FeatureTensor {
        time,
        width,
        values: (0..time * width).map(|_| rng.random_range(0.0..1.0)).collect(),
        label_hr: 70.0,
    }
}

pub fn augmentations() -> Outcome {
    let mut rng = seeded(71, 0);
    let mut notes = Vec::new();
    for _ in 0..20 {
        let width = 2 * rng.random_range(1..8);
        let x = tensor(&mut rng, 50, width);
        let mut y = x.clone();
        ensure(augment_feature_swap(&mut y, FeatureSwap::Always, &mut rng).map_err(fail)?, || {
            "swap did not fire".into()
        })?;
        ensure(y != x && y.get(3, 0) == x.get(3, 1) && y.get(3, 1) == x.get(3, 0), || {
            "swap did not exchange the pair".into()
        })?;
        augment_feature_swap(&mut y, FeatureSwap::Always, &mut rng).map_err(fail)?;
        ensure(y == x, || "swap is not an involution".into())?;
    }
    notes.push("swap involution exact".into());

    for p in [0.6, 0.7] {
        let trials = 10_000;
        let noise = GaussianNoise::new(p);
        let mut fired = 0;
        let mut x = tensor(&mut rng, 1, 2);
        for _ in 0..trials {
            fired += usize::from(augment_gaussian(&mut x, &noise, &mut rng));
        }
        let expected = p * trials as f64;
        // ±150 at p = 0.7 is 3.27 binomial standard deviations; the same width at p = 0.6.
        let tolerance = 3.27 * (trials as f64 * p * (1.0 - p)).sqrt();
        ensure((fired as f64 - expected).abs() <= tolerance, || {
            format!("p = {p}: fired {fired} of {trials}, expected {expected} ± {tolerance:.0}")
        })?;
        notes.push(format!("p = {p}: {fired}/{trials}"));
    }

    let noise = GaussianNoise {
        std: 5e-4,
        probability: 1.0,
    };
    let mut x = FeatureTensor {
        time: 1000,
        width: 1000,
        values: vec![0.0; 1_000_000],
        label_hr: 70.0,
    };
    augment_gaussian(&mut x, &noise, &mut rng);
    let n = x.values.len() as f64;
    let mean = x.values.iter().sum::<f64>() / n;
    let var = x.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    ensure((var / 2.5e-7 - 1.0).abs() <= 0.05, || format!("noise variance {var:e}"))?;
    notes.push(format!("noise variance {var:.3e}"));

    let rate = 30.0;
    let time = 1800;
    let raw = RawFeatures {
        rows: 1,
        time,
        values: (0..time).map(|i| (2.0 * PI * 1.2 * i as f64 / rate).cos()).collect(),
        label_hr: 72.0,
    };
    let fast = accelerate(&raw, 1.2);
    let resolution = rate / time as f64;
    let peak = argmax_from(&magnitude_spectrum(fast.row(0)), 1).unwrap_or(0) as f64 * resolution;
    ensure((peak - 1.44).abs() <= resolution + 1e-12, || format!("accelerated peak at {peak:.4} Hz"))?;
    notes.push(format!("1.2 Hz -> {peak:.4} Hz"));

    let fixed = |m: f64| HrAccelerate {
        min: m,
        max: m,
        probability: 1.0,
        hr_floor: 70.0,
    };
    let up = Upweight::default();
    let (a, wa) = augment_hr_accelerate(&raw, Some(&fixed(1.2)), Some(&up), &mut rng);
    let b_raw = RawFeatures { label_hr: 80.0, ..raw.clone() };
    let (b, wb) = augment_hr_accelerate(&b_raw, Some(&fixed(1.15)), Some(&up), &mut rng);
    ensure(a.label_hr == 72.0 * 1.2 && wa == 1.0, || format!("72 bpm x 1.2 -> {} (weight {wa})", a.label_hr))?;
    ensure(b.label_hr == 80.0 * 1.15 && (b.label_hr - 92.0).abs() < 1e-9 && wb == 1.5, || {
        format!("80 bpm x 1.15 -> {} (weight {wb})", b.label_hr)
    })?;
    notes.push("labels 86.4 (w 1), 92 (w 1.5)".into());
    Ok(notes.join("; "))
}
