//! Contactless heart-rate estimation from FMCW and IR-UWB radar.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the algorithmic half of
//! the pipeline:
//!
//! - [`simkit`]: synthetic chest-micromotion scenes rendered as FMCW chirp cubes
//!   or IR-UWB range profiles, with exact heart-rate labels.
//! - [`dsp`]: chirp averaging, segmentation, clutter removal, range FFT and
//!   UWB rate conversion.
//! - [`presence`]: cell-averaging CFAR selection of the occupied range bin.
//! - [`featurize`]: magnitude / unwrapped-phase features, high-pass and
//!   Savitzky–Golay respiration removal, the `T × S × 1` model input.
//! - [`nn`]: a small reverse-mode autograd, the 2D+1D ResNet, AdamW.
//! - [`train`]: augmentations, training regimes and the ablation harness.
//! - [`metrics`]: MAE/MAPE, bootstrap intervals, Bland–Altman, subgroups.
//!
//! File formats, the dataset layout and the command line live in the
//! `radar-vitals` companion crate.
//!
//! # Features
//!
//! - `std`: lets dependencies use the standard library (runtime SIMD
//!   detection in the matrix kernels, platform math).
//! - `serde`: `Serialize`/`Deserialize` on configuration and report types.

#![no_std]

extern crate alloc;

// Modules import `num_traits::Float` for libm-backed math under `no_std`.
// When any crate in the build links std, the inherent f64 methods win and the
// import goes unused, hence the per-module `allow(unused_imports)`.

pub mod dsp;
mod error;
pub mod featurize;
pub mod fft;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod presence;
pub mod rng;
pub mod simkit;
pub mod train;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Complex sample type used for range profiles.
pub type Complex = num_complex::Complex<f64>;
