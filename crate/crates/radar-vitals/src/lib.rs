//! File formats, datasets, checkpoints and the command line for the radar
//! heart-rate pipeline. The algorithms live in [`radar_vitals_core`].
//!
//! - [`rvds`]: the binary tensor container.
//! - [`manifest`]: JSON descriptions of segment datasets and feature stores.
//! - [`dataset`]: synthetic dataset generation and preprocessing.
//! - [`checkpoint`]: model state on disk.
//! - [`config`]: preset-relative JSON configuration.
//! - [`report`]: evaluation and ablation outputs.
//! - [`cli`]: the `radar-vitals` binary.
//!
//! Work is spread over rayon's global pool; set `RADAR_VITALS_THREADS` to
//! cap it. Outputs do not depend on the thread count.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod dataset;
mod error;
pub mod json;
pub mod manifest;
pub mod report;
pub mod rvds;

pub use error::{Error, Result};
pub use radar_vitals_core as core;
