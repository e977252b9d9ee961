//! Radar front-end processing: burst averaging, segmentation, clutter
//! removal, range FFT and IR-UWB rate conversion.
//!
//! Cubes are stored `[range (or fast time)][antenna][slow time]`, row-major,
//! so every per-bin time series is contiguous.

mod chirp;
mod clutter;
mod cube;
mod range;
mod resample;
mod segment;

pub use chirp::average_chirps;
pub use clutter::{clutter_filter, clutter_filter_in_place, ClutterSample};
pub use cube::{ChirpCube, Cube3, RangeProfileCube};
pub use range::{range_fft, FastTimeWindow};
pub use resample::{downsample_average, downsample_uwb};
pub use segment::{
    fmcw_segments, segment_starts, segment_stream, uwb_segments, Segment, SEGMENT_SECONDS,
    STEP_SECONDS,
};
