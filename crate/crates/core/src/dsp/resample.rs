use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::cube::{Cube3, RangeProfileCube};
use crate::{Complex, Error, Result};

/// Converts a `rate_in` series to `rate_out` by averaging over exact output
/// windows. Input sample `i` spans `[i, i+1)` in input units; output sample
/// `j` spans `[j·r, (j+1)·r)` with `r = rate_in / rate_out`, and input samples
/// straddling a boundary contribute in proportion to their overlap.
pub fn downsample_average(series: &[Complex], rate_in: f64, rate_out: f64) -> Vec<Complex> {
    let ratio = rate_in / rate_out;
    let out_len = (series.len() as f64 / ratio + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(out_len);
    for j in 0..out_len {
        let lo = j as f64 * ratio;
        let hi = lo + ratio;
        let first = lo.floor() as usize;
        let last = (hi.ceil() as usize).min(series.len());
        let mut acc = Complex::new(0.0, 0.0);
        for (i, &v) in series.iter().enumerate().take(last).skip(first) {
            let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
            acc += v * overlap;
        }
        out.push(acc / ratio);
    }
    out
}

/// Averages a raw IR-UWB cube down to the preprocessing rate (30 Hz).
pub fn downsample_uwb(cube: &RangeProfileCube) -> Result<RangeProfileCube> {
    let rate_in = cube.slow_time_rate;
    let rate_out = cube.spec.slow_time_rate;
    if !(rate_in >= rate_out && rate_out > 0.0) {
        return Err(Error::param("slow_time_rate", "input rate must exceed output rate"));
    }
    let (bins, antennas) = (cube.bins(), cube.antennas());
    let out_len = (cube.time() as f64 * rate_out / rate_in + 1e-9).floor() as usize;
    let mut data = Vec::with_capacity(bins * antennas * out_len);
    for b in 0..bins {
        for a in 0..antennas {
            data.extend(downsample_average(cube.values.series(b, a), rate_in, rate_out));
        }
    }
    let truth_hr = if cube.truth_hr.is_empty() {
        Vec::new()
    } else {
        let as_complex: Vec<Complex> = cube.truth_hr.iter().map(|&h| Complex::new(h, 0.0)).collect();
        downsample_average(&as_complex, rate_in, rate_out)
            .into_iter()
            .map(|c| c.re)
            .collect()
    };
    Ok(RangeProfileCube {
        values: Cube3::from_vec(bins, antennas, out_len, data)?,
        slow_time_rate: rate_out,
        spec: cube.spec,
        truth_hr,
        start_time: cube.start_time,
    })
}
