use alloc::vec::Vec;

use crate::{Error, Result};

/// Mean over the chirps of one burst.
///
/// `burst[c]` is chirp `c`; all chirps must have the same length.
pub fn average_chirps(burst: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = burst
        .first()
        .ok_or_else(|| Error::TooShort("burst has no chirps".into()))?;
    let n = first.len();
    if burst.iter().any(|c| c.len() != n) {
        return Err(Error::Shape("chirps of unequal length".into()));
    }
    let mut out = alloc::vec![0.0; n];
    for chirp in burst {
        for (o, v) in out.iter_mut().zip(chirp) {
            *o += v;
        }
    }
    let scale = 1.0 / burst.len() as f64;
    out.iter_mut().for_each(|o| *o *= scale);
    Ok(out)
}
