//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator derived from
//! a user seed plus a stream id, so independent consumers (clutter, noise,
//! drift, batch sampling, ...) never share a sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Named stream ids. Values are part of the reproducibility contract.
pub mod stream {
    pub const DRIFT: u64 = 1;
    pub const CLUTTER: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const ANTENNA: u64 = 4;
    pub const INIT: u64 = 10;
    pub const BATCH: u64 = 11;
    pub const AUGMENT: u64 = 12;
    pub const BOOTSTRAP: u64 = 20;
    pub const SCENES: u64 = 30;
}

/// Generator for `seed` on stream `stream`.
pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// 64-bit FNV-1a, used for configuration fingerprints and parameter checksums.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv1a {
    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    pub fn write_f64(&mut self, v: f64) {
        self.write(&v.to_bits().to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}
