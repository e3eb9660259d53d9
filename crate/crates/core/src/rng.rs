//! Seeded randomness helpers.
//!
//! Every stochastic step in the crate (weight init, batch shuffling, dropout,
//! random splits) draws from a ChaCha8 stream through these helpers, so a
//! fixed seed yields bit-identical results on every platform. The float and
//! index conversions are written out here instead of taken from a
//! distributions crate to keep the value stream pinned.

use rand_core::{RngCore, SeedableRng};

pub use rand_chacha::ChaCha8Rng;

/// A fresh deterministic generator for the given seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from `[0, 1)` with 53 bits of precision.
pub fn uniform_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw from `[lo, hi)`.
pub fn uniform_range(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + uniform_f64(rng) * (hi - lo)
}

/// Uniform index in `[0, n)`. `n` must be nonzero.
///
/// Plain reduction; the bias of `2^64 mod n` is far below anything the
/// crate's sample counts could detect.
pub fn uniform_index(rng: &mut impl RngCore, n: usize) -> usize {
    debug_assert!(n > 0);
    (rng.next_u64() % n as u64) as usize
}

/// In-place Fisher–Yates shuffle.
pub fn shuffle<T>(rng: &mut impl RngCore, xs: &mut [T]) {
    for i in (1..xs.len()).rev() {
        let j = uniform_index(rng, i + 1);
        xs.swap(i, j);
    }
}
