//! Seeded randomness.
//!
//! The engine draws from ChaCha8 keyed by the excerpt seed. Every
//! (bar, stream) pair selects its own ChaCha stream starting at word 0, so a
//! bar can be re-rendered in isolation and adding draws to one track never
//! shifts the numbers another track sees.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One documented stream per track and bar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Stream {
    Harmony = 0,
    Percussion = 1,
    Bass = 2,
    Strummed = 3,
    Plucked = 4,
    Melody = 5,
}

/// Generator for `stream` in `bar` of the excerpt keyed by `seed`.
pub fn bar_rng(seed: u64, bar: u32, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((bar as u64) << 8) | stream as u64);
    rng.set_word_pos(0);
    rng
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..n`. `n` must be non-zero.
pub fn index<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.random_range(0..n)
}

/// Samples an index proportionally to `weights` with a single uniform draw.
///
/// Returns `None` when the weights are empty or sum to zero.
pub fn weighted<R: RngCore + ?Sized>(rng: &mut R, weights: &[f64]) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || total <= 0.0 || total.is_nan() {
        return None;
    }
    let target = unit(rng) * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return Some(i);
        }
    }
    // rounding can leave target == total; fall back to the last positive weight
    weights.iter().rposition(|&w| w > 0.0)
}
