//! Counter-based random stream derivation.
//!
//! Every random decision in the crate draws from a stream that is a pure
//! function of `(master seed, stream a, stream b)`. Distinct triples yield
//! independent streams, so work can be sharded or reordered freely without
//! changing any output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer; full-period bijective mixer on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const TAG_A: u64 = 0xa076_1d64_78bd_642f;
const TAG_B: u64 = 0xe703_7ed1_a0b4_28db;

/// Derives a deterministic random stream from `(seed, a, b)`.
///
/// For token-level noise decisions, `a` is the segment index and `b` the
/// token index. Other call sites use fixed domain tags for `a` so their
/// streams never collide with noise streams.
pub fn derive_rng(seed: u64, a: u64, b: u64) -> ChaCha12Rng {
    let mut x = mix64(seed ^ GOLDEN);
    x = mix64(x ^ mix64(a.wrapping_add(TAG_A)));
    x = mix64(x ^ mix64(b.wrapping_add(TAG_B)));

    let mut key = [0u8; 32];
    let mut acc = x;
    for chunk in key.chunks_exact_mut(8) {
        acc = acc.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&mix64(acc).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Folds a tag into a seed, producing the seed for a derived experiment
/// stage (e.g. one rung of a noise ladder).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(mix64(seed ^ GOLDEN) ^ mix64(tag.wrapping_add(TAG_A)))
}

/// Stream tag for corpus subsampling draws.
pub const DOMAIN_SUBSAMPLE: u64 = 0x5348_5546_464c_4531;
