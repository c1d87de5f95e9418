//! Seed derivation and the generator behind every random choice.
//!
//! All randomness flows from a master seed through [`derive_seed`], which
//! mixes the seed with a purpose tag and an index. Streams for different
//! purposes (member builds, folds, tie breaks) are therefore independent of
//! the order in which they are requested, so parallel and sequential
//! execution agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(tag: &str) -> u64 {
    tag.bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `(master, tag, index)`.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let h = splitmix64(master ^ splitmix64(fnv1a(tag)));
    splitmix64(h ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

/// A generator for one purpose stream.
pub fn stream(master: u64, tag: &str, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master, tag, index))
}
