//! Named, reproducible random sub-streams.
//!
//! Every random decision in the crate draws from a [`SeedRng`] built from a
//! master seed, a stream tag (`"split"`, `"init"`, `"pair"`, ...) and an
//! index. Streams are independent of scheduling order, so parallel training
//! produces the same result as sequential training.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeedRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` for the named stream and index.
pub fn derive_seed(seed: u64, stream: &str, index: u64) -> u64 {
    // FNV-1a over the tag
    let tag = stream.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    });
    splitmix64(splitmix64(seed ^ tag).wrapping_add(splitmix64(index)))
}

pub fn stream_rng(seed: u64, stream: &str, index: u64) -> SeedRng {
    SeedRng::seed_from_u64(derive_seed(seed, stream, index))
}
