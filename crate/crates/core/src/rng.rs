//! Seeding helpers.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a 64-bit
//! value. Sub-streams (per tree, per document, per fold) get their seeds from
//! [`derive_seed`], which mixes the parent seed with a stream index using the
//! SplitMix64 finalizer, so results do not depend on iteration order or on the
//! number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The PRNG used throughout: ChaCha with 8 rounds.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    splitmix64(parent ^ splitmix64(stream))
}

/// 64-bit FNV-1a, for turning identifiers into stream indices.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn derive_seed_str(parent: u64, key: &str) -> u64 {
    derive_seed(parent, fnv1a(key.as_bytes()))
}
