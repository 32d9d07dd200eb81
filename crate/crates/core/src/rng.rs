//! Seed plumbing.
//!
//! Every random decision in the crate draws from a `ChaCha8Rng` seeded from an
//! explicit `u64`. Child seeds are derived by mixing a parent seed with a
//! stable tag, so results never depend on scheduling or wall-clock time.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `parent` and a numeric tag.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    mix(mix(parent) ^ tag.rotate_left(17))
}

/// Derive a child seed from `parent` and a string tag (model id, stage name).
pub fn derive_seed_str(parent: u64, tag: &str) -> u64 {
    // FNV-1a over the tag bytes keeps this independent of std's hasher.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    derive_seed(parent, h)
}

/// Mix a hex content checksum into a seed.
pub fn seed_with_checksum(seed: u64, checksum: &str) -> u64 {
    derive_seed_str(seed, checksum)
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
