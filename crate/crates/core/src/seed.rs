//! Seed derivation for independent RNG streams.
//!
//! Every stream used by an experiment is seeded with
//! `derive_seed(master, tag, index)`: the tag is hashed with 64-bit FNV-1a,
//! mixed with the index through SplitMix64, XORed into the master seed and
//! finalized with SplitMix64 again. The generator is ChaCha8 seeded from
//! that value, so streams depend only on `(master, tag, index)` and never on
//! thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(fnv1a(tag) ^ splitmix64(index)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(master: u64, tag: &str, index: u64) -> SimRng {
    rng_from_seed(derive_seed(master, tag, index))
}
