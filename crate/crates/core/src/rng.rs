//! Seed derivation. Every random stream in the crate is a `ChaCha8Rng`
//! whose seed is derived from the run seed plus a stream label, so that
//! streams never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a label and a list of integers into a child seed.
pub fn derive_seed(base: u64, label: &str, parts: &[i64]) -> u64 {
    let mut h = splitmix64(base);
    for b in label.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    for &p in parts {
        h = splitmix64(h ^ p as u64);
    }
    h
}

pub fn stream(base: u64, label: &str, parts: &[i64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, label, parts))
}

/// Uniform draw on `(0, 1]`.
pub fn uniform_open0<R: rand::Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
