//! Seeded substreams.
//!
//! All randomness in the crate flows through [`derive_rng`]: one master seed,
//! one named purpose per consumer, and a 64-bit counter index. Streams for
//! distinct (seed, purpose, index) triples are independent ChaCha streams, so
//! permutation sampling, corruption draws, and bootstrap resampling never
//! interleave, and iteration `t` of an estimator sees the same bytes no matter
//! which worker runs it.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Counter-based substream for (master seed, purpose tag, index).
pub fn derive_rng(seed: u64, purpose: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ fnv1a64(purpose.as_bytes())));
    rng.set_stream(index);
    rng
}

/// Fisher-Yates permutation of `0..len`.
pub fn permutation(len: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// `count` distinct indices drawn uniformly from `0..universe`, sorted ascending.
pub fn sample_indices(universe: usize, count: usize, rng: &mut impl Rng) -> Vec<usize> {
    assert!(count <= universe);
    let mut pool: Vec<usize> = (0..universe).collect();
    for i in 0..count {
        let j = rng.random_range(i..universe);
        pool.swap(i, j);
    }
    let mut picked = pool[..count].to_vec();
    picked.sort_unstable();
    picked
}

pub(crate) fn fnv1a64_bytes(bytes: &[u8]) -> u64 {
    fnv1a64(bytes)
}
