//! Seed derivation and seeded sampling.
//!
//! Sub-seeds are derived from `(seed, task_id, template)` with FNV-1a over
//! the little-endian seed bytes, the task id, a `0xFF` separator and the
//! template tag, followed by the SplitMix64 finalizer. `0xFF` never occurs in
//! UTF-8, so distinct `(task_id, template)` pairs never share an input.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit hash of `(seed, task_id, template)`.
pub fn derive_seed(seed: u64, task_id: &str, template: &str) -> u64 {
    let mut h = FNV_OFFSET;
    let bytes = seed
        .to_le_bytes()
        .into_iter()
        .chain(task_id.bytes())
        .chain(std::iter::once(0xFF))
        .chain(template.bytes());
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(h)
}

/// Generator used for every seeded draw in the crate.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// First `k` entries of a Fisher–Yates shuffle of `0..n`.
///
/// Panics if `k > n`.
pub fn shuffle_prefix<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "prefix {k} longer than population {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
