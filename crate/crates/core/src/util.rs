//! Small shared helpers: deterministic reductions and seed derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Vec3;

/// Pairwise (tree) summation. The association order depends only on the
/// slice length, so results are bit-stable no matter how the terms were
/// produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise summation over 3-vectors.
pub fn pairwise_sum_vec(values: &[Vec3]) -> Vec3 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut acc = Vec3::zeros();
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum_vec(&values[..mid]) + pairwise_sum_vec(&values[mid..])
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a base seed with a list of integer keys (stage, iteration, ...).
pub fn derive_seed(base: u64, keys: &[u64]) -> u64 {
    let mut h = splitmix64(base);
    for &k in keys {
        h = splitmix64(h ^ splitmix64(k));
    }
    h
}

/// Counter-based generator: the stream for item `index` under `seed` does not
/// depend on any other item, so items can be drawn in any order or in parallel.
pub fn item_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stable 64-bit content hash (FNV-1a over the given words).
pub fn hash_words(words: impl IntoIterator<Item = u64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
