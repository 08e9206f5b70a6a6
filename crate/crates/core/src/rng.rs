//! Seeded generators and random test functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent standard normal entries.
pub fn normal_vec(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Stable 64-bit hash (FNV-1a) for deriving per-task seeds from names.
pub fn stable_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Seed for the task `name` under a master seed.
pub fn derive_seed(master: u64, name: &str) -> u64 {
    let mut z = master ^ stable_hash(name);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a = normal_vec(&mut seeded(7), 5);
        let b = normal_vec(&mut seeded(7), 5);
        assert_eq!(a, b);
        assert_ne!(derive_seed(1, "RP"), derive_seed(1, "RRP"));
        assert_eq!(stable_hash(""), 0xcbf2_9ce4_8422_2325);
    }
}
