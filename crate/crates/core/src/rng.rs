//! Seed derivation and the generator used everywhere in the crate.
//!
//! All randomness flows through [`ChaCha8Rng`], which produces the same
//! stream on every platform for a given seed. Independent sub-streams are
//! derived with [`derive_seed`] so that, for example, trial `k` of an
//! experiment never depends on how many draws trial `k - 1` consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags for [`derive_seed`]. Values are arbitrary but frozen: changing
/// one changes every experiment output.
pub mod stream {
    pub const HUMAN: u64 = 0x4855_4d41;
    pub const UTILITY: u64 = 0x5554_494c;
    pub const TRAIN: u64 = 0x5452_4149;
    pub const REFS: u64 = 0x5245_4653;
    pub const TEMPERED: u64 = 0x5445_4d50;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const TRIAL: u64 = 0x5452_4941;
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministically combine a parent seed with a tag into a child seed.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    mix64(mix64(parent) ^ tag.rotate_left(17))
}

/// Per-trial seed for trial `index` under `master_seed`.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    derive_seed(derive_seed(master_seed, stream::TRIAL), index)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn derived_seeds_differ_by_tag_and_parent() {
        let a = derive_seed(1, stream::TRAIN);
        let b = derive_seed(1, stream::REFS);
        let c = derive_seed(2, stream::TRAIN);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(1, stream::TRAIN));
    }

    #[test]
    fn generator_stream_is_frozen() {
        // Guards against a silent change of generator or seeding scheme.
        let mut r1 = rng_from_seed(42);
        let mut r2 = rng_from_seed(42);
        let xs: Vec<u64> = (0..4).map(|_| r1.random()).collect();
        let ys: Vec<u64> = (0..4).map(|_| r2.random()).collect();
        assert_eq!(xs, ys);
    }
}
