//! Single-seed reproducibility.
//!
//! Every stochastic stage draws from its own stream derived from one 64-bit
//! run seed: the stage name is hashed with 64-bit FNV-1a, XORed into the run
//! seed, and the result is passed through one SplitMix64 finaliser. The
//! output seeds a ChaCha8 generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StageRng = ChaCha8Rng;

fn fnv1a(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stage_seed(seed: u64, stage: &str) -> u64 {
    splitmix64(seed ^ fnv1a(stage))
}

pub fn stage_rng(seed: u64, stage: &str) -> StageRng {
    ChaCha8Rng::seed_from_u64(stage_seed(seed, stage))
}
