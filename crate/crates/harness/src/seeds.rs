//! Per-experiment random streams derived from one base seed.
//!
//! Each (experiment, role) pair gets its own stream, so adding a study or a
//! replica never shifts the numbers drawn by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    Dataset,
    TieBreaker,
    /// Independent lottery for the second run of a sensitivity study.
    SecondTieBreaker,
    StrategistMask,
    /// Extra lotteries for best-of runs; replica 0 uses `TieBreaker`.
    Replica(u32),
}

impl StreamRole {
    fn code(self) -> u64 {
        match self {
            StreamRole::Dataset => 1,
            StreamRole::TieBreaker => 2,
            StreamRole::SecondTieBreaker => 3,
            StreamRole::StrategistMask => 4,
            StreamRole::Replica(k) => 0x1_0000 + u64::from(k),
        }
    }
}

// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base_seed: u64, experiment: u64, role: StreamRole) -> u64 {
    mix(mix(mix(base_seed) ^ experiment) ^ role.code())
}

pub fn stream(base_seed: u64, experiment: u64, role: StreamRole) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base_seed, experiment, role))
}
