//! Seed discipline.
//!
//! A master seed and a purpose tag are mixed with SplitMix64 into a ChaCha8 key;
//! the replica (or site, block, ...) index selects the ChaCha stream. Streams with
//! different indices never overlap, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Rng = ChaCha8Rng;

/// Human-readable description of the splitting scheme, recorded in outputs.
pub const SCHEME: &str =
    "ChaCha8Rng::seed_from_u64(splitmix64(master ^ purpose_tag)), set_stream(index)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Disorder,
    Replica,
    Chain,
    Dynamics,
    Test,
}

impl Purpose {
    #[must_use]
    pub fn tag(self) -> u64 {
        match self {
            Purpose::Disorder => 0x6469_736f_7264_6572,
            Purpose::Replica => 0x7265_706c_6963_6100,
            Purpose::Chain => 0x6368_6169_6e00_0000,
            Purpose::Dynamics => 0x6479_6e61_6d69_6373,
            Purpose::Test => 0x7465_7374_0000_0000,
        }
    }
}

/// Where a random stream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    pub purpose: Purpose,
    pub index: u64,
}

impl SeedRecord {
    #[must_use]
    pub fn new(master: u64, purpose: Purpose, index: u64) -> Self {
        Self { master, purpose, index }
    }

    #[must_use]
    pub fn rng(&self) -> Rng {
        stream(self.master, self.purpose, self.index)
    }
}

#[must_use]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[must_use]
pub fn stream(master: u64, purpose: Purpose, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master ^ purpose.tag()));
    rng.set_stream(index);
    rng
}
