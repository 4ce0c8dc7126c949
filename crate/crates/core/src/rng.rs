//! Reproducible random streams.
//!
//! A stream is named by `(seed, stream_id)`. The pair is hashed with the
//! SplitMix64 finalizer into a 64-bit key, which in turn seeds a
//! Xoshiro256++ generator through SplitMix64 expansion. Parallel work is
//! split into fixed-size chunks, and chunk `k` draws from `stream.child(k)`,
//! so results never depend on how many workers ran the chunks.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

pub type StreamRng = Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    fn key(&self) -> u64 {
        splitmix_finalize(
            splitmix_finalize(self.seed.wrapping_add(GOLDEN_GAMMA))
                ^ self.stream_id.wrapping_mul(GOLDEN_GAMMA),
        )
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        Xoshiro256PlusPlus::seed_from_u64(self.key())
    }

    /// Sub-stream `index` of this stream, used for chunked parallel work.
    pub fn child(&self, index: u64) -> RngStream {
        RngStream {
            seed: self.key(),
            stream_id: index,
        }
    }
}
