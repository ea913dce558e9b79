//! Per-trial random streams.
//!
//! Every trial draws from its own ChaCha8 stream whose 64-bit seed is a
//! SplitMix64 finalization of `(master, index)`. Trials never share state,
//! so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in every report.
pub const GENERATOR_ID: &str = "chacha8/splitmix64-stream-v1";

pub type TrialRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`.
pub fn stream_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Derive a child master seed for a labelled sub-experiment, so that two
/// parameter points with the same trial index do not reuse a stream.
pub fn substream(master: u64, label: u64) -> u64 {
    stream_seed(master ^ 0x5851_f42d_4c95_7f2d, label)
}

pub fn trial_rng(master: u64, index: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, index))
}

/// Stable hash of a short text label, for `substream`.
pub fn label_hash(label: &str) -> u64 {
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}
