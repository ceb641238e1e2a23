//! Indexed, seed-addressable randomness.
//!
//! Every random draw in the crate comes from a ChaCha8 stream picked by a
//! `(seed, index)` pair, so sample `i` of a run does not depend on how many
//! threads evaluated the samples before it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags used to split one user seed into disjoint sub-streams.
pub mod tag {
    pub const SOLVE: u64 = 0x736f_6c76;
    pub const SUBSAMPLE: u64 = 0x7375_6273;
    pub const CERTIFY: u64 = 0x6365_7274;
    pub const ESTIMATE: u64 = 0x6573_7469;
    pub const ORACLE: u64 = 0x6f72_636c;
    pub const INSTANCE: u64 = 0x696e_7374;
    pub const TRIAL: u64 = 0x7472_6961;
    pub const VALIDATE: u64 = 0x7661_6c69;
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a label.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    mix(mix(seed) ^ label.rotate_left(17))
}

/// The generator for draw number `index` of the stream rooted at `seed`.
pub fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
