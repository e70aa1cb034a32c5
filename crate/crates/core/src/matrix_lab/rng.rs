//! Seeded substreams.
//!
//! Generator: xoshiro256++. Stream `i` of seed `s` is seeded with
//! `splitmix64(s + (i + 1) * 0x9E3779B97F4A7C15)` (wrapping), and the
//! generator state is expanded from that word by `seed_from_u64`
//! (itself splitmix64). Each draw or chain owns one stream, so results do
//! not depend on thread scheduling.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type LabRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn substream(seed: u64, index: u64) -> LabRng {
    let word = splitmix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)));
    LabRng::seed_from_u64(word)
}
