//! Deterministic random streams.
//!
//! Every run owns a ChaCha8 stream keyed by the experiment seed and a
//! stream id derived from the run coordinates, so results never depend on
//! thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

/// Seeded stream with no further splitting.
pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for the run identified by `coords` (e.g. `[mdp, algorithm, run]`).
pub fn stream(seed: u64, coords: &[u64]) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = coords
        .iter()
        .fold(0x6a09_e667_f3bc_c909_u64, |acc, &c| splitmix64(acc ^ splitmix64(c)));
    rng.set_stream(id);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
