//! Seeded randomness.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`) seeded
//! with a caller-provided `u64`. Independent replicates (restarts, permutation
//! shuffles, experiment seeds) use the same key with the replicate index as the
//! ChaCha stream id, so running them in any order or in parallel reproduces
//! sequential execution exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for replicate `index` under `seed`.
pub fn replicate(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}
