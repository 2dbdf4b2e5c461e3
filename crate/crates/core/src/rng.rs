//! Seeded random streams with a fixed trial-seed derivation.
//!
//! Every sampling operation takes an explicit stream, so sampling is pure
//! given the stream value. Monte Carlo loops derive the stream for trial `t`
//! as `seed_from_u64(base_seed.wrapping_add(t))`, which makes serial and
//! parallel evaluation orders agree trial by trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The named generator used by every sampling operation.
pub type Prng = ChaCha8Rng;

/// Stream seeded directly from a 64-bit seed.
pub fn from_seed(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

/// Stream for one Monte Carlo trial: `seed = base_seed + trial_index`
/// (wrapping addition).
pub fn for_trial(base_seed: u64, trial_index: u64) -> Prng {
    from_seed(base_seed.wrapping_add(trial_index))
}
