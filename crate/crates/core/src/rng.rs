use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// All randomness in the crate flows through this generator so that runs are
/// reproducible across platforms and crate upgrades of `rand`.
pub(crate) type SeededRng = ChaCha8Rng;

pub(crate) fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}
