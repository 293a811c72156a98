//! Counter-based seeding for reproducible parallel simulation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for replicate `index` of a run seeded with `master_seed`.
///
/// Each replicate reads its own ChaCha stream, so the draws it sees do not
/// depend on which thread runs it or in what order.
pub fn replicate_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
