//! Deterministic random substreams.
//!
//! Every parallel work unit draws from its own ChaCha stream keyed by
//! `(seed, stream)`, so results never depend on how units are scheduled
//! across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Trials per work unit in parallel loops. Fixed so that the partition of a
/// run into substreams depends only on the trial count.
pub const BLOCK_SIZE: usize = 4096;

/// Returns the generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `n` items into `(block_index, start, len)` work units.
pub fn blocks(n: usize) -> impl Iterator<Item = (u64, usize, usize)> {
    (0..n.div_ceil(BLOCK_SIZE)).map(move |b| {
        let start = b * BLOCK_SIZE;
        (b as u64, start, BLOCK_SIZE.min(n - start))
    })
}
