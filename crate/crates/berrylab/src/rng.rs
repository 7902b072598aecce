//! Deterministic, replication-keyed random streams.
//!
//! Every replication `r` of an experiment draws from its own ChaCha stream
//! derived from `(seed, r)`. Streams are independent of execution order, so
//! replications can run on any thread schedule and still produce identical
//! draws. ChaCha is a counter-mode generator: the stream id selects a
//! disjoint keystream, not an offset into a shared one.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Expands a 64-bit user seed into a 256-bit ChaCha key.
///
/// SplitMix64 is the conventional seed expander: consecutive user seeds give
/// uncorrelated keys.
fn expand_seed(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    key
}

/// Returns the generator for replication `replication` of the experiment
/// keyed by `seed`. Draw order within a replication is fixed by the caller;
/// distinct replications never share keystream blocks.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(expand_seed(seed));
    rng.set_stream(replication);
    rng
}
