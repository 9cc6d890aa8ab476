//! Deterministic seed derivation.
//!
//! A run owns a single base seed. Every random stream in the pipeline
//! (population init, per-offspring variation, per-genome training, dataset
//! splitting) gets its own ChaCha8 generator seeded by mixing the base seed
//! with a domain tag and context words through splitmix64. Two streams never
//! share state, so reordering or parallelizing work cannot change what any
//! one stream produces.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag: sampling the initial population.
pub const STREAM_INIT: u64 = 0x01;
/// Stream tag: selection/crossover/mutation of one offspring.
pub const STREAM_VARIATION: u64 = 0x02;
/// Stream tag: weight init and batch shuffling while training one genome.
pub const STREAM_TRAINING: u64 = 0x03;
/// Stream tag: stratified train/validation splitting.
pub const STREAM_SPLIT: u64 = 0x04;

/// One round of the splitmix64 output function.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `words` into `seed`, one splitmix64 round per word.
///
/// The fold is order-sensitive: `mix(s, &[a, b]) != mix(s, &[b, a])` in
/// general, which is what keeps differently-shaped contexts apart.
pub fn mix(seed: u64, words: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &w in words {
        h = splitmix64(h ^ w);
    }
    h
}

/// ChaCha8 generator for the stream identified by `(seed, words)`.
pub fn stream_rng(seed: u64, words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, words))
}
