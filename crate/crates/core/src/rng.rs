//! Seeded random streams.
//!
//! One master seed fans out into independent ChaCha streams. The key is
//! derived from the master seed and the stream id encodes the purpose and an
//! index, so two purposes (or two compartments) never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose of a derived stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Spike sampling of training compartment `k`.
    Compartment = 1,
    /// Dataset generation and shuffling.
    Data = 2,
    /// Parameter initialization.
    Init = 3,
    /// Free-running inference compartments.
    Inference = 4,
    /// Hidden realizations for log-likelihood estimation.
    Likelihood = 5,
}

const INDEX_BITS: u32 = 56;

/// Returns the stream for `(seed, domain, index)`.
///
/// Panics if `index` does not fit in 56 bits.
pub fn stream(seed: u64, domain: Domain, index: u64) -> StreamRng {
    assert!(index < 1 << INDEX_BITS, "stream index {index} out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << INDEX_BITS) | index);
    rng
}

/// Stream used by training compartment `k`.
pub fn compartment_stream(seed: u64, k: usize) -> StreamRng {
    stream(seed, Domain::Compartment, k as u64)
}
