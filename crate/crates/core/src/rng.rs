//! Counter-based random streams: every `(seed, domain, index)` triple owns an
//! independent ChaCha stream, so draws can run in any order or thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains, one per consumer of randomness.
pub(crate) mod domain {
    pub const SAMPLER: u64 = 1;
    pub const GENERATOR: u64 = 2;
    pub const SPLITS: u64 = 3;
}

pub(crate) fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
