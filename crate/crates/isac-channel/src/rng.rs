//! Seeded, named random substreams.
//!
//! One root seed expands into independent ChaCha8 streams keyed by
//! (drop id, stream name). Streams never share state, so adding targets or
//! reordering generation steps cannot perturb draws on unrelated streams;
//! the communication link sees the same randomness no matter how many
//! sensing targets are configured.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const DOMAIN_TAG: &[u8] = b"isac-channel/stream/v1";

/// Factory for named per-drop random substreams under one root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpace {
    root: u64,
}

impl SeedSpace {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Derives the independent stream for (drop_id, name).
    pub fn stream(&self, drop_id: u64, name: &str) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(DOMAIN_TAG);
        hasher.update(self.root.to_le_bytes());
        hasher.update(drop_id.to_le_bytes());
        hasher.update((name.len() as u64).to_le_bytes());
        hasher.update(name.as_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(seed)
    }
}
