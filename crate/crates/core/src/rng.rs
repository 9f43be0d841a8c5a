//! Named random substreams.
//!
//! Every consumer of randomness (mobility, channel draws, request generation,
//! placement policies, the learning agent) gets its own ChaCha stream derived
//! from a root seed and a stream name, so that changing how one consumer uses
//! randomness never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

pub const MOBILITY: &str = "mobility";
pub const CHANNEL: &str = "channel";
pub const NC_CHANNEL: &str = "nc-channel";
pub const REQUESTS: &str = "requests";
pub const POLICY: &str = "policy";
pub const AGENT: &str = "agent";
pub const LIBRARY: &str = "library";
pub const POPULATION: &str = "population";

/// Derives an independent generator from `(root, name)`.
pub fn substream(root: u64, name: &str) -> SimRng {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest[..32]);
    SimRng::from_seed(seed)
}

/// Derives a child seed, e.g. one per training episode.
pub fn child_seed(root: u64, name: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(name.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
