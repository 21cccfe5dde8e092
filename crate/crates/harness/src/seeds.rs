//! Replicate seed derivation.

use ecmc_core::kernels::Algorithm;
use sha2::{Digest, Sha256};

/// Seed of replicate `r`: the first eight bytes (little endian) of
/// SHA-256 over the base seed, the experiment namespace, `d`, the
/// algorithm label and `r`. Target parameters are deliberately left out.
pub fn replicate_seed(base: u64, namespace: &str, d: usize, algorithm: Algorithm, r: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    hasher.update(namespace.as_bytes());
    hasher.update([0u8]);
    hasher.update((d as u64).to_le_bytes());
    hasher.update(algorithm.label().as_bytes());
    hasher.update([0u8]);
    hasher.update(r.to_le_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

/// Index reserved for the bootstrap stream of an aggregate row.
pub const BOOTSTRAP_INDEX: u64 = u64::MAX;
