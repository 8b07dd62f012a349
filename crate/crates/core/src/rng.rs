//! Seed derivation.
//!
//! A single master seed fans out into independent streams keyed by a label
//! (`"split"`, `"model:forest"`, ...). Adding a new consumer never shifts the
//! numbers another consumer sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used everywhere in the crate.
pub type StreamRng = ChaCha8Rng;

/// Derives a child seed from `master` and a stream label.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    first_u64(&hasher.finalize())
}

/// Derives a child seed from `master`, a label and an extra numeric key.
pub fn derive_seed_keyed(master: u64, label: &str, key: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(key.to_le_bytes());
    first_u64(&hasher.finalize())
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_for(master: u64, label: &str) -> StreamRng {
    stream(derive_seed(master, label))
}

fn first_u64(bytes: &[u8]) -> u64 {
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&bytes[..8]);
    u64::from_le_bytes(buf)
}
