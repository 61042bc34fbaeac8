//! Labelled, reproducible random streams.
//!
//! Every random draw in the crate comes from an [`RngStream`] derived from a
//! single master seed and a slash-separated label such as
//! `"train/gen3/genome1/fading"`. The stream seed is the SHA-256 digest of the
//! master seed and the full label, so two streams with the same
//! `(seed, label)` pair produce identical sequences across runs and platforms,
//! and streams with different labels are independent.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Environment variable that overrides the master seed.
pub const SEED_ENV_VAR: &str = "RISUAV_SEED";

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    label: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, label: impl Into<String>) -> Self {
        let label = label.into();
        let mut hasher = Sha256::new();
        hasher.update(master_seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        Self {
            master_seed,
            label,
            rng: ChaCha8Rng::from_seed(seed),
        }
    }

    /// Root stream with an empty label.
    pub fn root(master_seed: u64) -> Self {
        Self::new(master_seed, "")
    }

    /// Child stream keyed by `(master_seed, parent_label/label)`.
    ///
    /// The child does not depend on how many values were already drawn from
    /// the parent.
    pub fn substream(&self, label: &str) -> Self {
        let full = if self.label.is_empty() {
            label.to_owned()
        } else {
            format!("{}/{}", self.label, label)
        };
        Self::new(self.master_seed, full)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Resolves the master seed: an explicit value wins, then `RISUAV_SEED`,
/// then `fallback`.
pub fn resolve_seed(explicit: Option<u64>, fallback: u64) -> u64 {
    if let Some(seed) = explicit {
        return seed;
    }
    std::env::var(SEED_ENV_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(fallback)
}
