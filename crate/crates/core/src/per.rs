//! Proportional prioritized experience replay backed by a sum tree.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One stored transition. `params` holds the raw continuous parameters of
/// every discrete branch, in `[-1, 1]`, as emitted by the policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub state: Vec<f64>,
    pub schedule: usize,
    pub params: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerConfig {
    pub capacity: usize,
    pub alpha: f64,
    pub mu_start: f64,
    pub mu_end: f64,
    pub epsilon: f64,
}

impl Default for PerConfig {
    fn default() -> Self {
        Self {
            capacity: 1_000_000,
            alpha: 0.6,
            mu_start: 0.4,
            mu_end: 1.0,
            epsilon: 1e-6,
        }
    }
}

impl PerConfig {
    /// Plain uniform replay: no prioritization and no weight correction.
    pub fn uniform(capacity: usize) -> Self {
        Self {
            capacity,
            alpha: 0.0,
            mu_start: 0.0,
            mu_end: 0.0,
            ..Self::default()
        }
    }

    /// Importance exponent at training progress `frac` in `[0, 1]`.
    pub fn mu_at(&self, frac: f64) -> f64 {
        let f = frac.clamp(0.0, 1.0);
        self.mu_start + (self.mu_end - self.mu_start) * f
    }

    pub fn validate(&self, batch: usize) -> Result<()> {
        let bad = |field: &str, reason: &str| Err(Error::config(format!("per.{field}"), reason));
        if self.capacity < batch.max(1) {
            return bad("capacity", "must be at least the batch size");
        }
        if !(self.alpha >= 0.0) {
            return bad("alpha", "must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.mu_start) || !(0.0..=1.0).contains(&self.mu_end) {
            return bad("mu", "must lie in [0, 1]");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon", "must be positive");
        }
        Ok(())
    }
}

/// Binary tree whose leaves hold priorities and whose internal nodes hold
/// subtree sums. Parents are always recomputed from their children, so the
/// root never accumulates rounding drift.
#[derive(Debug, Clone)]
pub struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        let leaves = capacity.max(1).next_power_of_two();
        Self {
            leaves,
            nodes: vec![0.0; 2 * leaves],
        }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        debug_assert!(value >= 0.0);
        let mut node = self.leaves + i;
        self.nodes[node] = value;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Leaf whose cumulative range contains `mass`, restricted to the first
    /// `len` leaves.
    pub fn find(&self, mut mass: f64, len: usize) -> usize {
        let mut node = 1;
        while node < self.leaves {
            let left = 2 * node;
            if mass < self.nodes[left] || self.nodes[left + 1] <= 0.0 {
                node = left;
            } else {
                mass -= self.nodes[left];
                node = left + 1;
            }
        }
        (node - self.leaves).min(len - 1)
    }
}

/// Handle to a sampled slot; goes stale once the slot is overwritten.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayIndex {
    pub slot: usize,
    seq: u64,
}

#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub indices: Vec<ReplayIndex>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PerBuffer {
    cfg: PerConfig,
    data: Vec<Experience>,
    seq: Vec<u64>,
    raw: Vec<f64>,
    next_seq: u64,
    write: usize,
    tree: SumTree,
    max_priority: f64,
}

impl PerBuffer {
    pub fn new(cfg: PerConfig) -> Self {
        Self {
            cfg,
            data: Vec::new(),
            seq: Vec::new(),
            raw: Vec::new(),
            next_seq: 0,
            write: 0,
            tree: SumTree::new(cfg.capacity),
            max_priority: 1.0,
        }
    }

    pub fn config(&self) -> &PerConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, slot: usize) -> &Experience {
        &self.data[slot]
    }

    pub fn experience(&self, idx: ReplayIndex) -> &Experience {
        &self.data[idx.slot]
    }

    /// Raw priority `p` of a slot.
    pub fn priority(&self, slot: usize) -> f64 {
        self.raw[slot]
    }

    pub fn max_priority(&self) -> f64 {
        self.max_priority
    }

    /// Sampling probability of a slot.
    pub fn probability(&self, slot: usize) -> f64 {
        self.tree.get(slot) / self.tree.total()
    }

    pub fn total_mass(&self) -> f64 {
        self.tree.total()
    }

    /// Stores `exp` with the running maximum priority, evicting the oldest
    /// entry when full.
    pub fn insert(&mut self, exp: Experience) {
        let slot = self.write;
        if self.data.len() < self.cfg.capacity {
            self.data.push(exp);
            self.seq.push(self.next_seq);
            self.raw.push(self.max_priority);
        } else {
            self.data[slot] = exp;
            self.seq[slot] = self.next_seq;
            self.raw[slot] = self.max_priority;
        }
        self.next_seq += 1;
        self.tree.set(slot, self.max_priority.powf(self.cfg.alpha));
        self.write = (slot + 1) % self.cfg.capacity;
    }

    /// Draws `batch` slots i.i.d. with probability `p^alpha / sum`, with
    /// importance weights `(len * P)^-mu` scaled so the largest is 1.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, mu: f64, rng: &mut R) -> Result<SampleBatch> {
        if self.len() < batch || batch == 0 {
            return Err(Error::BufferUnderfilled {
                len: self.len(),
                batch,
            });
        }
        let total = self.tree.total();
        let n = self.len() as f64;
        let mut indices = Vec::with_capacity(batch);
        let mut weights = Vec::with_capacity(batch);
        for _ in 0..batch {
            let mass = rng.random::<f64>() * total;
            let slot = self.tree.find(mass, self.len());
            let p = self.tree.get(slot) / total;
            indices.push(ReplayIndex {
                slot,
                seq: self.seq[slot],
            });
            weights.push((n * p).powf(-mu));
        }
        let max = weights.iter().cloned().fold(0.0, f64::max);
        for w in &mut weights {
            *w /= max;
        }
        Ok(SampleBatch { indices, weights })
    }

    /// Sets `p = |td| + epsilon` for each sampled index.
    pub fn update_priorities(&mut self, indices: &[ReplayIndex], td_errors: &[f64]) -> Result<()> {
        if indices.len() != td_errors.len() {
            return Err(Error::Dimension {
                context: "priority update",
                expected: indices.len(),
                actual: td_errors.len(),
            });
        }
        for (idx, td) in indices.iter().zip(td_errors) {
            if idx.slot >= self.len() || self.seq[idx.slot] != idx.seq {
                return Err(Error::StaleIndex { slot: idx.slot });
            }
            let p = td.abs() + self.cfg.epsilon;
            self.max_priority = self.max_priority.max(p);
            self.raw[idx.slot] = p;
            self.tree.set(idx.slot, p.powf(self.cfg.alpha));
        }
        Ok(())
    }
}
