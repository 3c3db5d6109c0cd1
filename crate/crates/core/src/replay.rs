//! Experience replay memory with FIFO eviction and uniform sampling.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex, MutexGuard};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Action;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("cannot sample {requested} experiences from a memory holding {available}")]
    InsufficientSamples { requested: usize, available: usize },
}

/// One transition `(s, a, r, s', terminal)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: Action,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// `next_state` was observed at the goal. Step-capped episodes keep this false.
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayMemory {
    capacity: usize,
    entries: VecDeque<Experience>,
    inserted: u64,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, entries: VecDeque::with_capacity(capacity.min(1 << 16)), inserted: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total pushes so far, evictions included.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.entries.iter()
    }

    pub fn push(&mut self, experience: Experience) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(experience);
        self.inserted += 1;
    }

    /// Draws `batch_size` distinct entries uniformly at random.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<Experience>, ReplayError> {
        if batch_size > self.entries.len() || (batch_size == 0 && self.entries.is_empty()) {
            return Err(ReplayError::InsufficientSamples { requested: batch_size, available: self.entries.len() });
        }
        Ok(rand::seq::index::sample(rng, self.entries.len(), batch_size)
            .into_iter()
            .map(|i| self.entries[i].clone())
            .collect())
    }
}

/// Replay memory shared between the actor and learner flows. Each push and
/// each sample holds the lock for its whole duration.
#[derive(Debug, Clone)]
pub struct SharedReplay(Arc<Mutex<ReplayMemory>>);

impl SharedReplay {
    pub fn new(memory: ReplayMemory) -> Self {
        Self(Arc::new(Mutex::new(memory)))
    }

    pub fn lock(&self) -> MutexGuard<'_, ReplayMemory> {
        self.0.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    pub fn push(&self, experience: Experience) {
        self.lock().push(experience);
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.lock().is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<Experience>, ReplayError> {
        self.lock().sample(batch_size, rng)
    }

    pub fn snapshot(&self) -> ReplayMemory {
        self.lock().clone()
    }
}
