//! Fixed-capacity FIFO experience replay.

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be positive".into()));
        }
        Ok(Self { capacity, entries: Vec::new(), cursor: 0 })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends, overwriting the oldest entry once full.
    pub fn push(&mut self, t: Transition) {
        if self.entries.len() < self.capacity {
            self.entries.push(t);
        } else {
            self.entries[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.entries.get(i)
    }

    /// Uniform sample without replacement.
    pub fn sample(&self, batch: usize, rng: &mut SimRng) -> Result<Vec<&Transition>> {
        if batch > self.entries.len() {
            return Err(Error::Training(format!("cannot sample {batch} of {} stored transitions", self.entries.len())));
        }
        Ok(sample(rng, self.entries.len(), batch).into_iter().map(|i| &self.entries[i]).collect())
    }
}
