//! Replay buffer with weighted mini-batch sampling.
//!
//! Entries are kept in insertion order. Per-entry weights live next to a
//! prefix-sum tree so a draw costs O(log n); reweighting a whole buffer
//! rebuilds the tree once in O(n). Mutation requires `&mut self`, while
//! sampling takes `&self`, so frozen snapshots can be sampled from several
//! workers at once, each with its own seed.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fenwick::FenwickTree;
use crate::weighting::WeightScheme;

/// One environment sample, stamped with where it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    /// 1-based episode index.
    pub episode: u32,
    /// 0-based step within the episode.
    pub step: u32,
    /// 1-based global insertion time; must arrive as previous + 1.
    pub global_time: u64,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    entries: VecDeque<Transition>,
    weights: VecDeque<f64>,
    priorities: VecDeque<f64>,
    capacity: Option<usize>,
    tree: FenwickTree,
    next_global_time: u64,
}

impl ReplayBuffer {
    /// Unbounded buffer.
    pub fn new() -> Self {
        ReplayBuffer {
            entries: VecDeque::new(),
            weights: VecDeque::new(),
            priorities: VecDeque::new(),
            capacity: None,
            tree: FenwickTree::new(0),
            next_global_time: 1,
        }
    }

    /// FIFO buffer that evicts the oldest entry past `capacity`.
    pub fn with_capacity(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::parameter("capacity must be >= 1"));
        }
        let mut buf = ReplayBuffer::new();
        buf.capacity = Some(capacity);
        Ok(buf)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, idx: usize) -> &Transition {
        &self.entries[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.entries.iter()
    }

    pub fn weight(&self, idx: usize) -> f64 {
        self.weights[idx]
    }

    pub fn priority(&self, idx: usize) -> f64 {
        self.priorities[idx]
    }

    pub fn total_weight(&self) -> f64 {
        self.tree.total()
    }

    pub fn max_global_time(&self) -> Option<u64> {
        self.entries.back().map(|t| t.global_time)
    }

    /// Appends a transition. New entries start at weight 1 and at the
    /// current maximum priority so a priority scheme samples them soon.
    pub fn push(&mut self, transition: Transition) -> Result<()> {
        if transition.global_time != self.next_global_time {
            return Err(Error::Ordering {
                expected: self.next_global_time,
                got: transition.global_time,
            });
        }
        let priority = self
            .priorities
            .iter()
            .cloned()
            .fold(1.0f64, f64::max);
        self.entries.push_back(transition);
        self.weights.push_back(1.0);
        self.priorities.push_back(priority);
        self.next_global_time += 1;
        if let Some(cap) = self.capacity {
            if self.entries.len() > cap {
                self.entries.pop_front();
                self.weights.pop_front();
                self.priorities.pop_front();
            }
        }
        self.rebuild_tree();
        Ok(())
    }

    /// Reassigns every entry's weight from the scheme, with ages counted
    /// back from `now` (the newest entry at `now` has age 1).
    pub fn reweight(&mut self, scheme: &WeightScheme, now: u64) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Sampling("cannot reweight an empty buffer".into()));
        }
        scheme.validate()?;
        let max_time = self.max_global_time().unwrap();
        if now < max_time {
            return Err(Error::parameter(format!(
                "now={now} precedes the newest entry at global_time {max_time}"
            )));
        }
        for idx in 0..self.entries.len() {
            let age = now - self.entries[idx].global_time + 1;
            let priority = self.priorities[idx];
            self.weights[idx] = scheme.weight(age, Some(priority))?;
        }
        self.rebuild_tree();
        Ok(())
    }

    /// Overrides one entry's weight.
    pub fn set_weight(&mut self, idx: usize, weight: f64) -> Result<()> {
        if idx >= self.len() {
            return Err(Error::parameter(format!("index {idx} out of range")));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::parameter(format!(
                "weight must be finite and >= 0, got {weight}"
            )));
        }
        let delta = weight - self.weights[idx];
        self.weights[idx] = weight;
        self.tree.add(idx, delta);
        Ok(())
    }

    pub fn set_priority(&mut self, idx: usize, priority: f64) -> Result<()> {
        if idx >= self.len() {
            return Err(Error::parameter(format!("index {idx} out of range")));
        }
        if !priority.is_finite() || priority < 0.0 {
            return Err(Error::parameter(format!(
                "priority must be finite and >= 0, got {priority}"
            )));
        }
        self.priorities[idx] = priority;
        Ok(())
    }

    /// Draws `batch_size` indices i.i.d. proportionally to current weights.
    /// The same (buffer state, batch_size, seed) always yields the same
    /// index sequence.
    pub fn sample_batch(&self, batch_size: usize, seed: u64) -> Result<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_batch_with_rng(batch_size, &mut rng)
    }

    pub fn sample_batch_with_rng<R: Rng>(
        &self,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::Sampling("buffer is empty".into()));
        }
        let total = self.tree.total();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::Sampling("total weight is zero".into()));
        }
        let mut indices = Vec::with_capacity(batch_size);
        for _ in 0..batch_size {
            let target = rng.gen::<f64>() * total;
            let idx = self.tree.find_prefix(target).min(self.len() - 1);
            indices.push(idx);
        }
        Ok(indices)
    }

    /// Largest relative deviation between tree prefix sums and the direct
    /// cumulative sums of the stored weights.
    pub fn consistency_error(&self) -> f64 {
        let total = self.tree.total().max(f64::MIN_POSITIVE);
        let mut acc = 0.0;
        let mut worst: f64 = 0.0;
        for idx in 0..self.len() {
            acc += self.weights[idx];
            let dev = (self.tree.prefix_sum(idx) - acc).abs() / total;
            worst = worst.max(dev);
        }
        worst
    }

    fn rebuild_tree(&mut self) {
        let weights: Vec<f64> = self.weights.iter().cloned().collect();
        self.tree = FenwickTree::from_weights(&weights);
    }
}

impl Default for ReplayBuffer {
    fn default() -> Self {
        ReplayBuffer::new()
    }
}

/// Convenience constructor used all over the tests.
pub fn transition_at(global_time: u64) -> Transition {
    Transition {
        state: 0,
        action: 0,
        reward: 0.0,
        next_state: 0,
        episode: 1,
        step: (global_time - 1) as u32,
        global_time,
    }
}
