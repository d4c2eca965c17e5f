//! Ring-buffer experience replay with FIFO eviction.
//!
//! Transitions are stored flat: state, action, reward, next state. Storage
//! grows on demand up to the capacity, so a 1e6 capacity costs nothing
//! until it is used.

use serde::{Deserialize, Serialize};

use crate::numerics::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    state_dim: usize,
    action_dim: usize,
    capacity: usize,
    data: Vec<f64>,
    len: usize,
    /// Slot the next insertion overwrites once full.
    head: usize,
    pushed: u64,
}

impl ReplayBuffer {
    pub fn new(state_dim: usize, action_dim: usize, capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            state_dim,
            action_dim,
            capacity,
            data: Vec::new(),
            len: 0,
            head: 0,
            pushed: 0,
        }
    }

    fn stride(&self) -> usize {
        2 * self.state_dim + self.action_dim + 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total insertions ever made.
    pub fn pushed(&self) -> u64 {
        self.pushed
    }

    pub fn push(&mut self, t: &Transition) {
        assert_eq!(t.state.len(), self.state_dim, "state length");
        assert_eq!(t.next_state.len(), self.state_dim, "next-state length");
        assert_eq!(t.action.len(), self.action_dim, "action length");
        let mut row = Vec::with_capacity(self.stride());
        row.extend_from_slice(&t.state);
        row.extend_from_slice(&t.action);
        row.push(t.reward);
        row.extend_from_slice(&t.next_state);
        if self.len < self.capacity {
            self.data.extend_from_slice(&row);
            self.len += 1;
        } else {
            let s = self.stride();
            self.data[self.head * s..(self.head + 1) * s].copy_from_slice(&row);
            self.head = (self.head + 1) % self.capacity;
        }
        self.pushed += 1;
    }

    /// The `i`-th stored transition, oldest first.
    pub fn get(&self, i: usize) -> Transition {
        assert!(i < self.len, "index out of range");
        let idx = if self.len < self.capacity { i } else { (self.head + i) % self.capacity };
        let s = self.stride();
        let row = &self.data[idx * s..(idx + 1) * s];
        let (sd, ad) = (self.state_dim, self.action_dim);
        Transition {
            state: row[..sd].to_vec(),
            action: row[sd..sd + ad].to_vec(),
            reward: row[sd + ad],
            next_state: row[sd + ad + 1..].to_vec(),
        }
    }

    /// Uniform sample with replacement.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Vec<Transition> {
        assert!(!self.is_empty(), "sampling from an empty buffer");
        (0..n).map(|_| self.get(rng.below(self.len))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(k: f64) -> Transition {
        Transition {
            state: vec![k, k],
            action: vec![k],
            reward: k,
            next_state: vec![k + 1.0, k + 1.0],
        }
    }

    #[test]
    fn round_trip() {
        let mut b = ReplayBuffer::new(2, 1, 10);
        b.push(&tr(3.0));
        assert_eq!(b.len(), 1);
        assert_eq!(b.get(0), tr(3.0));
    }

    #[test]
    fn fifo_eviction() {
        let (cap, k) = (50, 17);
        let mut b = ReplayBuffer::new(2, 1, cap);
        for i in 0..cap + k {
            b.push(&tr(i as f64));
        }
        assert_eq!(b.len(), cap);
        let rewards: Vec<f64> = (0..cap).map(|i| b.get(i).reward).collect();
        for old in 0..k {
            assert!(!rewards.contains(&(old as f64)));
        }
        let expect: Vec<f64> = (k..cap + k).map(|i| i as f64).collect();
        assert_eq!(rewards, expect);
    }

    #[test]
    fn sampling_stays_in_buffer() {
        let mut b = ReplayBuffer::new(2, 1, 5);
        for i in 0..12 {
            b.push(&tr(i as f64));
        }
        let mut rng = RngStream::new(9);
        for t in b.sample(200, &mut rng) {
            assert!((7.0..12.0).contains(&t.reward));
        }
    }
}
