use rand::Rng;

use crate::nn::Matrix;
use crate::{Error, Result};

/// One environment transition. `mask[k]` is the bootstrap weight of ensemble member `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
    /// `s_next` is terminal: no value is bootstrapped from it.
    pub done: bool,
    pub mask: Vec<u8>,
}

/// Fixed-capacity ring buffer; once full, new transitions overwrite the oldest.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("replay capacity must be >= 1"));
        }
        Ok(Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if !t.r.is_finite() {
            return Err(Error::non_finite("reward", &[t.r]));
        }
        if let Some(first) = self.items.first() {
            if first.s.len() != t.s.len()
                || first.a.len() != t.a.len()
                || first.s_next.len() != t.s_next.len()
                || first.mask.len() != t.mask.len()
            {
                return Err(Error::shape("transition dimensions differ from the buffer's"));
            }
        }
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
        Ok(())
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::Contract("cannot sample from an empty replay buffer".into()));
        }
        Ok((0..n).map(|_| rng.random_range(0..self.items.len())).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Batch> {
        let idx = self.sample_indices(n, rng)?;
        Batch::from_transitions(idx.iter().map(|&i| &self.items[i]))
    }
}

/// Column-stacked mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub states: Matrix,
    pub actions: Matrix,
    pub rewards: Vec<f64>,
    pub next_states: Matrix,
    pub dones: Vec<bool>,
    /// `masks[j][k]`: weight of transition `j` for member `k`.
    pub masks: Vec<Vec<u8>>,
}

impl Batch {
    pub fn from_transitions<'a>(items: impl IntoIterator<Item = &'a Transition>) -> Result<Self> {
        let items: Vec<&Transition> = items.into_iter().collect();
        if items.is_empty() {
            return Err(Error::Contract("empty batch".into()));
        }
        let states = Matrix::from_rows(&items.iter().map(|t| t.s.as_slice()).collect::<Vec<_>>())?;
        let actions = Matrix::from_rows(&items.iter().map(|t| t.a.as_slice()).collect::<Vec<_>>())?;
        let next_states = Matrix::from_rows(&items.iter().map(|t| t.s_next.as_slice()).collect::<Vec<_>>())?;
        Ok(Self {
            states,
            actions,
            rewards: items.iter().map(|t| t.r).collect(),
            next_states,
            dones: items.iter().map(|t| t.done).collect(),
            masks: items.iter().map(|t| t.mask.clone()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    /// Weights of member `k` across the batch.
    pub fn mask_column(&self, k: usize) -> Vec<f64> {
        self.masks.iter().map(|m| m.get(k).copied().unwrap_or(1) as f64).collect()
    }
}
