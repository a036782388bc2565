use rand::Rng;

use crate::env::Observation;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Observation,
    pub action: usize,
    pub reward: f64,
    /// `None` when the attempt ended the hop.
    pub next_state: Option<Observation>,
}

impl Transition {
    pub fn is_terminal(&self) -> bool {
        self.next_state.is_none()
    }
}

/// Fixed-capacity ring of transitions; the oldest entry is overwritten
/// once full.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    items: Vec<Transition>,
    capacity: usize,
    next: usize,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { items: Vec::with_capacity(capacity), capacity, next: 0, inserted: 0 }
    }

    pub(crate) fn from_parts(items: Vec<Transition>, capacity: usize, next: usize, inserted: u64) -> Self {
        ReplayBuffer { items, capacity, next, inserted }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
        self.inserted += 1;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub(crate) fn next_slot(&self) -> usize {
        self.next
    }

    /// Total pushes since creation.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    /// Stored transitions in storage order (not insertion order once wrapped).
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// Uniform sampling with replacement.
    pub fn sample<'a, R: Rng + ?Sized>(&'a self, batch: usize, rng: &mut R) -> Vec<&'a Transition> {
        assert!(!self.items.is_empty(), "cannot sample an empty buffer");
        (0..batch).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect()
    }
}
