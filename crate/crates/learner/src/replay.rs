use std::collections::VecDeque;

use rand::Rng;

use fedring_traffic::Observation;

use crate::error::LearnerError;

/// One gradient is computed from exactly this many transitions.
pub const MINIBATCH_SIZE: usize = 256;

/// One step of experience for one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub action_index: usize,
    pub reward: f64,
    pub next_obs: Observation,
    pub terminal: bool,
}

/// A training batch. The production constructor enforces the fixed
/// 256-transition size; tests may build smaller batches explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct Minibatch(Vec<Transition>);

impl Minibatch {
    pub fn new(transitions: Vec<Transition>) -> Result<Self, LearnerError> {
        if transitions.len() != MINIBATCH_SIZE {
            return Err(LearnerError::BadBatchSize {
                expected: MINIBATCH_SIZE,
                got: transitions.len(),
            });
        }
        Ok(Self(transitions))
    }

    /// Skips the size check. Intended for tests and oracles that probe the
    /// training math on small hand-built batches.
    pub fn unchecked(transitions: Vec<Transition>) -> Self {
        Self(transitions)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// FIFO replay buffer with uniform-with-replacement sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            items: VecDeque::with_capacity(capacity.min(1 << 20)),
            capacity,
        }
    }

    /// Appends a transition, evicting the oldest one beyond capacity.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_ready(&self) -> bool {
        self.items.len() >= MINIBATCH_SIZE
    }

    pub fn contains(&self, t: &Transition) -> bool {
        self.items.contains(t)
    }

    /// Draws a 256-transition batch uniformly with replacement, consuming
    /// exactly 256 index draws from `rng`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<Minibatch, LearnerError> {
        if !self.is_ready() {
            return Err(LearnerError::NotReady {
                have: self.items.len(),
                need: MINIBATCH_SIZE,
            });
        }
        let batch = (0..MINIBATCH_SIZE)
            .map(|_| self.items[rng.random_range(0..self.items.len())])
            .collect();
        Ok(Minibatch(batch))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(tag: f64) -> Transition {
        Transition {
            obs: Observation::from_array([tag, 0.0, 0.0, 0.0, 0.0, 0.0]),
            action_index: 0,
            reward: tag,
            next_obs: Observation::from_array([tag, 0.0, 0.0, 0.0, 0.0, 0.0]),
            terminal: false,
        }
    }

    #[test]
    fn fifo_eviction_drops_the_oldest() {
        let mut buf = ReplayBuffer::new(3);
        for i in 0..4 {
            buf.push(transition(i as f64));
        }
        assert_eq!(buf.len(), 3);
        assert!(!buf.contains(&transition(0.0)));
        assert!(buf.contains(&transition(3.0)));
    }

    #[test]
    fn sampling_underfull_buffer_errors() {
        let mut buf = ReplayBuffer::new(1000);
        for i in 0..(MINIBATCH_SIZE - 1) {
            buf.push(transition(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            buf.sample(&mut rng).unwrap_err(),
            LearnerError::NotReady {
                have: MINIBATCH_SIZE - 1,
                need: MINIBATCH_SIZE
            }
        );
    }

    #[test]
    fn degenerate_content_samples_identically() {
        let mut buf = ReplayBuffer::new(1000);
        for _ in 0..MINIBATCH_SIZE {
            buf.push(transition(7.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = buf.sample(&mut rng).unwrap();
        assert!(batch.transitions().iter().all(|t| *t == transition(7.0)));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let mut buf = ReplayBuffer::new(1000);
        for i in 0..400 {
            buf.push(transition(i as f64));
        }
        let a = buf.sample(&mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = buf.sample(&mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batch_size_is_enforced() {
        assert!(matches!(
            Minibatch::new(vec![transition(0.0); 10]),
            Err(LearnerError::BadBatchSize { got: 10, .. })
        ));
        assert!(Minibatch::new(vec![transition(0.0); MINIBATCH_SIZE]).is_ok());
    }
}
