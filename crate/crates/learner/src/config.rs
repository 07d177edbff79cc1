use serde::{Deserialize, Serialize};

use crate::error::LearnerError;
use crate::replay::MINIBATCH_SIZE;

/// Each agent computes one minibatch gradient every 256 simulation steps,
/// i.e. every 25.6 s of simulated time at the 0.1 s sampling period.
pub const MINIBATCH_INTERVAL_STEPS: u64 = MINIBATCH_SIZE as u64;

/// Linear epsilon decay, held constant within an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_epochs: u32,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_epochs: 100,
        }
    }
}

impl EpsilonSchedule {
    pub fn at_epoch(&self, epoch: u32) -> f64 {
        if self.decay_epochs == 0 {
            return self.end;
        }
        let frac = (f64::from(epoch) / f64::from(self.decay_epochs)).min(1.0);
        self.start + (self.end - self.start) * frac
    }
}

/// Hyperparameters of one value-based agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    /// Discrete acceleration set (m/s^2), sorted ascending.
    pub action_set: Vec<f64>,
    pub hidden_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub replay_capacity: usize,
    /// Target network refresh period, in gradient rounds.
    pub target_sync_period: u64,
    /// Initial Q-value offset added to the output biases. Optimistic starts
    /// resolve action-indifferent regions by systematic trial instead of
    /// noise drift.
    pub optimistic_init: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            action_set: vec![-3.0, -1.5, 0.0, 1.5, 3.0],
            hidden_sizes: vec![32, 32],
            learning_rate: 1e-3,
            gamma: 0.99,
            epsilon: EpsilonSchedule::default(),
            replay_capacity: 20_000,
            target_sync_period: 10,
            optimistic_init: 30.0,
        }
    }
}

impl LearnerConfig {
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_sizes.len() + 2);
        sizes.push(crate::network::OBSERVATION_DIM);
        sizes.extend_from_slice(&self.hidden_sizes);
        sizes.push(self.action_set.len());
        sizes
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let mut problems = Vec::new();
        if self.action_set.is_empty() {
            problems.push("action_set must be non-empty".to_string());
        }
        if self
            .action_set
            .windows(2)
            .any(|w| !(w[0] < w[1]))
        {
            problems.push("action_set must be strictly ascending".to_string());
        }
        if self.action_set.iter().any(|a| !a.is_finite()) {
            problems.push("action_set entries must be finite".to_string());
        }
        if self.hidden_sizes.iter().any(|&h| h == 0) {
            problems.push("hidden_sizes entries must be positive".to_string());
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            problems.push(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            problems.push(format!("gamma must be in [0, 1), got {}", self.gamma));
        }
        if self.replay_capacity < MINIBATCH_SIZE {
            problems.push(format!(
                "replay_capacity must be at least {MINIBATCH_SIZE}, got {}",
                self.replay_capacity
            ));
        }
        if self.target_sync_period == 0 {
            problems.push("target_sync_period must be at least 1".to_string());
        }
        for (name, value) in [
            ("epsilon.start", self.epsilon.start),
            ("epsilon.end", self.epsilon.end),
        ] {
            if !(0.0..=1.0).contains(&value) {
                problems.push(format!("{name} must be in [0, 1], got {value}"));
            }
        }
        if !self.optimistic_init.is_finite() {
            problems.push(format!(
                "optimistic_init must be finite, got {}",
                self.optimistic_init
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(LearnerError::InvalidConfig(problems.join("; ")))
        }
    }
}
