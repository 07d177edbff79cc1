//! Per-agent value-based reinforcement learner.
//!
//! Each agent owns a small fully-connected Q-network over a discrete
//! acceleration set, a FIFO replay buffer, and plain minibatch Q-learning
//! with a periodically synchronized target network. Gradients are exposed as
//! flat parameter-aligned vectors so they can be shipped, merged and applied
//! by the federation layer as well as locally.

mod agent;
mod config;
mod error;
mod network;
mod replay;
mod training;

pub use agent::Agent;
pub use config::{EpsilonSchedule, LearnerConfig, MINIBATCH_INTERVAL_STEPS};
pub use error::LearnerError;
pub use network::{QNetwork, OBSERVATION_DIM};
pub use replay::{Minibatch, ReplayBuffer, Transition, MINIBATCH_SIZE};
pub use training::{
    act, apply_gradient, compute_gradient, greedy_action, merge_gradients, td_loss, Gradient,
};
