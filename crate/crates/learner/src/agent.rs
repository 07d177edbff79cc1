use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fedring_traffic::Observation;

use crate::config::LearnerConfig;
use crate::error::LearnerError;
use crate::network::QNetwork;
use crate::replay::{ReplayBuffer, Transition};
use crate::training::{act, apply_gradient, compute_gradient, Gradient};

/// One learning vehicle's private state: online and target networks, replay
/// buffer and exploration rng. Never shared between agents.
#[derive(Debug, Clone)]
pub struct Agent {
    pub id: usize,
    net: QNetwork,
    target: QNetwork,
    buffer: ReplayBuffer,
    config: LearnerConfig,
    rng: ChaCha8Rng,
    rounds_completed: u64,
}

impl Agent {
    /// All agents in a run start from the same `initial_net`; their rng
    /// streams are the only per-agent difference.
    pub fn new(id: usize, initial_net: QNetwork, config: LearnerConfig, seed: u64) -> Self {
        Self {
            id,
            target: initial_net.clone(),
            buffer: ReplayBuffer::new(config.replay_capacity),
            net: initial_net,
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            rounds_completed: 0,
        }
    }

    pub fn net(&self) -> &QNetwork {
        &self.net
    }

    pub fn rounds_completed(&self) -> u64 {
        self.rounds_completed
    }

    pub fn action_value(&self, action_index: usize) -> f64 {
        self.config.action_set[action_index]
    }

    /// Epsilon-greedy policy on the agent's current local model.
    pub fn act(&mut self, obs: &Observation, epsilon: f64) -> Result<usize, LearnerError> {
        act(&self.net, obs, epsilon, &mut self.rng)
    }

    pub fn record(&mut self, t: Transition) {
        self.buffer.push(t);
    }

    pub fn ready(&self) -> bool {
        self.buffer.is_ready()
    }

    /// Samples a 256-minibatch and computes this round's gradient against
    /// the local online and target networks.
    pub fn compute_round_gradient(&mut self, round: u64) -> Result<Gradient, LearnerError> {
        let batch = self.buffer.sample(&mut self.rng)?;
        let mut g = compute_gradient(&self.net, &self.target, &batch, self.config.gamma)?;
        g.source_agent = self.id;
        g.round_index = round;
        self.rounds_completed = round;
        Ok(g)
    }

    /// Local descent step (independent learning).
    pub fn apply_local(&mut self, g: &Gradient) -> Result<(), LearnerError> {
        self.net = apply_gradient(&self.net, g, self.config.learning_rate)?;
        Ok(())
    }

    /// Overwrites the local model with a broadcast global model,
    /// unconditionally: a stale version can replace a newer one.
    pub fn install_model(&mut self, net: QNetwork) {
        self.net = net;
    }

    /// Refreshes the target network from the local model on the configured
    /// round cadence.
    pub fn sync_target_if_due(&mut self, round: u64) {
        if round % self.config.target_sync_period == 0 {
            self.target = self.net.clone();
        }
    }
}
