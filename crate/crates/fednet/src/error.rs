use thiserror::Error;

use fedring_learner::LearnerError;
use fedring_traffic::TrafficError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FednetError {
    #[error(transparent)]
    Traffic(#[from] TrafficError),

    #[error(transparent)]
    Learner(#[from] LearnerError),

    #[error("duplicate gradient from agent {agent} for round {round}")]
    DuplicateGradient { agent: usize, round: u64 },

    #[error("gradient from agent {agent} for round {round} arrived after that round aggregated")]
    StaleRound { agent: usize, round: u64 },

    #[error("gradient from unknown agent {0}")]
    UnknownAgent(usize),

    #[error("the baseline mode has no learners to train; use run_baseline_epochs")]
    BaselineNotTrainable,

    #[error("invalid federation config: {0}")]
    InvalidConfig(String),
}
