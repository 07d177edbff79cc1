use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value while computing the gradient of layer {layer}")]
    NonFinite { layer: usize },

    #[error("minibatch must hold exactly {expected} transitions, got {got}")]
    BadBatchSize { expected: usize, got: usize },

    #[error("replay buffer holds {have} transitions, sampling needs {need}")]
    NotReady { have: usize, need: usize },

    #[error("cannot merge an empty gradient list")]
    EmptyMerge,

    #[error("malformed model payload: {0}")]
    Deserialize(String),

    #[error("invalid learner config: {0}")]
    InvalidConfig(String),
}
