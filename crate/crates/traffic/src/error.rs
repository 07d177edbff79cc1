use thiserror::Error;

/// Errors surfaced by the physics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("unknown vehicle id {0}")]
    UnknownVehicle(usize),

    #[error("need at least 2 vehicles, world has {0}")]
    TooFewVehicles(usize),

    #[error("no acceleration supplied for vehicle {0}")]
    IncompleteControl(usize),

    #[error("cannot step a world whose epoch already ended in a crash")]
    EpochTerminated,

    #[error("invalid traffic config: {0}")]
    InvalidConfig(String),
}
