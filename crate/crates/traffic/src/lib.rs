//! Deterministic single-lane traffic physics on a figure-eight track.
//!
//! The lane is one-way and crosses itself once. Dynamics are 1-D along
//! arc-length: semi-implicit Euler at a fixed 0.1 s step, an Intelligent
//! Driver Model for baseline (human-proxy) vehicles, a priority gate at the
//! self-crossing, and bumper-gap crash detection that terminates the epoch.
//!
//! Everything in this crate is pure and deterministic: identical inputs
//! (geometry, seed, acceleration sequence) produce bit-identical worlds.

mod config;
mod dynamics;
mod error;
mod geometry;
mod idm;
mod intersection;
mod world;

pub use config::{TrafficConfig, MAX_STEPS_PER_EPOCH, STEP_SECONDS, VEHICLE_COUNT};
pub use dynamics::{conflict_yield_acceleration, idm_control, required_deceleration, step};
pub use error::TrafficError;
pub use geometry::{build_figure_eight, TrackGeometry};
pub use idm::{idm_acceleration, IdmParams};
pub use intersection::{conflict_entry_distance, intersection_gate, occupies_conflict};
pub use world::{
    neighbors, observe, reset_epoch, reward, Controller, Neighbors, Observation, VehicleState,
    WorldState,
};
