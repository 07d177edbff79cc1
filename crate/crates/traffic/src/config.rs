use serde::{Deserialize, Serialize};

use crate::error::TrafficError;
use crate::idm::IdmParams;

/// Simulation step length: every vehicle samples its state and applies a new
/// acceleration once per 0.1 s.
pub const STEP_SECONDS: f64 = 0.1;

/// An epoch lasts at most 150 s, i.e. 1500 steps, unless a crash ends it.
pub const MAX_STEPS_PER_EPOCH: u32 = 1500;

/// The scenario always runs exactly 14 vehicles.
pub const VEHICLE_COUNT: usize = 14;

/// Physical and scenario constants for the figure-eight world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    /// Radius of each of the two loops (m).
    pub loop_radius: f64,
    /// Half-length of each conflict interval at the crossing (m).
    pub conflict_half_length: f64,
    /// Vehicle body length (m).
    pub vehicle_length: f64,
    /// Lane speed limit; speeds saturate here and normalize against it (m/s).
    pub v_max: f64,
    /// Hardest physically possible braking (m/s^2).
    pub b_emergency: f64,
    /// Bumper gaps below this count as a collision (m).
    pub crash_threshold: f64,
    /// Horizon within which a vehicle counts as approaching the crossing (s).
    pub lookahead_horizon: f64,
    /// Reward penalty applied on the crash step.
    pub crash_penalty: f64,
    /// Max magnitude of the seeded placement perturbation at reset (m).
    pub placement_jitter: f64,
    /// How many learner-tagged vehicles carry live agents (the rest of the
    /// odd slots fall back to baseline drivers). 7 in the paper scenario.
    pub learner_count: usize,
    pub idm: IdmParams,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            loop_radius: 30.0,
            conflict_half_length: 5.0,
            vehicle_length: 5.0,
            v_max: 8.0,
            b_emergency: 9.0,
            crash_threshold: 0.1,
            lookahead_horizon: 3.0,
            crash_penalty: 10.0,
            placement_jitter: 0.5,
            learner_count: 7,
            idm: IdmParams::default(),
        }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<(), TrafficError> {
        let mut problems = Vec::new();
        let positives = [
            ("loop_radius", self.loop_radius),
            ("vehicle_length", self.vehicle_length),
            ("v_max", self.v_max),
            ("b_emergency", self.b_emergency),
            ("crash_threshold", self.crash_threshold),
            ("lookahead_horizon", self.lookahead_horizon),
        ];
        for (name, value) in positives {
            if !(value > 0.0) || !value.is_finite() {
                problems.push(format!("{name} must be positive, got {value}"));
            }
        }
        if !(self.conflict_half_length >= 0.0) || !self.conflict_half_length.is_finite() {
            problems.push(format!(
                "conflict_half_length must be non-negative, got {}",
                self.conflict_half_length
            ));
        }
        if !(self.crash_penalty >= 0.0) || !self.crash_penalty.is_finite() {
            problems.push(format!(
                "crash_penalty must be non-negative, got {}",
                self.crash_penalty
            ));
        }
        if !(self.placement_jitter >= 0.0) || !self.placement_jitter.is_finite() {
            problems.push(format!(
                "placement_jitter must be non-negative, got {}",
                self.placement_jitter
            ));
        }
        if self.learner_count > VEHICLE_COUNT / 2 {
            problems.push(format!(
                "learner_count must be at most {}, got {}",
                VEHICLE_COUNT / 2,
                self.learner_count
            ));
        }
        if let Err(e) = self.idm.validate() {
            problems.push(e);
        }
        if problems.is_empty() {
            // Jitter must not let neighbors spawn within a crash gap.
            let spacing =
                4.0 * std::f64::consts::PI * self.loop_radius / VEHICLE_COUNT as f64;
            let slack = spacing - self.vehicle_length - self.crash_threshold;
            if 2.0 * self.placement_jitter >= slack {
                problems.push(format!(
                    "placement_jitter {} too large for spacing {spacing:.2}",
                    self.placement_jitter
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(TrafficError::InvalidConfig(problems.join("; ")))
        }
    }
}
