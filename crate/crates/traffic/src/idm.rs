use serde::{Deserialize, Serialize};

/// Intelligent Driver Model parameters for the baseline (human-proxy) cars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdmParams {
    /// Desired free-road speed (m/s).
    pub v0: f64,
    /// Safe time headway (s).
    pub t_headway: f64,
    /// Maximum acceleration (m/s^2).
    pub a_max: f64,
    /// Comfortable deceleration (m/s^2).
    pub b_comfort: f64,
    /// Acceleration exponent.
    pub delta: f64,
    /// Minimum standstill gap (m).
    pub s0: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            v0: 8.0,
            t_headway: 1.0,
            a_max: 1.0,
            b_comfort: 1.5,
            delta: 4.0,
            s0: 2.0,
        }
    }
}

impl IdmParams {
    pub fn validate(&self) -> Result<(), String> {
        let positives = [
            ("v0", self.v0),
            ("t_headway", self.t_headway),
            ("a_max", self.a_max),
            ("b_comfort", self.b_comfort),
            ("s0", self.s0),
        ];
        for (name, value) in positives {
            if !(value > 0.0) || !value.is_finite() {
                return Err(format!("idm.{name} must be positive, got {value}"));
            }
        }
        if !(self.delta >= 1.0) || !self.delta.is_finite() {
            return Err(format!("idm.delta must be >= 1, got {}", self.delta));
        }
        Ok(())
    }
}

/// IDM car-following acceleration.
///
/// `a = a_max * (1 - (v/v0)^delta - (s*/gap)^2)` with the desired gap
/// `s* = s0 + v*T + v*(v - v_lead) / (2*sqrt(a_max*b))`, floored at `s0` so
/// a fast-receding leader cannot produce a phantom approach term. The result
/// is clamped into `[-b_emergency, a_max]`.
///
/// Callers must route `gap <= 0` to crash handling instead of calling this.
pub fn idm_acceleration(
    v: f64,
    v_lead: f64,
    gap: f64,
    params: &IdmParams,
    b_emergency: f64,
) -> f64 {
    debug_assert!(gap > 0.0, "idm_acceleration requires a positive gap");
    debug_assert!(v >= 0.0 && v_lead >= 0.0);
    let approach = v * (v - v_lead) / (2.0 * (params.a_max * params.b_comfort).sqrt());
    let s_star = (params.s0 + v * params.t_headway + approach).max(params.s0);
    let a = params.a_max * (1.0 - (v / params.v0).powf(params.delta) - (s_star / gap).powi(2));
    a.clamp(-b_emergency, params.a_max)
}
