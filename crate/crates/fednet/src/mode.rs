use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The six experiment arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// All 14 vehicles driven by the IDM controller; no learning.
    #[serde(rename = "baseline")]
    Baseline,
    /// Independent reinforcement learning: no server, no messages.
    #[serde(rename = "irl")]
    Irl,
    /// Federated IRL over the perfect channel.
    #[serde(rename = "firl")]
    Firl,
    /// Federated IRL with synchronous 4-epoch upload / 2-epoch download delay.
    #[serde(rename = "firl-d")]
    FirlD,
    /// Delayed channel plus per-message random extra delay (reordering).
    #[serde(rename = "firl-d-or")]
    FirlDOr,
    /// Rate-limited uplink: one merged upload per 6 minibatches.
    #[serde(rename = "firl-d-lm")]
    FirlDLm,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Baseline,
        Mode::Irl,
        Mode::Firl,
        Mode::FirlD,
        Mode::FirlDOr,
        Mode::FirlDLm,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Irl => "irl",
            Mode::Firl => "firl",
            Mode::FirlD => "firl-d",
            Mode::FirlDOr => "firl-d-or",
            Mode::FirlDLm => "firl-d-lm",
        }
    }

    /// Whether vehicles learn at all in this mode.
    pub fn is_learning(&self) -> bool {
        *self != Mode::Baseline
    }

    /// Whether gradients travel through a server.
    pub fn is_federated(&self) -> bool {
        matches!(self, Mode::Firl | Mode::FirlD | Mode::FirlDOr | Mode::FirlDLm)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .iter()
            .find(|m| m.label() == s)
            .copied()
            .ok_or_else(|| format!("unknown mode '{s}' (expected one of baseline, irl, firl, firl-d, firl-d-or, firl-d-lm)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.label().parse::<Mode>().unwrap(), m);
        }
        assert!("nope".parse::<Mode>().is_err());
    }

    #[test]
    fn classification() {
        assert!(!Mode::Baseline.is_learning());
        assert!(Mode::Irl.is_learning());
        assert!(!Mode::Irl.is_federated());
        assert!(Mode::FirlDLm.is_federated());
    }
}
