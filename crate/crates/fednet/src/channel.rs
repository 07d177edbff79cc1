use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::FednetError;
use crate::message::{GradientMsg, ModelMsg};
use crate::mode::Mode;
use crate::{Tick, EPOCH_TICKS};

/// Channel knobs shared by all federated modes; each mode picks the variant
/// it needs out of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FedConfig {
    /// Server-side descent step; defaults to the agents' learning rate.
    pub server_learning_rate: Option<f64>,
    /// Synchronous uplink delay, in 150 s epochs.
    pub upload_delay_epochs: u32,
    /// Synchronous downlink delay, in 150 s epochs.
    pub download_delay_epochs: u32,
    /// Out-of-order channel: per-message extra delay drawn uniformly from
    /// `{0, ..., max_extra_delay_epochs}` epochs.
    pub max_extra_delay_epochs: u32,
    /// Local-merge channel: minibatches merged per upload.
    pub merge_count: u32,
}

impl Default for FedConfig {
    fn default() -> Self {
        Self {
            server_learning_rate: None,
            upload_delay_epochs: 4,
            download_delay_epochs: 2,
            max_extra_delay_epochs: 3,
            merge_count: 6,
        }
    }
}

impl FedConfig {
    pub fn validate(&self) -> Result<(), FednetError> {
        if let Some(lr) = self.server_learning_rate {
            if !(lr > 0.0) || !lr.is_finite() {
                return Err(FednetError::InvalidConfig(format!(
                    "server_learning_rate must be positive, got {lr}"
                )));
            }
        }
        if self.merge_count == 0 {
            return Err(FednetError::InvalidConfig(
                "merge_count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// The four transport variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    Perfect,
    SyncDelay {
        up_epochs: u32,
        down_epochs: u32,
    },
    OutOfOrder {
        up_epochs: u32,
        down_epochs: u32,
        max_extra_epochs: u32,
    },
    LocalMerge {
        merge_count: u32,
    },
}

/// A channel variant bound to the epoch duration it counts delays in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub epoch_ticks: Tick,
}

impl ChannelModel {
    /// The channel a federated mode runs over; `None` for modes without a
    /// server (Baseline, IRL).
    pub fn for_mode(mode: Mode, cfg: &FedConfig) -> Option<ChannelModel> {
        let kind = match mode {
            Mode::Baseline | Mode::Irl => return None,
            Mode::Firl => ChannelKind::Perfect,
            Mode::FirlD => ChannelKind::SyncDelay {
                up_epochs: cfg.upload_delay_epochs,
                down_epochs: cfg.download_delay_epochs,
            },
            Mode::FirlDOr => ChannelKind::OutOfOrder {
                up_epochs: cfg.upload_delay_epochs,
                down_epochs: cfg.download_delay_epochs,
                max_extra_epochs: cfg.max_extra_delay_epochs,
            },
            Mode::FirlDLm => ChannelKind::LocalMerge {
                merge_count: cfg.merge_count,
            },
        };
        Some(ChannelModel {
            kind,
            epoch_ticks: EPOCH_TICKS,
        })
    }

    /// Uploads per minibatch round: 1 for everything except LocalMerge.
    pub fn merge_count(&self) -> u32 {
        match self.kind {
            ChannelKind::LocalMerge { merge_count } => merge_count,
            _ => 1,
        }
    }

    fn upload_delay<R: Rng>(&self, rng: &mut R) -> Tick {
        match self.kind {
            ChannelKind::Perfect | ChannelKind::LocalMerge { .. } => 0,
            ChannelKind::SyncDelay { up_epochs, .. } => Tick::from(up_epochs) * self.epoch_ticks,
            ChannelKind::OutOfOrder {
                up_epochs,
                max_extra_epochs,
                ..
            } => {
                let extra = rng.random_range(0..=u64::from(max_extra_epochs));
                (Tick::from(up_epochs) + extra) * self.epoch_ticks
            }
        }
    }

    fn download_delay<R: Rng>(&self, rng: &mut R) -> Tick {
        match self.kind {
            ChannelKind::Perfect | ChannelKind::LocalMerge { .. } => 0,
            ChannelKind::SyncDelay { down_epochs, .. } => {
                Tick::from(down_epochs) * self.epoch_ticks
            }
            ChannelKind::OutOfOrder {
                down_epochs,
                max_extra_epochs,
                ..
            } => {
                let extra = rng.random_range(0..=u64::from(max_extra_epochs));
                (Tick::from(down_epochs) + extra) * self.epoch_ticks
            }
        }
    }

    /// Stamps a gradient upload with its delivery time. Only the
    /// out-of-order channel consumes rng (one bounded draw per message).
    pub fn assign_upload<R: Rng>(&self, msg: &mut GradientMsg, rng: &mut R) {
        msg.deliver_tick = msg.send_tick + self.upload_delay(rng);
    }

    /// Stamps a model download with its delivery time; draws are
    /// independent per message and per destination.
    pub fn assign_download<R: Rng>(&self, msg: &mut ModelMsg, rng: &mut R) {
        msg.deliver_tick = msg.send_tick + self.download_delay(rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fedring_learner::Gradient;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn upload(send_tick: Tick) -> GradientMsg {
        GradientMsg {
            payload: Gradient {
                values: vec![0.0],
                source_agent: 0,
                round_index: 1,
            },
            agent_id: 0,
            round_index: 1,
            send_tick,
            deliver_tick: 0,
            msg_id: 0,
        }
    }

    fn download(send_tick: Tick) -> ModelMsg {
        ModelMsg {
            payload: Vec::new(),
            version: 1,
            send_tick,
            deliver_tick: 0,
            destination_agent: 0,
            msg_id: 0,
        }
    }

    #[test]
    fn perfect_channel_is_the_identity() {
        let ch = ChannelModel::for_mode(Mode::Firl, &FedConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut m = upload(256);
        ch.assign_upload(&mut m, &mut rng);
        assert_eq!(m.deliver_tick, 256);
        // send 25.6 s -> deliver 25.6 s
        assert_eq!(crate::ticks_to_seconds(m.deliver_tick), 25.6);
    }

    #[test]
    fn sync_delay_matches_four_and_two_epochs() {
        let ch = ChannelModel::for_mode(Mode::FirlD, &FedConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut up = upload(256);
        ch.assign_upload(&mut up, &mut rng);
        // 25.6 s + 4 * 150 s = 625.6 s
        assert_eq!(up.deliver_tick, 256 + 6000);
        assert_eq!(crate::ticks_to_seconds(up.deliver_tick), 625.6);

        let mut down = download(1500);
        ch.assign_download(&mut down, &mut rng);
        // 150 s + 2 * 150 s = 450 s
        assert_eq!(down.deliver_tick, 4500);
        assert_eq!(crate::ticks_to_seconds(down.deliver_tick), 450.0);
    }

    #[test]
    fn out_of_order_adds_bounded_epoch_multiples() {
        let ch = ChannelModel::for_mode(Mode::FirlDOr, &FedConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen_extra = std::collections::BTreeSet::new();
        for _ in 0..256 {
            let mut m = upload(0);
            ch.assign_upload(&mut m, &mut rng);
            let extra_epochs = (m.deliver_tick - 4 * EPOCH_TICKS) / EPOCH_TICKS;
            assert!(extra_epochs <= 3);
            assert_eq!((m.deliver_tick - 4 * EPOCH_TICKS) % EPOCH_TICKS, 0);
            seen_extra.insert(extra_epochs);
        }
        assert_eq!(seen_extra.len(), 4, "all extra delays should appear");
    }

    #[test]
    fn local_merge_has_no_latency_but_batches_uploads() {
        let ch = ChannelModel::for_mode(Mode::FirlDLm, &FedConfig::default()).unwrap();
        assert_eq!(ch.merge_count(), 6);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut m = upload(999);
        ch.assign_upload(&mut m, &mut rng);
        assert_eq!(m.deliver_tick, 999);
        let perfect = ChannelModel::for_mode(Mode::Firl, &FedConfig::default()).unwrap();
        assert_eq!(perfect.merge_count(), 1);
    }

    #[test]
    fn modes_without_a_server_have_no_channel() {
        assert!(ChannelModel::for_mode(Mode::Baseline, &FedConfig::default()).is_none());
        assert!(ChannelModel::for_mode(Mode::Irl, &FedConfig::default()).is_none());
    }
}
