use std::collections::BTreeMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use fedring_learner::{
    merge_gradients, Agent, Gradient, LearnerConfig, QNetwork, Transition,
    MINIBATCH_INTERVAL_STEPS,
};
use fedring_traffic::{
    build_figure_eight, conflict_yield_acceleration, idm_control, intersection_gate, observe,
    reset_epoch, reward, step, Controller, TrackGeometry, TrafficConfig, MAX_STEPS_PER_EPOCH,
    STEP_SECONDS,
};

use crate::channel::{ChannelModel, FedConfig};
use crate::error::FednetError;
use crate::message::{GradientMsg, ModelMsg, TransitQueue};
use crate::mode::Mode;
use crate::seeds::{derive_seed, SeedStream};
use crate::server::FedServer;
use crate::trace::{EventTrace, TraceEvent};
use crate::{ticks_to_seconds, Tick};

/// Everything one run needs: scenario physics, per-agent hyperparameters,
/// channel knobs and the epoch budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub traffic: TrafficConfig,
    pub learner: LearnerConfig,
    pub fed: FedConfig,
    pub epochs: u32,
    /// Record agent 0's parameter vector after every round (test oracle).
    #[serde(skip)]
    pub record_params: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            traffic: TrafficConfig::default(),
            learner: LearnerConfig::default(),
            fed: FedConfig::default(),
            epochs: 300,
            record_params: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), FednetError> {
        self.traffic.validate()?;
        self.learner.validate()?;
        self.fed.validate()?;
        if self.epochs == 0 {
            return Err(FednetError::InvalidConfig(
                "epochs must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn server_learning_rate(&self) -> f64 {
        self.fed
            .server_learning_rate
            .unwrap_or(self.learner.learning_rate)
    }
}

/// Per-epoch scalar metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch_index: u32,
    /// Mean vehicle speed averaged over the epoch's steps (m/s).
    pub mean_speed: f64,
    pub crashed: bool,
    pub steps: u32,
    pub cumulative_reward: f64,
}

/// What one run leaves behind.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub mode: Mode,
    pub run_seed: u64,
    pub epochs: Vec<EpochStats>,
    pub trace: EventTrace,
    /// Final local model of each agent (empty for the baseline).
    pub final_models: Vec<QNetwork>,
    /// The shared initial model every agent started from.
    pub initial_params: Vec<f64>,
    /// Agent 0's parameters after each round, when recording is on.
    pub param_history: Vec<Vec<f64>>,
}

/// Decodes a broadcast model message into the receiving agent's layout.
/// Application is an unconditional overwrite: under a reordering channel a
/// stale version replaces a newer one, which is the failure mode under test.
pub fn apply_model_msg(current: &QNetwork, msg: &ModelMsg) -> Result<QNetwork, FednetError> {
    let net = QNetwork::from_bytes(&msg.payload)?;
    if !net.same_layout(current) {
        return Err(FednetError::Learner(fedring_learner::LearnerError::Shape(
            format!(
                "broadcast model layout {:?} does not match agent layout {:?}",
                net.layer_sizes(),
                current.layer_sizes()
            ),
        )));
    }
    Ok(net)
}

struct Engine {
    mode: Mode,
    cfg: TrainingConfig,
    geom: TrackGeometry,
    world_seed: u64,
    agents: Vec<Agent>,
    server: Option<FedServer>,
    channel: Option<ChannelModel>,
    channel_rng: ChaCha8Rng,
    uplink: TransitQueue<GradientMsg>,
    downlink: TransitQueue<ModelMsg>,
    /// Per-agent gradients awaiting a merged upload (LocalMerge cadence).
    merge_acc: Vec<Vec<Gradient>>,
    trace: EventTrace,
    global_tick: Tick,
    total_steps: u64,
    param_history: Vec<Vec<f64>>,
}

impl Engine {
    fn new(mode: Mode, cfg: &TrainingConfig, run_seed: u64) -> Result<Self, FednetError> {
        cfg.validate()?;
        let geom = build_figure_eight(cfg.traffic.loop_radius, cfg.traffic.conflict_half_length)?;
        let n_agents = cfg.traffic.learner_count;
        let mut initial = QNetwork::xavier_init(
            cfg.learner.layer_sizes(),
            derive_seed(run_seed, SeedStream::Model),
        )?;
        initial.offset_output_biases(cfg.learner.optimistic_init);
        let agents = (0..n_agents)
            .map(|i| {
                Agent::new(
                    i,
                    initial.clone(),
                    cfg.learner.clone(),
                    derive_seed(run_seed, SeedStream::Agent(i)),
                )
            })
            .collect();
        let server = mode.is_federated().then(|| {
            FedServer::new(initial.clone(), n_agents, cfg.server_learning_rate())
        });
        Ok(Self {
            mode,
            cfg: cfg.clone(),
            geom,
            world_seed: derive_seed(run_seed, SeedStream::World),
            agents,
            server,
            channel: ChannelModel::for_mode(mode, &cfg.fed),
            channel_rng: ChaCha8Rng::seed_from_u64(derive_seed(run_seed, SeedStream::Channel)),
            uplink: TransitQueue::new(),
            downlink: TransitQueue::new(),
            merge_acc: vec![Vec::new(); n_agents],
            trace: EventTrace::new(),
            global_tick: 0,
            total_steps: 0,
            param_history: Vec::new(),
        })
    }

    /// Delivers everything due at `now`, feeding the server and the agents,
    /// until the instant quiesces (a perfect-channel round completes within
    /// one call).
    fn pump(&mut self, now: Tick) -> Result<(), FednetError> {
        loop {
            let mut progressed = false;
            for msg in self.uplink.deliver_due(now) {
                progressed = true;
                self.trace.push(TraceEvent::GradientDelivered {
                    time: ticks_to_seconds(msg.deliver_tick),
                    agent: msg.agent_id,
                    round: msg.round_index,
                    latency: ticks_to_seconds(msg.deliver_tick - msg.send_tick),
                });
                let server = self.server.as_mut().expect("uplink implies a server");
                let channel = self.channel.as_ref().expect("uplink implies a channel");
                for broadcast in server.ingest(msg, now)? {
                    self.trace.push(TraceEvent::RoundAggregated {
                        time: ticks_to_seconds(now),
                        round: broadcast.round,
                        version: broadcast.version,
                    });
                    for mut m in broadcast.msgs {
                        channel.assign_download(&mut m, &mut self.channel_rng);
                        self.trace.push(TraceEvent::ModelSent {
                            time: ticks_to_seconds(m.send_tick),
                            agent: m.destination_agent,
                            version: m.version,
                        });
                        self.downlink.push(m);
                    }
                }
            }
            for msg in self.downlink.deliver_due(now) {
                progressed = true;
                let agent = &mut self.agents[msg.destination_agent];
                let net = apply_model_msg(agent.net(), &msg)?;
                agent.install_model(net);
                self.trace.push(TraceEvent::ModelApplied {
                    time: ticks_to_seconds(msg.deliver_tick),
                    agent: msg.destination_agent,
                    version: msg.version,
                    latency: ticks_to_seconds(msg.deliver_tick - msg.send_tick),
                });
            }
            if !progressed {
                return Ok(());
            }
        }
    }

    /// Minibatch cadence: every agent computes one gradient per 256 steps
    /// and the mode decides where it goes.
    fn training_round(&mut self, round: u64) -> Result<(), FednetError> {
        let mut trained = false;
        for idx in 0..self.agents.len() {
            if !self.agents[idx].ready() {
                continue;
            }
            trained = true;
            let grad = self.agents[idx].compute_round_gradient(round)?;
            if self.mode == Mode::Irl {
                self.agents[idx].apply_local(&grad)?;
                continue;
            }
            let channel = self.channel.as_ref().expect("federated mode has a channel");
            self.merge_acc[idx].push(grad);
            if self.merge_acc[idx].len() as u32 >= channel.merge_count() {
                let merged = merge_gradients(&self.merge_acc[idx])?;
                self.merge_acc[idx].clear();
                let upload_round = merged.round_index;
                let mut msg = GradientMsg {
                    agent_id: idx,
                    round_index: upload_round,
                    payload: merged,
                    send_tick: self.global_tick,
                    deliver_tick: self.global_tick,
                    msg_id: 0,
                };
                channel.assign_upload(&mut msg, &mut self.channel_rng);
                self.trace.push(TraceEvent::GradientSent {
                    time: ticks_to_seconds(self.global_tick),
                    agent: idx,
                    round: upload_round,
                });
                self.server
                    .as_mut()
                    .expect("federated mode has a server")
                    .announce_round(upload_round);
                self.uplink.push(msg);
            }
        }
        if trained {
            // A perfect channel completes the round within this same tick.
            self.pump(self.global_tick)?;
            for agent in &mut self.agents {
                agent.sync_target_if_due(round);
            }
            if self.cfg.record_params {
                self.param_history
                    .push(self.agents[0].net().params().to_vec());
            }
        }
        Ok(())
    }

    fn run_epoch(&mut self, epoch: u32, all_idm: bool) -> Result<EpochStats, FednetError> {
        let epsilon = self.cfg.learner.epsilon.at_epoch(epoch);
        let mut world = reset_epoch(&self.geom, self.world_seed, &self.cfg.traffic);
        world.epoch_index = epoch;
        let mut speed_sum = 0.0;
        let mut reward_sum = 0.0;
        let mut steps = 0u32;

        for _ in 0..MAX_STEPS_PER_EPOCH {
            self.pump(self.global_tick)?;

            let gated = intersection_gate(&world, &self.geom, self.cfg.traffic.lookahead_horizon);
            let mut accel: BTreeMap<usize, f64> = BTreeMap::new();
            let mut pending: Vec<(usize, usize, fedring_traffic::Observation, usize)> = Vec::new();
            for v in &world.vehicles {
                match v.controller {
                    Controller::Learner(aid) if !all_idm => {
                        let obs = observe(&world, &self.geom, v.id, self.cfg.traffic.v_max)?;
                        let action = self.agents[aid].act(&obs, epsilon)?;
                        // The gate constrains learners too: the policy picks
                        // the acceleration, the intersection controller caps
                        // it while the vehicle must yield.
                        let mut a = self.agents[aid].action_value(action);
                        if gated.contains(&v.id) {
                            a = a.min(conflict_yield_acceleration(
                                &world,
                                &self.geom,
                                &self.cfg.traffic,
                                v.id,
                            )?);
                        }
                        accel.insert(v.id, a);
                        pending.push((aid, v.id, obs, action));
                    }
                    _ => {
                        accel.insert(
                            v.id,
                            idm_control(&world, &self.geom, &self.cfg.traffic, &gated, v.id)?,
                        );
                    }
                }
            }

            let next = step(&world, &accel, STEP_SECONDS, &self.geom, &self.cfg.traffic)?;
            let r = reward(
                &world,
                &next,
                self.cfg.traffic.v_max,
                self.cfg.traffic.crash_penalty,
            );
            for (aid, vid, obs, action) in pending {
                let next_obs = observe(&next, &self.geom, vid, self.cfg.traffic.v_max)?;
                self.agents[aid].record(Transition {
                    obs,
                    action_index: action,
                    reward: r,
                    next_obs,
                    terminal: next.crashed,
                });
            }

            speed_sum += next.mean_speed();
            reward_sum += r;
            steps += 1;
            self.global_tick += 1;
            self.total_steps += 1;

            if !all_idm && self.total_steps % MINIBATCH_INTERVAL_STEPS == 0 {
                let round = self.total_steps / MINIBATCH_INTERVAL_STEPS;
                self.training_round(round)?;
            }

            let crashed = next.crashed;
            world = next;
            if crashed {
                break;
            }
        }

        // The epoch is nominally 150 s; a crash freezes traffic for its
        // remainder, so the per-epoch mean speed averages over the full
        // nominal duration. A fast fleet that dies early still scores low.
        Ok(EpochStats {
            epoch_index: epoch,
            mean_speed: speed_sum / f64::from(MAX_STEPS_PER_EPOCH),
            crashed: world.crashed,
            steps,
            cumulative_reward: reward_sum,
        })
    }

    /// Flushes in-flight messages after the last epoch so every sent message
    /// is delivered exactly once.
    fn drain(&mut self) -> Result<(), FednetError> {
        while !self.uplink.is_empty() || !self.downlink.is_empty() {
            let next = self
                .uplink
                .next_deliver_tick()
                .into_iter()
                .chain(self.downlink.next_deliver_tick())
                .min()
                .expect("non-empty queues have a next delivery");
            self.global_tick = self.global_tick.max(next);
            self.pump(self.global_tick)?;
        }
        Ok(())
    }

    fn finish(mut self, run_seed: u64, initial_params: Vec<f64>, epochs: Vec<EpochStats>) -> Result<RunOutcome, FednetError> {
        self.drain()?;
        debug_assert_eq!(self.uplink.sent_count(), self.uplink.delivered_count());
        debug_assert_eq!(self.downlink.sent_count(), self.downlink.delivered_count());
        Ok(RunOutcome {
            mode: self.mode,
            run_seed,
            epochs,
            trace: self.trace,
            final_models: self.agents.iter().map(|a| a.net().clone()).collect(),
            initial_params,
            param_history: self.param_history,
        })
    }
}

/// Runs one of the five learning modes for `cfg.epochs` epochs.
///
/// Learner vehicles act epsilon-greedily on their current local model, push
/// transitions every step and compute one minibatch gradient per 256 steps.
/// IRL applies gradients locally and never communicates; federated modes
/// route them through the mode's channel and server. The returned trace
/// records every send, delivery, aggregation and model application.
pub fn run_federated_epochs(
    mode: Mode,
    cfg: &TrainingConfig,
    run_seed: u64,
) -> Result<RunOutcome, FednetError> {
    if mode == Mode::Baseline {
        return Err(FednetError::BaselineNotTrainable);
    }
    let mut engine = Engine::new(mode, cfg, run_seed)?;
    let initial_params = engine.agents[0].net().params().to_vec();
    let mut epochs = Vec::with_capacity(cfg.epochs as usize);
    for epoch in 0..cfg.epochs {
        epochs.push(engine.run_epoch(epoch, false)?);
    }
    engine.finish(run_seed, initial_params, epochs)
}

/// Runs the all-IDM baseline: every vehicle drives with the IDM controller
/// regardless of its controller tag; no learning, no messages.
pub fn run_baseline_epochs(cfg: &TrainingConfig, run_seed: u64) -> Result<RunOutcome, FednetError> {
    let mut engine = Engine::new(Mode::Baseline, cfg, run_seed)?;
    let mut epochs = Vec::with_capacity(cfg.epochs as usize);
    for epoch in 0..cfg.epochs {
        epochs.push(engine.run_epoch(epoch, true)?);
    }
    let mut outcome = engine.finish(run_seed, Vec::new(), epochs)?;
    outcome.final_models.clear();
    Ok(outcome)
}
