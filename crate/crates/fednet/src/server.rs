use std::collections::{BTreeMap, BTreeSet};

use fedring_learner::{apply_gradient, merge_gradients, Gradient, QNetwork};

use crate::error::FednetError;
use crate::message::{GradientMsg, ModelMsg};
use crate::Tick;

/// One completed aggregation: the new version plus the per-agent downlink
/// messages, delivery times still unassigned.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBroadcast {
    pub round: u64,
    pub version: u64,
    pub msgs: Vec<ModelMsg>,
}

/// Central aggregation server.
///
/// Gradients are keyed by round; a round aggregates once all agents'
/// gradients for it have arrived, and rounds aggregate strictly in round
/// order. The training schedule announces each round when its uploads are
/// sent, so a fully delivered later round still waits for an in-flight
/// earlier one.
#[derive(Debug, Clone)]
pub struct FedServer {
    global_model: QNetwork,
    version: u64,
    server_learning_rate: f64,
    num_agents: usize,
    open_rounds: BTreeSet<u64>,
    pending: BTreeMap<u64, BTreeMap<usize, Gradient>>,
    last_aggregated: Option<u64>,
}

impl FedServer {
    pub fn new(global_model: QNetwork, num_agents: usize, server_learning_rate: f64) -> Self {
        Self {
            global_model,
            version: 0,
            server_learning_rate,
            num_agents,
            open_rounds: BTreeSet::new(),
            pending: BTreeMap::new(),
            last_aggregated: None,
        }
    }

    pub fn global_model(&self) -> &QNetwork {
        &self.global_model
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    /// Number of rounds with at least one received, unaggregated gradient.
    pub fn pending_rounds(&self) -> usize {
        self.pending.len()
    }

    /// Tells the server a round's uploads are on the wire. Idempotent.
    pub fn announce_round(&mut self, round: u64) {
        if Some(round) > self.last_aggregated || self.last_aggregated.is_none() {
            self.open_rounds.insert(round);
        }
    }

    /// Ingests one delivered gradient. Returns the broadcasts of every round
    /// this arrival completed (several when it unblocks queued-up rounds).
    pub fn ingest(
        &mut self,
        msg: GradientMsg,
        now: Tick,
    ) -> Result<Vec<ModelBroadcast>, FednetError> {
        if msg.agent_id >= self.num_agents {
            return Err(FednetError::UnknownAgent(msg.agent_id));
        }
        if Some(msg.round_index) <= self.last_aggregated {
            return Err(FednetError::StaleRound {
                agent: msg.agent_id,
                round: msg.round_index,
            });
        }
        self.open_rounds.insert(msg.round_index);
        let slot = self.pending.entry(msg.round_index).or_default();
        if slot.contains_key(&msg.agent_id) {
            return Err(FednetError::DuplicateGradient {
                agent: msg.agent_id,
                round: msg.round_index,
            });
        }
        slot.insert(msg.agent_id, msg.payload);

        let mut broadcasts = Vec::new();
        while let Some(&round) = self.open_rounds.first() {
            let complete = self
                .pending
                .get(&round)
                .is_some_and(|slot| slot.len() == self.num_agents);
            if !complete {
                break;
            }
            let slot = self.pending.remove(&round).expect("checked above");
            self.open_rounds.remove(&round);
            // BTreeMap iteration fixes the summation order by agent id, so
            // the mean is independent of arrival order.
            let gradients: Vec<Gradient> = slot.into_values().collect();
            let mean = merge_gradients(&gradients)?;
            self.global_model =
                apply_gradient(&self.global_model, &mean, self.server_learning_rate)?;
            self.version += 1;
            self.last_aggregated = Some(round);
            let payload = self.global_model.to_bytes();
            let msgs = (0..self.num_agents)
                .map(|agent| ModelMsg {
                    payload: payload.clone(),
                    version: self.version,
                    send_tick: now,
                    deliver_tick: now,
                    destination_agent: agent,
                    msg_id: 0,
                })
                .collect();
            broadcasts.push(ModelBroadcast {
                round,
                version: self.version,
                msgs,
            });
        }
        Ok(broadcasts)
    }
}
