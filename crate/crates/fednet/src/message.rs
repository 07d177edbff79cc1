use fedring_learner::Gradient;

use crate::Tick;

/// A gradient on its way from an agent to the server.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMsg {
    pub payload: Gradient,
    pub agent_id: usize,
    pub round_index: u64,
    pub send_tick: Tick,
    pub deliver_tick: Tick,
    /// Assigned by the transit queue; breaks delivery-order ties.
    pub msg_id: u64,
}

/// A serialized global model on its way from the server to one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMsg {
    pub payload: Vec<u8>,
    pub version: u64,
    pub send_tick: Tick,
    pub deliver_tick: Tick,
    pub destination_agent: usize,
    pub msg_id: u64,
}

/// Anything the transit queue can carry.
pub trait InTransit {
    fn send_tick(&self) -> Tick;
    fn deliver_tick(&self) -> Tick;
    fn msg_id(&self) -> u64;
    fn set_msg_id(&mut self, id: u64);
}

impl InTransit for GradientMsg {
    fn send_tick(&self) -> Tick {
        self.send_tick
    }
    fn deliver_tick(&self) -> Tick {
        self.deliver_tick
    }
    fn msg_id(&self) -> u64 {
        self.msg_id
    }
    fn set_msg_id(&mut self, id: u64) {
        self.msg_id = id;
    }
}

impl InTransit for ModelMsg {
    fn send_tick(&self) -> Tick {
        self.send_tick
    }
    fn deliver_tick(&self) -> Tick {
        self.deliver_tick
    }
    fn msg_id(&self) -> u64 {
        self.msg_id
    }
    fn set_msg_id(&mut self, id: u64) {
        self.msg_id = id;
    }
}

/// The set of messages currently in flight on one link direction.
///
/// Deliveries come out in `(deliver_tick, send_tick, msg_id)` order; under
/// the out-of-order channel that order can invert send order, which is
/// exactly the reordering mechanism under test.
#[derive(Debug, Clone, Default)]
pub struct TransitQueue<M: InTransit> {
    pending: Vec<M>,
    next_id: u64,
    sent: u64,
    delivered: u64,
}

impl<M: InTransit> TransitQueue<M> {
    pub fn new() -> Self {
        Self {
            pending: Vec::new(),
            next_id: 0,
            sent: 0,
            delivered: 0,
        }
    }

    pub fn push(&mut self, mut msg: M) {
        debug_assert!(msg.deliver_tick() >= msg.send_tick());
        msg.set_msg_id(self.next_id);
        self.next_id += 1;
        self.sent += 1;
        self.pending.push(msg);
    }

    /// Removes and returns every message due at or before `now`.
    pub fn deliver_due(&mut self, now: Tick) -> Vec<M> {
        let mut due = Vec::new();
        let mut i = 0;
        while i < self.pending.len() {
            if self.pending[i].deliver_tick() <= now {
                due.push(self.pending.swap_remove(i));
            } else {
                i += 1;
            }
        }
        due.sort_by_key(|m| (m.deliver_tick(), m.send_tick(), m.msg_id()));
        self.delivered += due.len() as u64;
        due
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn next_deliver_tick(&self) -> Option<Tick> {
        self.pending.iter().map(|m| m.deliver_tick()).min()
    }

    pub fn sent_count(&self) -> u64 {
        self.sent
    }

    pub fn delivered_count(&self) -> u64 {
        self.delivered
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(send: Tick, deliver: Tick, version: u64) -> ModelMsg {
        ModelMsg {
            payload: Vec::new(),
            version,
            send_tick: send,
            deliver_tick: deliver,
            destination_agent: 0,
            msg_id: 0,
        }
    }

    #[test]
    fn empty_queue_delivers_nothing() {
        let mut q: TransitQueue<ModelMsg> = TransitQueue::new();
        assert!(q.deliver_due(1_000).is_empty());
    }

    #[test]
    fn extra_delay_can_invert_send_order() {
        // v1 sent at t=0 with 2 extra epochs, v2 sent at t=1500 with none;
        // base download delay 2 epochs. v2 lands at 4500, v1 at 6000.
        let mut q = TransitQueue::new();
        q.push(msg(0, 0 + 3000 + 3000, 1));
        q.push(msg(1500, 1500 + 3000, 2));
        assert!(q.deliver_due(4499).is_empty());
        let first = q.deliver_due(4500);
        assert_eq!(first.len(), 1);
        assert_eq!(first[0].version, 2);
        let second = q.deliver_due(6000);
        assert_eq!(second[0].version, 1);
        assert_eq!(q.delivered_count(), 2);
        assert_eq!(q.sent_count(), 2);
    }

    #[test]
    fn ties_break_by_send_time_then_id() {
        let mut q = TransitQueue::new();
        q.push(msg(5, 10, 1));
        q.push(msg(3, 10, 2));
        q.push(msg(3, 10, 3));
        let due = q.deliver_due(10);
        let versions: Vec<u64> = due.iter().map(|m| m.version).collect();
        // send 3 before send 5; among equal sends, lower msg_id first
        // (version 2 was pushed before version 3).
        assert_eq!(versions, vec![2, 3, 1]);
    }

    #[test]
    fn delivery_is_exactly_once() {
        let mut q = TransitQueue::new();
        q.push(msg(0, 5, 1));
        assert_eq!(q.deliver_due(5).len(), 1);
        assert!(q.deliver_due(5).is_empty());
        assert!(q.is_empty());
    }
}
