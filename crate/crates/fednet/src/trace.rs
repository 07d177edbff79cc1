use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// One audited network event. Times and latencies are simulated seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    GradientSent {
        time: f64,
        agent: usize,
        round: u64,
    },
    GradientDelivered {
        time: f64,
        agent: usize,
        round: u64,
        latency: f64,
    },
    RoundAggregated {
        time: f64,
        round: u64,
        version: u64,
    },
    ModelSent {
        time: f64,
        agent: usize,
        version: u64,
    },
    ModelApplied {
        time: f64,
        agent: usize,
        version: u64,
        latency: f64,
    },
}

/// Append-only record of every send, delivery, aggregation and model
/// application in one run; exports as line-delimited JSON.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventTrace {
    events: Vec<TraceEvent>,
}

impl EventTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_jsonl().as_bytes())
    }

    pub fn parse_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<TraceEvent>, _>>()?;
        Ok(Self { events })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trips() {
        let mut trace = EventTrace::new();
        trace.push(TraceEvent::GradientSent {
            time: 25.6,
            agent: 3,
            round: 1,
        });
        trace.push(TraceEvent::GradientDelivered {
            time: 625.6,
            agent: 3,
            round: 1,
            latency: 600.0,
        });
        trace.push(TraceEvent::RoundAggregated {
            time: 625.6,
            round: 1,
            version: 1,
        });
        let text = trace.to_jsonl();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("\"kind\":\"gradient_sent\""));
        let back = EventTrace::parse_jsonl(&text).unwrap();
        assert_eq!(back, trace);
    }
}
