//! JSON Lines trace records.

use serde::{Deserialize, Serialize};

use crate::network::LightColor;
use crate::perception::PerceptionEvent;

use super::{Status, SCHEMA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub steering: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightRecord {
    pub index: usize,
    pub color: LightColor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub listener: usize,
    pub source: String,
    pub change: String,
}

impl From<&PerceptionEvent> for EventRecord {
    fn from(e: &PerceptionEvent) -> Self {
        EventRecord { listener: e.listener, source: e.source.to_string(), change: format!("{:?}", e.change) }
    }
}

/// One line of the trace: the world at tick `tick`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub schema: String,
    pub tick: u64,
    pub t: f64,
    pub agents: Vec<AgentRecord>,
    pub events: Vec<EventRecord>,
    pub lights: Vec<LightRecord>,
}

impl TickRecord {
    pub fn new(tick: u64, t: f64) -> Self {
        TickRecord { schema: SCHEMA.to_owned(), tick, t, agents: Vec::new(), events: Vec::new(), lights: Vec::new() }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Parses a whole JSON Lines trace.
pub fn parse_trace(text: &str) -> Result<Vec<TickRecord>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}
