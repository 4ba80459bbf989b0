//! The fixed-step scheduler that ties routing, perception and motion together.
//!
//! A [`World`] advances all agents synchronously from a snapshot of the
//! previous tick, so agent order never changes the outcome. [`run`] drives a
//! world to completion and returns the trace plus a [`MetricsReport`].

mod check;
mod engine;
mod eval;
mod metrics;
mod scenario;
mod trace;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use check::{red_light_violations, RedLightViolation};
pub use engine::{Agent, World};
pub use eval::{evaluate_modes, overlay_svg, EvalReport, ModeEntry, ModeRun};
pub use metrics::{AgentMetrics, AgentReport, MetricsReport, Summary, WorkCounters};
pub use scenario::{
    AgentSpec, BehaviorConfig, Mode, PerceptionConfig, ScenarioConfig, VehicleConfig, SCHEMA,
};
pub use trace::{parse_trace, AgentRecord, EventRecord, LightRecord, TickRecord};

use crate::motion::MotionError;
use crate::network::{NetworkError, RoadNetwork};
use crate::routing::RouteError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("routing failed: {0}")]
    Route(#[from] RouteError),
    #[error("agent {agent}: goal {to} is unreachable from {from}")]
    Unreachable { agent: usize, from: String, to: String },
    #[error("agent {agent}: spawn point is not on a passable grid cell")]
    SpawnBlocked { agent: usize },
    #[error("agent {agent}: goal is not on a passable grid cell")]
    GoalBlocked { agent: usize },
    #[error("agent {agent}: grid planning failed: {source}")]
    Plan { agent: usize, source: MotionError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Driving,
    Stopped,
    Parked,
    Collided,
}

/// Loads the scenario's network and runs it to the end.
pub fn run(cfg: ScenarioConfig) -> Result<(Vec<TickRecord>, MetricsReport), SimError> {
    let net = RoadNetwork::load(&cfg.network)?;
    Ok(World::new(cfg, net)?.run())
}
