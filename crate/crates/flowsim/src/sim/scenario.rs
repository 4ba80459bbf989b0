//! Scenario files: which network, which agents, and every tunable.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::motion::{CircleObstacle, ControlLimits, SteeringConfig};
use crate::routing::Algorithm;

use super::SimError;

pub const SCHEMA: &str = "flowsim/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    SplineFollow,
    GridFollow,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::SplineFollow, Mode::GridFollow];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub spawn: String,
    pub goal: String,
    /// Falls back to the scenario's `mode`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub spawn_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleConfig {
    pub wheelbase: f64,
    /// Collision disc radius; also the distance from center to front bumper.
    pub radius: f64,
    pub limits: ControlLimits,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        VehicleConfig { wheelbase: 2.7, radius: 2.25, limits: ControlLimits::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BehaviorConfig {
    /// Time headway of the following rule, seconds.
    pub headway: f64,
    /// Standstill bumper gap, meters.
    pub min_gap: f64,
    /// Distance kept before a stop line, meters.
    pub stop_margin: f64,
    pub parking_tolerance: f64,
    pub lane_half_width: f64,
    /// Deceleration used for planned stops, m/s².
    pub comfort_decel: f64,
    /// Lateral acceleration allowed in curves, m/s².
    pub lateral_accel: f64,
    /// Seconds of green that must remain when the front crosses a stop line.
    pub clearance_margin: f64,
    /// Slow for leaders, obstacles and lights. Off only for crash tests.
    pub avoidance: bool,
    /// Pure-pursuit lookahead for grid paths, meters.
    pub pursuit_lookahead: f64,
    /// Extra clearance when stamping obstacles into the planning grid.
    pub grid_clearance: f64,
    /// Recompute controls every n-th tick in grid mode; 1 means every tick.
    pub grid_decision_interval: u32,
    /// Upper bound on a random delay added to each spawn time.
    pub spawn_jitter: f64,
}

impl Default for BehaviorConfig {
    fn default() -> Self {
        BehaviorConfig {
            headway: 1.5,
            min_gap: 2.0,
            stop_margin: 2.0,
            parking_tolerance: 0.5,
            lane_half_width: 2.5,
            comfort_decel: 3.0,
            lateral_accel: 2.0,
            clearance_margin: 1.0,
            avoidance: true,
            pursuit_lookahead: 6.0,
            grid_clearance: 0.5,
            grid_decision_interval: 1,
            spawn_jitter: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerceptionConfig {
    pub radius: f64,
    pub fov_half_angle: f64,
    pub requires_line_of_sight: bool,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        PerceptionConfig { radius: 80.0, fov_half_angle: 75.0, requires_line_of_sight: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "schema")]
    pub schema: String,
    /// Network file, relative to the scenario file.
    pub network: PathBuf,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_routing", with = "algorithm_name")]
    pub routing: Algorithm,
    #[serde(default)]
    pub vehicle: VehicleConfig,
    #[serde(default)]
    pub steering: SteeringConfig,
    #[serde(default)]
    pub behavior: BehaviorConfig,
    #[serde(default)]
    pub perception: PerceptionConfig,
    #[serde(default)]
    pub obstacles: Vec<CircleObstacle>,
    pub agents: Vec<AgentSpec>,
}

fn schema() -> String {
    SCHEMA.to_owned()
}

fn default_dt() -> f64 {
    0.05
}

fn default_mode() -> Mode {
    Mode::SplineFollow
}

fn default_routing() -> Algorithm {
    Algorithm::Ch
}

mod algorithm_name {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::routing::Algorithm;

    pub fn serialize<S: Serializer>(a: &Algorithm, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(a.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Algorithm, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

impl ScenarioConfig {
    /// Reads a scenario and resolves its network path against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io { path: path.to_owned(), source })?;
        let mut cfg: ScenarioConfig =
            serde_json::from_str(&text).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        if cfg.network.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.network = dir.join(&cfg.network);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(msg));
        if self.schema != SCHEMA {
            return bad(format!("unsupported schema {:?}", self.schema));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt {} must be positive", self.dt));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return bad(format!("duration {} must be non-negative", self.duration));
        }
        if !(self.vehicle.wheelbase > 0.0 && self.vehicle.radius > 0.0) {
            return bad("vehicle wheelbase and radius must be positive".into());
        }
        self.vehicle.limits.validate().map_err(|e| SimError::Config(e.to_string()))?;
        self.steering.validate().map_err(|e| SimError::Config(e.to_string()))?;
        let b = &self.behavior;
        for (name, v) in [
            ("headway", b.headway),
            ("parking_tolerance", b.parking_tolerance),
            ("lane_half_width", b.lane_half_width),
            ("comfort_decel", b.comfort_decel),
            ("lateral_accel", b.lateral_accel),
            ("pursuit_lookahead", b.pursuit_lookahead),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("behavior.{name} must be positive"));
            }
        }
        for (name, v) in [
            ("min_gap", b.min_gap),
            ("stop_margin", b.stop_margin),
            ("clearance_margin", b.clearance_margin),
            ("grid_clearance", b.grid_clearance),
            ("spawn_jitter", b.spawn_jitter),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("behavior.{name} must be non-negative"));
            }
        }
        if b.grid_decision_interval == 0 {
            return bad("behavior.grid_decision_interval must be at least 1".into());
        }
        if b.comfort_decel > self.vehicle.limits.max_decel {
            return bad("behavior.comfort_decel exceeds vehicle max_decel".into());
        }
        for (i, a) in self.agents.iter().enumerate() {
            if !(a.spawn_time >= 0.0 && a.spawn_time.is_finite()) {
                return bad(format!("agent {i}: spawn_time must be non-negative"));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0 && o.center.is_finite()) {
                return bad(format!("obstacle {i}: radius must be positive"));
            }
        }
        Ok(())
    }

    /// Copy with every agent forced into `mode`.
    pub fn with_mode(&self, mode: Mode) -> Self {
        let mut cfg = self.clone();
        cfg.mode = mode;
        for a in &mut cfg.agents {
            a.mode = Some(mode);
        }
        cfg
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}
