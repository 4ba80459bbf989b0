//! Listeners, stimuli and the per-tick perception update.
//!
//! ```
//! use flowsim::perception::*;
//! use flowsim::Vec2;
//!
//! let mut sys = PerceptionSystem::new();
//! let eye = SightConfig::new(10.0, 60.0, false).unwrap();
//! sys.register(Listener::new(0, Pose::new(Vec2::new(0.0, 0.0), 0.0), vec![eye])).unwrap();
//! let car = Stimulus::new(SourceId::vehicle(1), Vec2::new(5.0, 0.0));
//! let events = sys.tick(&[car], &[], 1);
//! assert_eq!(events.len(), 1);
//! assert_eq!(events[0].change, Change::Gained);
//! assert!(sys.tick(&[car], &[], 2).is_empty());
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::geom::{signed_angle, Segment, Vec2};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerceptionError {
    #[error("listener {0} is already registered")]
    DuplicateListener(usize),
    #[error("listener {0} is not registered")]
    UnknownListener(usize),
    #[error("invalid sense: {0}")]
    InvalidSense(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StimulusKind {
    Vehicle,
    Obstacle,
    TrafficLight,
}

impl StimulusKind {
    pub fn name(self) -> &'static str {
        match self {
            StimulusKind::Vehicle => "vehicle",
            StimulusKind::Obstacle => "obstacle",
            StimulusKind::TrafficLight => "traffic_light",
        }
    }
}

/// Identifies a stimulus source; shown as `kind:index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceId {
    pub kind: StimulusKind,
    pub index: usize,
}

impl SourceId {
    pub fn vehicle(index: usize) -> Self {
        SourceId { kind: StimulusKind::Vehicle, index }
    }
    pub fn obstacle(index: usize) -> Self {
        SourceId { kind: StimulusKind::Obstacle, index }
    }
    pub fn light(index: usize) -> Self {
        SourceId { kind: StimulusKind::TrafficLight, index }
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.name(), self.index)
    }
}

impl Serialize for SourceId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Vision cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SightConfig {
    pub radius: f64,
    /// Degrees, in `(0, 180]`.
    pub fov_half_angle: f64,
    pub requires_line_of_sight: bool,
}

impl SightConfig {
    pub fn new(radius: f64, fov_half_angle: f64, requires_line_of_sight: bool) -> Result<Self, PerceptionError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(PerceptionError::InvalidSense(format!("radius {radius} must be positive")));
        }
        if !(fov_half_angle > 0.0 && fov_half_angle <= 180.0) {
            return Err(PerceptionError::InvalidSense(format!("fov half angle {fov_half_angle} not in (0, 180]")));
        }
        Ok(SightConfig { radius, fov_half_angle, requires_line_of_sight })
    }

    /// Whether a listener at `pose` sees `target` through this sense.
    pub fn sees(&self, pose: Pose, target: Vec2, occluders: &[Segment]) -> bool {
        let to = target - pose.position;
        let d = to.norm();
        if d > self.radius {
            return false;
        }
        if d > 0.0 {
            let off = signed_angle(Vec2::from_angle(pose.heading), to).abs().to_degrees();
            // the boundary ray itself is inside the cone
            if off > self.fov_half_angle + 1e-9 {
                return false;
            }
        }
        if self.requires_line_of_sight {
            let ray = Segment::new(pose.position, target);
            if occluders.iter().any(|o| o.intersects(&ray)) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec2,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Pose { position, heading }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Listener {
    pub id: usize,
    pub pose: Pose,
    pub senses: Vec<SightConfig>,
    /// The listener's own stimulus, never reported to itself.
    pub body: Option<SourceId>,
}

impl Listener {
    pub fn new(id: usize, pose: Pose, senses: Vec<SightConfig>) -> Self {
        Listener { id, pose, senses, body: None }
    }

    pub fn with_body(mut self, body: SourceId) -> Self {
        self.body = Some(body);
        self
    }

    pub fn perceives(&self, s: &Stimulus, occluders: &[Segment]) -> bool {
        self.body != Some(s.source) && self.senses.iter().any(|sense| sense.sees(self.pose, s.position, occluders))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stimulus {
    pub source: SourceId,
    pub position: Vec2,
}

impl Stimulus {
    pub fn new(source: SourceId, position: Vec2) -> Self {
        Stimulus { source, position }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Change {
    Gained,
    Lost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PerceptionEvent {
    pub listener: usize,
    pub source: SourceId,
    pub change: Change,
    pub tick: u64,
}

#[derive(Debug, Clone, Default)]
pub struct PerceptionSystem {
    listeners: BTreeMap<usize, Listener>,
    perceived: BTreeMap<usize, BTreeSet<SourceId>>,
}

impl PerceptionSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, listener: Listener) -> Result<usize, PerceptionError> {
        let id = listener.id;
        if self.listeners.contains_key(&id) {
            return Err(PerceptionError::DuplicateListener(id));
        }
        self.listeners.insert(id, listener);
        self.perceived.insert(id, BTreeSet::new());
        Ok(id)
    }

    /// Drops a listener and its state without emitting events.
    pub fn unregister(&mut self, id: usize) -> Result<Listener, PerceptionError> {
        self.perceived.remove(&id);
        self.listeners.remove(&id).ok_or(PerceptionError::UnknownListener(id))
    }

    pub fn contains(&self, id: usize) -> bool {
        self.listeners.contains_key(&id)
    }

    pub fn listener(&self, id: usize) -> Option<&Listener> {
        self.listeners.get(&id)
    }

    pub fn set_pose(&mut self, id: usize, pose: Pose) -> Result<(), PerceptionError> {
        let l = self.listeners.get_mut(&id).ok_or(PerceptionError::UnknownListener(id))?;
        l.pose = pose;
        Ok(())
    }

    /// Re-evaluates every listener and reports what changed, sorted by
    /// (listener, source).
    pub fn tick(&mut self, stimuli: &[Stimulus], occluders: &[Segment], tick: u64) -> Vec<PerceptionEvent> {
        let mut events = Vec::new();
        for (&id, l) in &self.listeners {
            let now: BTreeSet<SourceId> =
                stimuli.iter().filter(|s| l.perceives(s, occluders)).map(|s| s.source).collect();
            let before = self.perceived.get_mut(&id).expect("state exists for every listener");
            // merge the two sorted sets so events come out in source order
            let mut changes: Vec<(SourceId, Change)> = now
                .difference(before)
                .map(|&s| (s, Change::Gained))
                .chain(before.difference(&now).map(|&s| (s, Change::Lost)))
                .collect();
            changes.sort();
            events.extend(changes.into_iter().map(|(source, change)| PerceptionEvent { listener: id, source, change, tick }));
            *before = now;
        }
        events
    }

    pub fn perceived_set(&self, id: usize) -> Result<&BTreeSet<SourceId>, PerceptionError> {
        self.perceived.get(&id).ok_or(PerceptionError::UnknownListener(id))
    }
}
