use serde::Serialize;

use crate::geom::Vec2;

use super::{ControlLimits, MotionError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub position: Vec2,
    pub speed: f64,
}

/// Time-stamped samples with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Trajectory {
    samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn new(samples: Vec<TrajectorySample>) -> Result<Self, MotionError> {
        if samples.is_empty() {
            return Err(MotionError::TooFewSamples { needed: 1, got: 0 });
        }
        if let Some(i) = samples.windows(2).position(|w| !(w[1].t > w[0].t)) {
            return Err(MotionError::NonMonotonicTime(i + 1));
        }
        Ok(Trajectory { samples })
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn points(&self) -> Vec<Vec2> {
        self.samples.iter().map(|s| s.position).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitKind {
    Accel,
    Decel,
    Curvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub t: f64,
    pub kind: LimitKind,
    pub value: f64,
    pub limit: f64,
}

/// Curvature of the circle through three points; zero when degenerate.
fn menger(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let denom = a.distance(b) * b.distance(c) * c.distance(a);
    if denom == 0.0 {
        0.0
    } else {
        2.0 * (b - a).cross(c - a).abs() / denom
    }
}

/// Central-difference acceleration and three-point curvature at every
/// interior sample, reported wherever a limit is exceeded.
pub fn check_limits(traj: &Trajectory, limits: &ControlLimits) -> Result<Vec<Violation>, MotionError> {
    let s = traj.samples();
    if s.len() < 3 {
        return Err(MotionError::TooFewSamples { needed: 3, got: s.len() });
    }
    let mut out = Vec::new();
    for i in 1..s.len() - 1 {
        let (p, c, n) = (&s[i - 1], &s[i], &s[i + 1]);
        let accel = (n.speed - p.speed) / (n.t - p.t);
        if accel > limits.max_accel {
            out.push(Violation { index: i, t: c.t, kind: LimitKind::Accel, value: accel, limit: limits.max_accel });
        } else if -accel > limits.max_decel {
            out.push(Violation { index: i, t: c.t, kind: LimitKind::Decel, value: -accel, limit: limits.max_decel });
        }
        let k = menger(p.position, c.position, n.position);
        if k > limits.max_curvature {
            out.push(Violation { index: i, t: c.t, kind: LimitKind::Curvature, value: k, limit: limits.max_curvature });
        }
    }
    Ok(out)
}
