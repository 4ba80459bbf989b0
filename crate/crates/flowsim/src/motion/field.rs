use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

use super::MotionError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleObstacle {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldGains {
    pub k_att: f64,
    pub k_rep: f64,
    /// Clearance beyond which an obstacle exerts no force.
    pub influence_radius: f64,
}

impl Default for FieldGains {
    fn default() -> Self {
        FieldGains { k_att: 1.0, k_rep: 100.0, influence_radius: 3.0 }
    }
}

/// Attractive pull toward `goal` plus repulsion from every obstacle whose
/// surface is closer than the influence radius.
pub fn potential_field_step(
    pos: Vec2,
    goal: Vec2,
    obstacles: &[CircleObstacle],
    gains: &FieldGains,
) -> Result<Vec2, MotionError> {
    let mut force = (goal - pos) * gains.k_att;
    for (i, o) in obstacles.iter().enumerate() {
        let away = pos - o.center;
        let d = away.norm() - o.radius;
        if d <= 0.0 {
            return Err(MotionError::InsideObstacle(i));
        }
        if d < gains.influence_radius {
            let unit = away / away.norm();
            force += unit * (gains.k_rep * (1.0 / d - 1.0 / gains.influence_radius) / (d * d));
        }
    }
    Ok(force)
}

/// Follows the field in fixed-length steps until within `step` of the goal.
///
/// Local minima are not escaped: if the distance to the goal has not
/// improved for `patience` steps the plan fails with [`MotionError::Stalled`].
pub fn field_plan(
    start: Vec2,
    goal: Vec2,
    obstacles: &[CircleObstacle],
    gains: &FieldGains,
    step: f64,
    max_iterations: usize,
) -> Result<Vec<Vec2>, MotionError> {
    if !(step > 0.0) {
        return Err(MotionError::InvalidParameter("step must be positive".into()));
    }
    let patience = 50;
    let mut path = vec![start];
    let mut pos = start;
    let mut best = pos.distance(goal);
    let mut since_best = 0;
    for it in 0..max_iterations {
        if pos.distance(goal) <= step {
            if pos != goal {
                path.push(goal);
            }
            return Ok(path);
        }
        let f = potential_field_step(pos, goal, obstacles, gains)?;
        let Some(dir) = f.normalized() else {
            return Err(MotionError::Stalled { x: pos.x, y: pos.y, iterations: it });
        };
        pos += dir * step;
        path.push(pos);
        let d = pos.distance(goal);
        if d < best - 1e-9 {
            best = d;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= patience {
                return Err(MotionError::Stalled { x: pos.x, y: pos.y, iterations: it + 1 });
            }
        }
    }
    Err(MotionError::NoPath)
}
