use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

use super::{MotionError, Trajectory, TrajectorySample};

/// Position, velocity and acceleration at one end of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Boundary {
    pub pos: Vec2,
    #[serde(default)]
    pub vel: Vec2,
    #[serde(default)]
    pub acc: Vec2,
}

impl Boundary {
    pub fn at_rest(pos: Vec2) -> Self {
        Boundary { pos, vel: Vec2::ZERO, acc: Vec2::ZERO }
    }
}

/// `c0 + c1 t + ... + c5 t^5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quintic {
    pub coeffs: [f64; 6],
}

impl Quintic {
    /// The unique quintic meeting value, slope and curvature at `t = 0` and `t = duration`.
    pub fn connect(x0: f64, v0: f64, a0: f64, x1: f64, v1: f64, a1: f64, duration: f64) -> Self {
        let t = duration;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let dx = x1 - x0;
        let c3 = (20.0 * dx - (8.0 * v1 + 12.0 * v0) * t - (3.0 * a0 - a1) * t2) / (2.0 * t3);
        let c4 = (-30.0 * dx + (14.0 * v1 + 16.0 * v0) * t + (3.0 * a0 - 2.0 * a1) * t2) / (2.0 * t4);
        let c5 = (12.0 * dx - 6.0 * (v1 + v0) * t - (a0 - a1) * t2) / (2.0 * t5);
        Quintic { coeffs: [x0, v0, a0 / 2.0, c3, c4, c5] }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// `k`-th derivative at `t`.
    pub fn derivative(&self, k: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for i in (k..6).rev() {
            let falling: f64 = (i + 1 - k..=i).map(|j| j as f64).product();
            acc = acc * t + self.coeffs[i] * falling;
        }
        acc
    }
}

/// Independent quintics in x and y over `[0, duration]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuinticTrajectory {
    pub x: Quintic,
    pub y: Quintic,
    pub duration: f64,
}

pub fn quintic_connect(b0: &Boundary, b1: &Boundary, duration: f64) -> Result<QuinticTrajectory, MotionError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(MotionError::InvalidParameter(format!("duration {duration} must be positive")));
    }
    let x = Quintic::connect(b0.pos.x, b0.vel.x, b0.acc.x, b1.pos.x, b1.vel.x, b1.acc.x, duration);
    let y = Quintic::connect(b0.pos.y, b0.vel.y, b0.acc.y, b1.pos.y, b1.vel.y, b1.acc.y, duration);
    Ok(QuinticTrajectory { x, y, duration })
}

impl QuinticTrajectory {
    pub fn position(&self, t: f64) -> Vec2 {
        Vec2::new(self.x.value(t), self.y.value(t))
    }

    pub fn velocity(&self, t: f64) -> Vec2 {
        Vec2::new(self.x.derivative(1, t), self.y.derivative(1, t))
    }

    pub fn acceleration(&self, t: f64) -> Vec2 {
        Vec2::new(self.x.derivative(2, t), self.y.derivative(2, t))
    }

    /// Samples every `dt`, always including the final time.
    pub fn sample(&self, dt: f64) -> Result<Trajectory, MotionError> {
        if !(dt > 0.0) {
            return Err(MotionError::InvalidParameter("dt must be positive".into()));
        }
        let n = (self.duration / dt).ceil() as usize;
        let samples = (0..=n)
            .map(|i| {
                let t = (i as f64 * dt).min(self.duration);
                TrajectorySample { t, position: self.position(t), speed: self.velocity(t).norm() }
            })
            .collect::<Vec<_>>();
        // a tiny last step can collapse onto the final time
        let mut dedup: Vec<TrajectorySample> = Vec::with_capacity(samples.len());
        for s in samples {
            if dedup.last().is_none_or(|l| s.t > l.t) {
                dedup.push(s);
            }
        }
        Trajectory::new(dedup)
    }
}
