use serde::{Deserialize, Serialize};

use crate::geom::{signed_angle, Vec2};
use crate::network::Spline;

use super::{MotionError, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteeringConfig {
    /// Meters along the scaled tangent; smaller reacts more sharply.
    pub smoothing: f64,
    /// Degrees of heading error that map to full lock.
    #[serde(default = "default_full_lock")]
    pub full_lock_angle: f64,
}

fn default_full_lock() -> f64 {
    90.0
}

impl Default for SteeringConfig {
    fn default() -> Self {
        SteeringConfig { smoothing: 6.0, full_lock_angle: default_full_lock() }
    }
}

impl SteeringConfig {
    pub fn validate(&self) -> Result<(), MotionError> {
        if !(self.smoothing > 0.0 && self.smoothing.is_finite()) {
            return Err(MotionError::InvalidParameter(format!("smoothing {} must be positive", self.smoothing)));
        }
        if !(self.full_lock_angle > 0.0 && self.full_lock_angle <= 180.0) {
            return Err(MotionError::InvalidParameter("full_lock_angle must be in (0, 180]".into()));
        }
        Ok(())
    }
}

/// Linear map of a heading error (radians) onto `[-1, 1]`.
pub fn angle_to_steering(angle: f64, full_lock_angle: f64) -> f64 {
    (angle.to_degrees() / full_lock_angle).clamp(-1.0, 1.0)
}

/// Steering toward a spline: project onto the curve, step `smoothing`
/// meters along the tangent from the car, project that point back onto the
/// curve and steer at it.
pub fn spline_steering(s: &VehicleState, spline: &Spline, cfg: &SteeringConfig) -> f64 {
    spline_steering_in_range(s, spline, cfg, 0.0, spline.length()).0
}

/// As [`spline_steering`] but both projections are limited to arc lengths
/// in `[lo, hi]`, which keeps self-approaching routes from jumping branch.
/// Also returns the arc length of the car's projection.
pub fn spline_steering_in_range(s: &VehicleState, spline: &Spline, cfg: &SteeringConfig, lo: f64, hi: f64) -> (f64, f64) {
    let here = spline.nearest_in_range(s.position, lo, hi);
    let probe = s.position + spline.tangent_clamped(here.s) * cfg.smoothing;
    let target = spline.nearest_in_range(probe, lo, hi).point;
    let steer = steer_at(s, target, cfg.full_lock_angle);
    (steer, here.s)
}

/// Pure pursuit on a polyline path: steer at the point `lookahead` meters
/// past the car's projection. Returns the steering and that projection.
pub fn pure_pursuit(s: &VehicleState, path: &Spline, lookahead: f64, full_lock_angle: f64, lo: f64, hi: f64) -> (f64, f64) {
    let here = path.nearest_in_range(s.position, lo, hi);
    let target = path.point_at(here.s + lookahead);
    (steer_at(s, target, full_lock_angle), here.s)
}

fn steer_at(s: &VehicleState, target: Vec2, full_lock_angle: f64) -> f64 {
    let to = target - s.position;
    if to.norm() < 1e-12 {
        return 0.0;
    }
    angle_to_steering(signed_angle(s.direction(), to), full_lock_angle)
}
