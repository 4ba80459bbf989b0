use serde::{Deserialize, Serialize};

use crate::geom::{wrap_angle, Vec2};

use super::MotionError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub position: Vec2,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
    /// m/s, never negative.
    pub speed: f64,
    /// Normalized, in `[-1, 1]`; positive turns left.
    pub steering: f64,
    pub wheelbase: f64,
}

impl VehicleState {
    pub fn new(position: Vec2, heading: f64, speed: f64, wheelbase: f64) -> Self {
        VehicleState { position, heading, speed, steering: 0.0, wheelbase }
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlLimits {
    /// m/s²
    pub max_accel: f64,
    /// m/s², positive
    pub max_decel: f64,
    /// Degrees; steering ±1 maps to ±this.
    pub max_steer_angle: f64,
    /// 1/m
    pub max_curvature: f64,
}

impl Default for ControlLimits {
    fn default() -> Self {
        ControlLimits { max_accel: 3.0, max_decel: 6.0, max_steer_angle: 35.0, max_curvature: 0.25 }
    }
}

impl ControlLimits {
    pub fn validate(&self) -> Result<(), MotionError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.max_accel) && ok(self.max_decel) && ok(self.max_curvature)) {
            return Err(MotionError::InvalidParameter("limits must be positive".into()));
        }
        if !(self.max_steer_angle > 0.0 && self.max_steer_angle < 90.0) {
            return Err(MotionError::InvalidParameter(format!(
                "max_steer_angle {} not in (0, 90)",
                self.max_steer_angle
            )));
        }
        Ok(())
    }

    /// The binding curvature bound for a given wheelbase.
    pub fn curvature_limit(&self, wheelbase: f64) -> f64 {
        (self.max_steer_angle.to_radians().tan() / wheelbase).min(self.max_curvature)
    }
}

/// Kinematic bicycle step. Inputs are clamped to `[-1, 1]`.
pub fn kinematic_step(
    s: &VehicleState,
    throttle: f64,
    steering: f64,
    limits: &ControlLimits,
    dt: f64,
) -> Result<VehicleState, MotionError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(MotionError::InvalidParameter(format!("dt {dt} must be positive")));
    }
    let throttle = throttle.clamp(-1.0, 1.0);
    let steering = steering.clamp(-1.0, 1.0);
    let delta = steering * limits.max_steer_angle.to_radians();
    let k_max = limits.curvature_limit(s.wheelbase);
    let curvature = (delta.tan() / s.wheelbase).clamp(-k_max, k_max);
    let heading = s.heading + s.speed * curvature * dt;
    let mean = s.heading + 0.5 * (heading - s.heading);
    let position = s.position + Vec2::from_angle(mean) * (s.speed * dt);
    let accel = if throttle >= 0.0 { throttle * limits.max_accel } else { throttle * limits.max_decel };
    let speed = (s.speed + accel * dt).max(0.0);
    Ok(VehicleState { position, heading: wrap_angle(heading), speed, steering, wheelbase: s.wheelbase })
}
