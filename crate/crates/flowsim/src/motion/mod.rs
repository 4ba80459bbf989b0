//! Vehicle kinematics, steering and local planners.

mod field;
mod grid_plan;
mod kinematics;
mod limits;
mod quintic;
mod sampling;
mod steering;

pub use field::{field_plan, potential_field_step, CircleObstacle, FieldGains};
pub use grid_plan::{grid_plan, octile, GridPath};
pub use kinematics::{kinematic_step, ControlLimits, VehicleState};
pub use limits::{check_limits, LimitKind, Trajectory, TrajectorySample, Violation};
pub use quintic::{quintic_connect, Boundary, Quintic, QuinticTrajectory};
pub use sampling::sample_plan;
pub use steering::{angle_to_steering, pure_pursuit, spline_steering, spline_steering_in_range, SteeringConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MotionError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no path to the goal")]
    NoPath,
    #[error("start is not in passable space")]
    StartBlocked,
    #[error("goal is not in passable space")]
    GoalBlocked,
    #[error("position is inside obstacle {0}")]
    InsideObstacle(usize),
    #[error("potential field stalled at ({x:.3}, {y:.3}) after {iterations} iterations")]
    Stalled { x: f64, y: f64, iterations: usize },
    #[error("trajectory needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("trajectory times must be strictly increasing (sample {0})")]
    NonMonotonicTime(usize),
}
