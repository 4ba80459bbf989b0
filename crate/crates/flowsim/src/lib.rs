//! Deterministic, headless microscopic traffic simulation.
//!
//! Every vehicle is an agent with its own perception, global route, local
//! motion planner and steering controller. The crate is organized bottom-up:
//!
//! - [`network`]: the static world (lane graph, lane splines, signals, grid).
//! - [`routing`]: exact shortest paths with Dijkstra, A*, ALT, Arc Flags,
//!   Contraction Hierarchies and REACH.
//! - [`ca`]: single-lane cellular-automaton traffic and macroscopic measurement.
//! - [`perception`]: listener/stimulus sensing with gained/lost events.
//! - [`motion`]: bicycle kinematics, spline steering and local planners.
//! - [`sim`]: the fixed-step scheduler, traces, metrics and mode comparison.

pub mod ca;
pub mod geom;
pub mod motion;
pub mod network;
pub mod perception;
pub mod routing;
pub mod sim;
pub mod svg;

pub use geom::Vec2;
pub use network::RoadNetwork;
