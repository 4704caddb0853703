//! Deterministic geometric core for single-view spatial reasoning.
//!
//! The crate turns precomputed perception outputs (a metric depth map, one
//! occlusion-free mask and one mesh per object, and a vertical field of view)
//! into a metric [`scene::Scene3D`], answers spatial queries against it
//! exactly, parses the waypoint plan language emitted by a language model,
//! and turns a parsed plan into a smoothed, collision-free [`planner::Trajectory`].
//!
//! Conventions used throughout:
//! - lengths in centimeters, angles in degrees at every public interface;
//! - the camera sits at the origin, camera frame is x-right, y-down, z-forward,
//!   and depth is the perpendicular distance to the camera plane (the z value);
//! - the canonical "world" frame used for summaries and planning is x-right,
//!   y-away from the viewer, z-up (see [`context::CanonicalFrame`]).

pub mod camera;
pub mod cli;
pub mod context;
pub mod error;
pub mod io;
pub mod mask;
pub mod math;
pub mod plan;
pub mod planner;
pub mod pose;
pub mod render;
pub mod scene;
pub mod waypoint;

pub use error::{Error, Result};
