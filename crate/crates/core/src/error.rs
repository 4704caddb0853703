use thiserror::Error;

use crate::camera::CameraError;
use crate::context::ContextError;
use crate::io::{FormatError, IoError};
use crate::mask::MaskError;
use crate::plan::ParseError;
use crate::planner::PlannerError;
use crate::pose::PoseError;
use crate::render::RenderError;
use crate::scene::SceneError;
use crate::waypoint::WaypointError;

/// Any error the crate can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Pose(#[from] PoseError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Waypoint(#[from] WaypointError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Process exit status: 1 usage, 2 bad input, 3 planning failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Planner(PlannerError::Config(_)) => 1,
            Error::Planner(PlannerError::Waypoint(_)) => 2,
            Error::Planner(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
