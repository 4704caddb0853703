//! File formats: 16-bit PGM depth, PBM masks, OBJ meshes, the TOML scene
//! manifest and scene document, and the trajectory text format.

mod manifest;
mod netpbm;
mod obj;
mod scene_file;
mod trajectory_file;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use manifest::{load_manifest, load_object_inputs, parse_manifest, CameraSpec, ManifestObject, SceneManifest, SceneSources};
pub use netpbm::{decode_pbm, decode_pgm16, encode_pbm, encode_pgm16};
pub use obj::{format_obj, parse_obj};
pub use scene_file::{format_scene, parse_scene, SCENE_SCHEMA};
pub use trajectory_file::{format_trajectory, parse_trajectory, TRAJECTORY_HEADER, TRAJECTORY_SCHEMA};

/// A malformed document, independent of where it came from.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct FormatError(pub String);

impl FormatError {
    pub fn new(message: impl Into<String>) -> Self {
        Self(message.into())
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{} not found", path.display())]
    NotFound { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{}", object_message(*id, kind, source))]
    Object { id: u32, kind: &'static str, source: Box<IoError> },
}

fn object_message(id: u32, kind: &str, source: &IoError) -> String {
    match source {
        IoError::NotFound { path } => format!("object {id}: {kind} not found ({})", path.display()),
        other => format!("object {id}: {kind}: {other}"),
    }
}

impl IoError {
    pub fn format(path: &Path, source: FormatError) -> Self {
        IoError::Format { path: path.to_path_buf(), source }
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, IoError> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => IoError::NotFound { path: path.to_path_buf() },
        _ => IoError::Io { path: path.to_path_buf(), source: e },
    })
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|_| IoError::format(path, FormatError::new("file is not valid UTF-8")))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    std::fs::write(path, bytes).map_err(|e| IoError::Io { path: path.to_path_buf(), source: e })
}

pub fn read_depth(path: &Path) -> Result<crate::camera::DepthMap, IoError> {
    decode_pgm16(&read_bytes(path)?).map_err(|e| IoError::format(path, e))
}

pub fn read_mask(path: &Path) -> Result<crate::mask::BinaryMask, IoError> {
    decode_pbm(&read_bytes(path)?).map_err(|e| IoError::format(path, e))
}

pub fn read_mesh(path: &Path) -> Result<crate::render::TriMesh, IoError> {
    parse_obj(&read_text(path)?).map_err(|e| IoError::format(path, e))
}

pub fn read_scene(path: &Path) -> Result<crate::scene::Scene3D, IoError> {
    parse_scene(&read_text(path)?).map_err(|e| IoError::format(path, e))
}
