use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{read_depth, read_mask, read_mesh, read_text, FormatError, IoError};
use crate::camera::{CameraModel, DepthMap};
use crate::context::ShotAngle;
use crate::scene::ObjectInput;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub width: u32,
    pub height: u32,
    pub fov_v_deg: Option<f64>,
    pub fx: Option<f64>,
    pub fy: Option<f64>,
    pub cx: Option<f64>,
    pub cy: Option<f64>,
}

impl CameraSpec {
    pub fn camera(&self) -> Result<CameraModel, FormatError> {
        let explicit = [self.fx, self.fy, self.cx, self.cy];
        let model = match (self.fov_v_deg, explicit) {
            (Some(fov), [None, None, None, None]) => CameraModel::from_fov(self.width, self.height, fov),
            (None, [Some(fx), Some(fy), Some(cx), Some(cy)]) => CameraModel::new(fx, fy, cx, cy, self.width, self.height),
            _ => return Err(FormatError::new("camera needs either fov_v_deg or all of fx, fy, cx, cy")),
        };
        model.map_err(|e| FormatError::new(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestObject {
    pub id: u32,
    pub name: String,
    pub mask: PathBuf,
    pub mesh: PathBuf,
    pub initial_scale: Option<f64>,
}

/// Reconstruction inputs. Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneManifest {
    pub schema: u32,
    pub camera: CameraSpec,
    pub depth: PathBuf,
    pub shot_angle: Option<String>,
    #[serde(default)]
    pub objects: Vec<ManifestObject>,
}

impl SceneManifest {
    pub fn shot_angle(&self) -> Result<Option<ShotAngle>, FormatError> {
        self.shot_angle.as_deref().map(|s| s.parse::<ShotAngle>().map_err(FormatError::new)).transpose()
    }
}

pub fn parse_manifest(text: &str) -> Result<SceneManifest, FormatError> {
    let m: SceneManifest = toml::from_str(text).map_err(|e| FormatError::new(e.message().to_string()))?;
    if m.schema != 1 {
        return Err(FormatError::new(format!("unsupported manifest schema {}", m.schema)));
    }
    m.camera.camera()?;
    m.shot_angle()?;
    let mut seen = BTreeSet::new();
    for o in &m.objects {
        if !seen.insert(o.id) {
            return Err(FormatError::new(format!("duplicate object id {}", o.id)));
        }
        if let Some(s) = o.initial_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(FormatError::new(format!("object {}: initial_scale must be positive", o.id)));
            }
        }
    }
    Ok(m)
}

pub fn load_manifest(path: &Path) -> Result<SceneManifest, IoError> {
    parse_manifest(&read_text(path)?).map_err(|e| IoError::format(path, e))
}

/// Everything a manifest points at, loaded and checked.
#[derive(Debug, Clone)]
pub struct SceneSources {
    pub camera: CameraModel,
    pub depth: DepthMap,
    pub shot_angle: Option<ShotAngle>,
    pub objects: Vec<ObjectInput>,
}

pub fn load_object_inputs(manifest: &SceneManifest, base_dir: &Path) -> Result<SceneSources, IoError> {
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
    let camera = manifest.camera.camera().map_err(|e| IoError::format(base_dir, e))?;
    let depth_path = resolve(&manifest.depth);
    let depth = read_depth(&depth_path)?;
    let shot_angle = manifest.shot_angle().map_err(|e| IoError::format(base_dir, e))?;
    let mut objects = Vec::with_capacity(manifest.objects.len());
    for o in &manifest.objects {
        let wrap = |kind: &'static str| move |e: IoError| IoError::Object { id: o.id, kind, source: Box::new(e) };
        let mesh = read_mesh(&resolve(&o.mesh)).map_err(wrap("mesh"))?;
        let mask = read_mask(&resolve(&o.mask)).map_err(wrap("mask"))?;
        objects.push(ObjectInput {
            id: o.id,
            name: o.name.clone(),
            mask,
            mesh,
            initial_scale: o.initial_scale,
        });
    }
    Ok(SceneSources {
        camera,
        depth,
        shot_angle,
        objects,
    })
}
