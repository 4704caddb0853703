use nalgebra::{Quaternion, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::FormatError;
use crate::camera::{CameraModel, Plane3D};
use crate::context::{CanonicalFrame, ShotAngle};
use crate::math::{Quat, Vec3};
use crate::pose::MatchScore;
use crate::render::TriMesh;
use crate::scene::{CameraFrameHint, ObjectInstance, Scene3D};

pub const SCENE_SCHEMA: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    schema: u32,
    shot_angle: String,
    camera: CameraDoc,
    background: PlaneDoc,
    #[serde(default)]
    objects: Vec<ObjectDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraDoc {
    width: u32,
    height: u32,
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaneDoc {
    point: [f64; 3],
    normal: [f64; 3],
    half_width: f64,
    half_height: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreDoc {
    area_term: f64,
    hu_term: f64,
    total: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    id: u32,
    name: String,
    /// Model-to-camera rotation as `[w, x, y, z]`.
    rotation: [f64; 4],
    /// Camera-frame center in cm.
    position: [f64; 3],
    scale: f64,
    ray_fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    match_score: Option<ScoreDoc>,
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Unit quaternion from stored components, keeping exact bits when already unit.
fn unit_quat(q: [f64; 4]) -> Result<Quat, FormatError> {
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    let n = raw.norm();
    if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
        return Err(FormatError::new(format!("rotation {q:?} is not a unit quaternion")));
    }
    Ok(if (n - 1.0).abs() < 1e-12 {
        UnitQuaternion::new_unchecked(raw)
    } else {
        UnitQuaternion::from_quaternion(raw)
    })
}

/// TOML scene document; see the repository README for the schema.
pub fn format_scene(scene: &Scene3D) -> String {
    let doc = SceneDoc {
        schema: SCENE_SCHEMA,
        shot_angle: scene.shot_angle.as_str().to_string(),
        camera: CameraDoc {
            width: scene.camera.width,
            height: scene.camera.height,
            fx: scene.camera.fx,
            fy: scene.camera.fy,
            cx: scene.camera.cx,
            cy: scene.camera.cy,
        },
        background: PlaneDoc {
            point: arr(&scene.background.point),
            normal: arr(&scene.background.normal),
            half_width: scene.background.half_width,
            half_height: scene.background.half_height,
        },
        objects: scene
            .objects
            .iter()
            .map(|o| {
                let c = o.rotation.quaternion().coords;
                ObjectDoc {
                    id: o.id,
                    name: o.name.clone(),
                    rotation: [c.w, c.x, c.y, c.z],
                    position: arr(&o.position),
                    scale: o.scale,
                    ray_fallback: o.ray_fallback,
                    match_score: o.match_score.map(|s| ScoreDoc {
                        area_term: s.area_term,
                        hu_term: s.hu_term,
                        total: s.total,
                    }),
                    vertices: o.mesh.vertices().iter().map(arr).collect(),
                    triangles: o.mesh.triangles().to_vec(),
                }
            })
            .collect(),
    };
    toml::to_string(&doc).expect("scene document serializes")
}

pub fn parse_scene(text: &str) -> Result<Scene3D, FormatError> {
    let doc: SceneDoc = toml::from_str(text).map_err(|e| FormatError::new(e.message().to_string()))?;
    if doc.schema != SCENE_SCHEMA {
        return Err(FormatError::new(format!("unsupported scene schema {}", doc.schema)));
    }
    let shot_angle: ShotAngle = doc.shot_angle.parse().map_err(FormatError::new)?;
    let c = &doc.camera;
    let camera = CameraModel::new(c.fx, c.fy, c.cx, c.cy, c.width, c.height).map_err(|e| FormatError::new(e.to_string()))?;
    let b = &doc.background;
    let background = Plane3D {
        point: Vec3::from(b.point),
        normal: Vec3::from(b.normal),
        half_width: b.half_width,
        half_height: b.half_height,
    };
    let hint = CameraFrameHint::from(&CanonicalFrame::new(shot_angle));
    let mut objects: Vec<ObjectInstance> = Vec::with_capacity(doc.objects.len());
    for o in doc.objects {
        if objects.iter().any(|p| p.id == o.id) {
            return Err(FormatError::new(format!("duplicate object id {}", o.id)));
        }
        let err = |m: String| FormatError::new(format!("object {}: {m}", o.id));
        let mesh = TriMesh::new(o.vertices.iter().map(|v| Vec3::from(*v)).collect(), o.triangles.clone()).map_err(|e| err(e.to_string()))?;
        let rotation = unit_quat(o.rotation).map_err(|e| err(e.0))?;
        if !(o.scale.is_finite() && o.scale > 0.0) {
            return Err(err(format!("scale must be positive, got {}", o.scale)));
        }
        let mut inst = ObjectInstance::new(o.id, o.name, mesh, rotation, Vec3::from(o.position), o.scale, &hint);
        inst.ray_fallback = o.ray_fallback;
        inst.match_score = o.match_score.map(|s| MatchScore {
            area_term: s.area_term,
            hu_term: s.hu_term,
            total: s.total,
        });
        objects.push(inst);
    }
    Ok(Scene3D {
        camera,
        objects,
        background,
        shot_angle,
    })
}
