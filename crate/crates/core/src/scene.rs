//! Metric scene assembly: object placement along mask-centroid rays, contour-ratio
//! scale calibration and PCA oriented bounding boxes.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use thiserror::Error;

use crate::camera::{background_plane_placement, ray_plane_intersect, CameraError, CameraModel, DepthMap, Plane3D};
use crate::context::{CanonicalFrame, ShotAngle};
use crate::mask::{mask_stats, trace_contour, BinaryMask, MaskError};
use crate::math::{rotation_between, Mat3, Quat, Vec3};
use crate::pose::{estimate_rotation, MatchScore, MatchWeights, PoseError, TemplateConfig, TemplateSet};
use crate::render::{render_silhouette_at, RenderError, TriMesh, Viewpoint};

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("mask centroid pixel ({u}, {v}) has no depth")]
    NoDepthAtCentroid { u: u32, v: u32 },
    #[error("rendered contour is degenerate (zero arc length)")]
    DegenerateContour,
    #[error("initial scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Pose(#[from] PoseError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("object {id}: {stage}: {source}")]
    Object {
        id: u32,
        stage: &'static str,
        #[source]
        source: Box<SceneError>,
    },
    #[error("duplicate object id {0}")]
    DuplicateId(u32),
    #[error("object {id}: mask is {mask_w}x{mask_h} but the depth map is {depth_w}x{depth_h}")]
    DimensionMismatch {
        id: u32,
        mask_w: u32,
        mask_h: u32,
        depth_w: u32,
        depth_h: u32,
    },
}

impl SceneError {
    fn at(self, id: u32, stage: &'static str) -> SceneError {
        SceneError::Object {
            id,
            stage,
            source: Box::new(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Vec3,
    /// Unit x, y, z axes, right-handed.
    pub axes: [Vec3; 3],
    pub half_extents: Vec3,
}

/// Smallest half extent reported for flat or degenerate vertex sets.
pub const MIN_HALF_EXTENT: f64 = 1e-6;

impl OrientedBox {
    pub fn rotation_matrix(&self) -> Mat3 {
        Mat3::from_columns(&self.axes)
    }

    pub fn contains(&self, p: &Vec3, tolerance: f64) -> bool {
        let d = p - self.center;
        (0..3).all(|k| d.dot(&self.axes[k]).abs() <= self.half_extents[k] + tolerance)
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            let s = |bit: usize| if i >> bit & 1 == 1 { 1.0 } else { -1.0 };
            *c = self.center
                + self.axes[0] * (s(0) * self.half_extents.x)
                + self.axes[1] * (s(1) * self.half_extents.y)
                + self.axes[2] * (s(2) * self.half_extents.z);
        }
        out
    }

    /// Same box after rigid motion `p -> rotation * p + translation`.
    pub fn transformed(&self, rotation: &Quat, translation: &Vec3) -> OrientedBox {
        OrientedBox {
            center: rotation * self.center + translation,
            axes: self.axes.map(|a| rotation * a),
            half_extents: self.half_extents,
        }
    }
}

/// PCA box with z toward world +z and x toward world +x.
pub fn compute_obb(mesh: &TriMesh, rotation: &Quat, scale: f64, position: &Vec3) -> OrientedBox {
    compute_obb_oriented(mesh, rotation, scale, position, &Vec3::z(), &Vec3::x())
}

/// PCA box over the transformed vertices. The z axis is the principal direction
/// most aligned with `up` and x the remaining one most aligned with `right`.
/// Within a repeated eigenvalue any direction is principal, so the choice is
/// made by projecting `up` (then `right`) into that eigenspace.
pub fn compute_obb_oriented(mesh: &TriMesh, rotation: &Quat, scale: f64, position: &Vec3, up: &Vec3, right: &Vec3) -> OrientedBox {
    let pts = mesh.transformed_vertices(rotation, scale, position);
    let axes = principal_axes(&pts, up, right);
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in &pts {
        for k in 0..3 {
            let t = p.dot(&axes[k]);
            lo[k] = lo[k].min(t);
            hi[k] = hi[k].max(t);
        }
    }
    let mid = (lo + hi) * 0.5;
    let half = ((hi - lo) * 0.5).map(|h| h.max(MIN_HALF_EXTENT));
    OrientedBox {
        center: axes[0] * mid.x + axes[1] * mid.y + axes[2] * mid.z,
        axes,
        half_extents: half,
    }
}

fn principal_axes(pts: &[Vec3], up: &Vec3, right: &Vec3) -> [Vec3; 3] {
    let n = pts.len().max(1) as f64;
    let mean = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let cov = pts.iter().fold(Mat3::zeros(), |a, p| {
        let d = p - mean;
        a + d * d.transpose()
    }) / n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let scale = eig.eigenvalues.abs().max().max(1e-300);
    // group eigenvectors whose eigenvalues coincide into shared eigenspaces
    let mut spaces: Vec<Vec<Vec3>> = Vec::new();
    let mut last: Option<f64> = None;
    for &i in &order {
        let lam = eig.eigenvalues[i];
        let v = eig.eigenvectors.column(i).into_owned().normalize();
        match last {
            Some(l) if (lam - l).abs() <= 1e-9 * scale => spaces.last_mut().unwrap().push(v),
            _ => spaces.push(vec![v]),
        }
        last = Some(lam);
    }
    let z = take_aligned(&mut spaces, up);
    let x = take_aligned(&mut spaces, right);
    let x = (x - z * z.dot(&x)).normalize();
    [x, z.cross(&x), z]
}

/// Remove and return the unit direction, from any eigenspace, closest to `target`,
/// signed to have a non-negative dot product with it.
fn take_aligned(spaces: &mut Vec<Vec<Vec3>>, target: &Vec3) -> Vec3 {
    let t = target.normalize();
    let proj = |s: &Vec<Vec3>| s.iter().fold(Vec3::zeros(), |a, b| a + b * b.dot(&t));
    let (best, _) = spaces
        .iter()
        .enumerate()
        .map(|(i, s)| (i, proj(s).norm()))
        .fold((0, f64::NEG_INFINITY), |acc, (i, n)| if n > acc.1 + 1e-12 { (i, n) } else { acc });
    let space = spaces.remove(best);
    let p = proj(&space);
    let v = if p.norm() > 1e-9 { p.normalize() } else { space[0] };
    let v = if v.dot(&t) < 0.0 { -v } else { v };
    if space.len() > 1 {
        // orthonormal complement of v inside the eigenspace
        let mut rest: Vec<Vec3> = Vec::new();
        let mut cands: Vec<Vec3> = space.iter().map(|b| b - v * v.dot(b)).collect();
        cands.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        for c in cands {
            let c = rest.iter().fold(c, |acc, r| acc - r * r.dot(&acc));
            if c.norm() > 1e-6 && rest.len() + 1 < space.len() {
                rest.push(c.normalize());
            }
        }
        spaces.push(rest);
    }
    v
}

/// Result of [`place_object`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub position: Vec3,
    /// Set when the centroid ray does not meet the background plane.
    pub ray_fallback: bool,
    /// Mask centroid in pixels.
    pub centroid: (f64, f64),
}

/// Place the object center on the pixel ray through the mask centroid, at the
/// perpendicular depth read from the depth map at that pixel.
pub fn place_object(cam: &CameraModel, mask: &BinaryMask, depth: &DepthMap, background: &Plane3D) -> Result<Placement, SceneError> {
    let stats = mask_stats(mask)?;
    let (u, v) = stats.centroid;
    let pu = (u.round().max(0.0) as u32).min(depth.width() - 1);
    let pv = (v.round().max(0.0) as u32).min(depth.height() - 1);
    let d = depth.get(pu, pv).abs();
    if !(d > 0.0) {
        return Err(SceneError::NoDepthAtCentroid { u: pu, v: pv });
    }
    let ray = cam.pixel_ray(u, v);
    let ray_fallback = ray_plane_intersect(&ray, background).is_none();
    Ok(Placement {
        position: ray.direction * (d / ray.direction.z),
        ray_fallback,
        centroid: (u, v),
    })
}

/// Rescale by the ratio of observed to rendered contour arc lengths.
pub fn calibrate_scale(initial_scale: f64, observed: &BinaryMask, rendered: &BinaryMask) -> Result<f64, SceneError> {
    let (_, observed_len) = trace_contour(observed)?;
    let (_, rendered_len) = trace_contour(rendered)?;
    if rendered_len <= 0.0 {
        return Err(SceneError::DegenerateContour);
    }
    Ok(initial_scale * observed_len / rendered_len)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectInstance {
    pub id: u32,
    pub name: String,
    /// Mesh centered at its bounding-box center, in model units.
    pub mesh: TriMesh,
    /// Model-to-camera rotation.
    pub rotation: Quat,
    /// Camera-frame center in cm.
    pub position: Vec3,
    pub scale: f64,
    /// Camera-frame box.
    pub obb: OrientedBox,
    pub ray_fallback: bool,
    pub match_score: Option<MatchScore>,
}

impl ObjectInstance {
    /// Build an instance, deriving the OBB from the pose with world up and right
    /// taken from `frame`.
    pub fn new(id: u32, name: impl Into<String>, mesh: TriMesh, rotation: Quat, position: Vec3, scale: f64, frame: &CameraFrameHint) -> Self {
        let obb = compute_obb_oriented(&mesh, &rotation, scale, &position, &frame.up, &frame.right);
        Self {
            id,
            name: name.into(),
            mesh,
            rotation,
            position,
            scale,
            obb,
            ray_fallback: false,
            match_score: None,
        }
    }

    pub fn world_vertices(&self) -> Vec<Vec3> {
        self.mesh.transformed_vertices(&self.rotation, self.scale, &self.position)
    }
}

/// World up and right directions expressed in camera coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraFrameHint {
    pub up: Vec3,
    pub right: Vec3,
}

impl From<&CanonicalFrame> for CameraFrameHint {
    fn from(f: &CanonicalFrame) -> Self {
        Self {
            up: f.to_camera(&Vec3::z()),
            right: f.to_camera(&Vec3::x()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene3D {
    pub camera: CameraModel,
    pub objects: Vec<ObjectInstance>,
    pub background: Plane3D,
    pub shot_angle: ShotAngle,
}

impl Scene3D {
    pub fn object(&self, id: u32) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn frame(&self) -> CanonicalFrame {
        CanonicalFrame::new(self.shot_angle)
    }

    /// Recompute every OBB from the object poses.
    pub fn refresh_obbs(&mut self) {
        let hint = CameraFrameHint::from(&self.frame());
        for o in &mut self.objects {
            o.obb = compute_obb_oriented(&o.mesh, &o.rotation, o.scale, &o.position, &hint.up, &hint.right);
        }
    }
}

/// Per-object reconstruction input.
#[derive(Debug, Clone)]
pub struct ObjectInput {
    pub id: u32,
    pub name: String,
    /// Occlusion-free silhouette at the depth map resolution.
    pub mask: BinaryMask,
    pub mesh: TriMesh,
    pub initial_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub templates: TemplateConfig,
    pub weights: MatchWeights,
    pub calibration_passes: u32,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            templates: TemplateConfig::default(),
            weights: MatchWeights::default(),
            calibration_passes: 2,
        }
    }
}

/// Silhouette of an object as seen by the scene camera at the origin.
pub fn render_in_scene(mesh: &TriMesh, rotation: &Quat, scale: f64, position: &Vec3, cam: &CameraModel) -> Result<BinaryMask, RenderError> {
    let view = Viewpoint {
        rotation: Quat::identity(),
        position: Vec3::zeros(),
    };
    render_silhouette_at(mesh, rotation, scale, position, &view, cam)
}

fn reconstruct_object(input: &ObjectInput, cam: &CameraModel, depth: &DepthMap, background: &Plane3D, hint: &CameraFrameHint, cfg: &BuildConfig) -> Result<ObjectInstance, SceneError> {
    let id = input.id;
    if input.mask.width() != depth.width() || input.mask.height() != depth.height() {
        return Err(SceneError::DimensionMismatch {
            id,
            mask_w: input.mask.width(),
            mask_h: input.mask.height(),
            depth_w: depth.width(),
            depth_h: depth.height(),
        });
    }
    let mesh = input.mesh.centered();
    let templates = TemplateSet::render(&mesh, cfg.templates).map_err(|e| SceneError::from(e).at(id, "templates"))?;
    let estimate = estimate_rotation(&input.mask, &templates, cfg.weights).map_err(|e| SceneError::from(e).at(id, "pose"))?;
    let placement = place_object(cam, &input.mask, depth, background).map_err(|e| e.at(id, "placement"))?;
    // templates are matched along +z; turn the estimate onto the actual line of sight
    let los = rotation_between(&Vec3::z(), &placement.position.normalize());
    let rotation = los * estimate.rotation;

    let mut scale = match input.initial_scale {
        Some(s) if s > 0.0 && s.is_finite() => s,
        Some(s) => return Err(SceneError::InvalidScale(s).at(id, "scale")),
        // Matched template area vs observed area, each turned into metric units
        // through its own focal length and distance.
        None => {
            let tcam = templates.config().camera();
            let template_area = templates.entries()[estimate.template_index].mask.area() as f64;
            let observed_area = input.mask.area() as f64;
            let observed = observed_area.sqrt() * placement.position.z / (cam.fx * cam.fy).sqrt();
            let template = template_area.sqrt() * templates.camera_distance() / (tcam.fx * tcam.fy).sqrt();
            observed / template.max(1e-12)
        }
    };
    for _ in 0..cfg.calibration_passes {
        let rendered = render_in_scene(&mesh, &rotation, scale, &placement.position, cam).map_err(|e| SceneError::from(e).at(id, "calibration"))?;
        scale = calibrate_scale(scale, &input.mask, &rendered).map_err(|e| e.at(id, "calibration"))?;
    }
    let mut obj = ObjectInstance::new(id, input.name.clone(), mesh, rotation, placement.position, scale, hint);
    obj.ray_fallback = placement.ray_fallback;
    obj.match_score = Some(estimate.score);
    Ok(obj)
}

/// Reconstruct a metric scene from per-object masks and meshes plus a depth map.
pub fn build_scene(inputs: &[ObjectInput], cam: &CameraModel, depth: &DepthMap, shot_angle: ShotAngle, cfg: &BuildConfig) -> Result<Scene3D, SceneError> {
    if depth.width() != cam.width || depth.height() != cam.height {
        return Err(CameraError::DimensionMismatch {
            got_w: depth.width(),
            got_h: depth.height(),
            want_w: cam.width,
            want_h: cam.height,
        }
        .into());
    }
    let mut seen = std::collections::BTreeSet::new();
    for i in inputs {
        if !seen.insert(i.id) {
            return Err(SceneError::DuplicateId(i.id));
        }
    }
    let background = background_plane_placement(cam, depth.max_depth());
    let frame = CanonicalFrame::new(shot_angle);
    let hint = CameraFrameHint::from(&frame);
    let objects = inputs
        .par_iter()
        .map(|i| reconstruct_object(i, cam, depth, &background, &hint, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Scene3D {
        camera: *cam,
        objects,
        background,
        shot_angle,
    })
}
