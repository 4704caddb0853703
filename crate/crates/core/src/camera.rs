//! Pinhole camera math under the perpendicular-depth convention.

use thiserror::Error;

use crate::math::Vec3;

#[derive(Debug, Error, PartialEq)]
pub enum CameraError {
    #[error("vertical field of view {0} deg is outside (0, 180)")]
    FovOutOfRange(f64),
    #[error("image dimensions must be positive, got {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("depth map is {got_w}x{got_h} but the camera is {want_w}x{want_h}")]
    DimensionMismatch {
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("depth map has no positive values; scene extents are undefined")]
    DegenerateExtents,
    #[error("depth must be finite and non-negative, got {0}")]
    InvalidDepth(f64),
}

/// Focal length in pixels from the vertical field of view: `H / (2 tan(fov/2))`.
pub fn focal_from_fov(height_px: f64, fov_v_deg: f64) -> Result<f64, CameraError> {
    if !(fov_v_deg > 0.0 && fov_v_deg < 180.0) {
        return Err(CameraError::FovOutOfRange(fov_v_deg));
    }
    if !(height_px > 0.0) {
        return Err(CameraError::InvalidDimensions {
            width: 0,
            height: height_px as u32,
        });
    }
    Ok(height_px / (2.0 * tan_deg(fov_v_deg / 2.0)))
}

/// Tangent of an angle in degrees, exact at multiples of 45°.
fn tan_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(180.0);
    match r {
        0.0 => 0.0,
        45.0 => 1.0,
        135.0 => -1.0,
        _ => deg.to_radians().tan(),
    }
}

/// Pinhole intrinsics plus image size. Pixel `(u, v)` denotes the pixel center
/// at integer coordinates, `u` to the right and `v` downwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraModel {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self, CameraError> {
        if width == 0 || height == 0 {
            return Err(CameraError::InvalidDimensions { width, height });
        }
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(CameraError::InvalidIntrinsics(format!("focal lengths must be positive, got fx={fx} fy={fy}")));
        }
        if !(cx >= 0.0 && cx < width as f64 && cy >= 0.0 && cy < height as f64) {
            return Err(CameraError::InvalidIntrinsics(format!(
                "principal point ({cx}, {cy}) outside {width}x{height}"
            )));
        }
        Ok(Self { fx, fy, cx, cy, width, height })
    }

    /// Square pixels, principal point at the image center.
    pub fn from_fov(width: u32, height: u32, fov_v_deg: f64) -> Result<Self, CameraError> {
        if width == 0 || height == 0 {
            return Err(CameraError::InvalidDimensions { width, height });
        }
        let f = focal_from_fov(height as f64, fov_v_deg)?;
        Self::new(f, f, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }

    /// Camera-frame point whose z equals the perpendicular depth `depth`.
    pub fn backproject_pixel(&self, u: f64, v: f64, depth: f64) -> Vec3 {
        Vec3::new((u - self.cx) * depth / self.fx, (v - self.cy) * depth / self.fy, depth)
    }

    /// Pixel coordinates of a camera-frame point; `None` at or behind the camera plane.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        if p.z <= 0.0 {
            return None;
        }
        Some((self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }

    /// Unit direction of the ray from the camera origin through pixel `(u, v)`.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Ray {
        Ray::new(Vec3::zeros(), self.backproject_pixel(u, v, 1.0))
    }

    pub fn contains_pixel(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64
    }

    /// Same camera with every intrinsic (and the image size) multiplied by `k`.
    pub fn scaled(&self, k: u32) -> Self {
        let kf = k as f64;
        Self {
            fx: self.fx * kf,
            fy: self.fy * kf,
            cx: self.cx * kf,
            cy: self.cy * kf,
            width: self.width * k,
            height: self.height * k,
        }
    }
}

/// Per-pixel perpendicular depth in centimeters, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self, CameraError> {
        if width == 0 || height == 0 || values.len() != width as usize * height as usize {
            return Err(CameraError::InvalidDimensions { width, height });
        }
        if let Some(bad) = values.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(CameraError::InvalidDepth(*bad));
        }
        Ok(Self { width, height, values })
    }

    pub fn constant(width: u32, height: u32, depth: f64) -> Result<Self, CameraError> {
        Self::new(width, height, vec![depth; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, u: u32, v: u32) -> f64 {
        self.values[v as usize * self.width as usize + u as usize]
    }

    /// Largest depth value, `0` for an all-zero map.
    pub fn max_depth(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn check_matches(&self, cam: &CameraModel) -> Result<(), CameraError> {
        if self.width != cam.width || self.height != cam.height {
            return Err(CameraError::DimensionMismatch {
                got_w: self.width,
                got_h: self.height,
                want_w: cam.width,
                want_h: cam.height,
            });
        }
        Ok(())
    }
}

/// Axis-wise bounds of the backprojected scene in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneExtents {
    pub min: Vec3,
    pub max: Vec3,
}

impl SceneExtents {
    pub fn depth_span(&self) -> f64 {
        self.max.z - self.min.z
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }
}

/// Min/max per camera axis over all pixels with positive depth.
pub fn scene_extents(cam: &CameraModel, depth: &DepthMap) -> Result<SceneExtents, CameraError> {
    depth.check_matches(cam)?;
    let mut min = Vec3::repeat(f64::INFINITY);
    let mut max = Vec3::repeat(f64::NEG_INFINITY);
    let mut any = false;
    for v in 0..depth.height {
        for u in 0..depth.width {
            let d = depth.get(u, v);
            if d <= 0.0 {
                continue;
            }
            any = true;
            let p = cam.backproject_pixel(u as f64, v as f64, d);
            min = min.inf(&p);
            max = max.sup(&p);
        }
    }
    if !any {
        return Err(CameraError::DegenerateExtents);
    }
    Ok(SceneExtents { min, max })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Normalizes `direction`; it must be nonzero.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// Bounded rectangle in 3D. The in-plane "width" axis is the projection of the
/// camera x axis onto the plane (camera y when x is parallel to the normal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane3D {
    pub point: Vec3,
    pub normal: Vec3,
    pub half_width: f64,
    pub half_height: f64,
}

impl Plane3D {
    pub fn new(point: Vec3, normal: Vec3, half_width: f64, half_height: f64) -> Self {
        Self {
            point,
            normal: normal.normalize(),
            half_width,
            half_height,
        }
    }

    /// In-plane unit axes `(width_axis, height_axis)`.
    pub fn basis(&self) -> (Vec3, Vec3) {
        let n = self.normal;
        let mut u = Vec3::x() - n * n.x;
        if u.norm() < 1e-9 {
            u = Vec3::y() - n * n.y;
        }
        let u = u.normalize();
        (u, n.cross(&u))
    }

    pub fn corners(&self) -> [Vec3; 4] {
        let (u, v) = self.basis();
        let (a, b) = (u * self.half_width, v * self.half_height);
        [self.point - a - b, self.point + a - b, self.point + a + b, self.point - a + b]
    }
}

/// Fronto-parallel plane at `max_depth` that exactly fills the view frustum.
pub fn background_plane_placement(cam: &CameraModel, max_depth: f64) -> Plane3D {
    let center = cam.backproject_pixel(cam.width as f64 / 2.0, cam.height as f64 / 2.0, max_depth);
    Plane3D::new(
        center,
        -Vec3::z(),
        max_depth * (cam.width as f64 / 2.0) / cam.fx,
        max_depth * (cam.height as f64 / 2.0) / cam.fy,
    )
}

/// Intersection of `ray` with the bounded plane, for `t >= 0` only.
pub fn ray_plane_intersect(ray: &Ray, plane: &Plane3D) -> Option<Vec3> {
    const EPS: f64 = 1e-9;
    let denom = ray.direction.dot(&plane.normal);
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = (plane.point - ray.origin).dot(&plane.normal) / denom;
    if t < 0.0 {
        return None;
    }
    let hit = ray.at(t);
    let (u, v) = plane.basis();
    let local = hit - plane.point;
    if local.dot(&u).abs() > plane.half_width * (1.0 + EPS) + EPS
        || local.dot(&v).abs() > plane.half_height * (1.0 + EPS) + EPS
    {
        return None;
    }
    Some(hit)
}
