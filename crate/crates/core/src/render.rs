//! Silhouette rasterization of triangle meshes and icosphere viewpoint sets.
//!
//! Pixels are sampled at their integer centers. Triangle coverage follows a
//! top-left style tie rule so that edges shared by two triangles are filled
//! exactly once and an axis-aligned square spanning `n` pixel units covers
//! exactly `n` pixel columns.

use std::collections::HashMap;

use nalgebra::{Matrix3, Rotation3, UnitQuaternion};
use thiserror::Error;

use crate::camera::{CameraModel, DepthMap};
use crate::mask::BinaryMask;
use crate::math::{Quat, Vec3};

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("vertex {vertex} is at or behind the camera plane (view depth {depth})")]
    BehindCamera { vertex: usize, depth: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("object scale must be positive, got {0}")]
    InvalidScale(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, RenderError> {
        if triangles.is_empty() {
            return Err(RenderError::InvalidMesh("mesh has no triangles".into()));
        }
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(RenderError::InvalidMesh(format!("vertex {i} is not finite")));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(bad) = tri.iter().find(|i| **i >= vertices.len()) {
                return Err(RenderError::InvalidMesh(format!(
                    "triangle {t} references vertex {bad} but only {} exist",
                    vertices.len()
                )));
            }
        }
        Ok(Self { vertices, triangles })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn aabb_center(&self) -> Vec3 {
        crate::math::Aabb::from_points(&self.vertices)
            .map(|b| b.center())
            .unwrap_or_else(Vec3::zeros)
    }

    /// Copy translated so that its bounding-box center sits at the origin.
    pub fn centered(&self) -> TriMesh {
        let c = self.aabb_center();
        TriMesh {
            vertices: self.vertices.iter().map(|v| v - c).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Largest vertex distance from the origin.
    pub fn bounding_radius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest bounding-box side.
    pub fn max_extent(&self) -> f64 {
        crate::math::Aabb::from_points(&self.vertices)
            .map(|b| b.extent().max())
            .unwrap_or(0.0)
    }

    /// Vertices after `position + rotation * (scale * v)`.
    pub fn transformed_vertices(&self, rotation: &Quat, scale: f64, position: &Vec3) -> Vec<Vec3> {
        self.vertices.iter().map(|v| position + rotation * (v * scale)).collect()
    }

    /// Box with the given half extents, centered at the origin.
    pub fn cuboid(half: Vec3) -> TriMesh {
        Self::cuboid_between(-half, half)
    }

    pub fn cuboid_between(min: Vec3, max: Vec3) -> TriMesh {
        let v = |x: bool, y: bool, z: bool| {
            Vec3::new(if x { max.x } else { min.x }, if y { max.y } else { min.y }, if z { max.z } else { min.z })
        };
        let vertices = vec![
            v(false, false, false),
            v(true, false, false),
            v(true, true, false),
            v(false, true, false),
            v(false, false, true),
            v(true, false, true),
            v(true, true, true),
            v(false, true, true),
        ];
        let triangles = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        TriMesh { vertices, triangles }
    }

    /// Latitude/longitude ellipsoid with semi-axes `radii`.
    pub fn ellipsoid(radii: Vec3, stacks: usize, slices: usize) -> TriMesh {
        let stacks = stacks.max(2);
        let slices = slices.max(3);
        let mut vertices = vec![Vec3::new(0.0, 0.0, radii.z)];
        for i in 1..stacks {
            let phi = std::f64::consts::PI * i as f64 / stacks as f64;
            for j in 0..slices {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / slices as f64;
                vertices.push(Vec3::new(
                    radii.x * phi.sin() * theta.cos(),
                    radii.y * phi.sin() * theta.sin(),
                    radii.z * phi.cos(),
                ));
            }
        }
        vertices.push(Vec3::new(0.0, 0.0, -radii.z));
        let bottom = vertices.len() - 1;
        let ring = |i: usize, j: usize| 1 + (i - 1) * slices + j % slices;
        let mut triangles = Vec::new();
        for j in 0..slices {
            triangles.push([0, ring(1, j), ring(1, j + 1)]);
            triangles.push([bottom, ring(stacks - 1, j + 1), ring(stacks - 1, j)]);
        }
        for i in 1..stacks - 1 {
            for j in 0..slices {
                triangles.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
                triangles.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
            }
        }
        TriMesh { vertices, triangles }
    }

    /// Unit-radius subdivided icosahedron.
    pub fn icosphere(level: u32) -> TriMesh {
        let (vertices, triangles) = icosphere_geometry(level);
        TriMesh { vertices, triangles }
    }

    /// Two overlapping boxes forming an "L" with unequal arms, heights and
    /// vertical offsets, so no view along a box axis is centrally symmetric.
    pub fn l_shape() -> TriMesh {
        let a = TriMesh::cuboid_between(Vec3::new(0.0, 0.0, 0.0), Vec3::new(4.0, 1.0, 1.0));
        let b = TriMesh::cuboid_between(Vec3::new(0.0, 0.0, 0.3), Vec3::new(1.0, 2.5, 1.6));
        a.merged(&b).centered()
    }

    pub fn merged(&self, other: &TriMesh) -> TriMesh {
        let off = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut triangles = self.triangles.clone();
        triangles.extend(other.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        TriMesh { vertices, triangles }
    }
}

fn icosphere_geometry(level: u32) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|(x, y, z)| Vec3::new(*x, *y, *z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (verts, faces)
}

/// Camera pose: `rotation` maps camera-frame vectors to world vectors and
/// `position` is the camera center in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewpoint {
    pub rotation: Quat,
    pub position: Vec3,
}

impl Viewpoint {
    /// Camera on the -z axis at distance `radius`, looking along +z with no roll.
    pub fn canonical(radius: f64) -> Self {
        Self {
            rotation: Quat::identity(),
            position: Vec3::new(0.0, 0.0, -radius),
        }
    }

    /// The scene camera (at the origin, identity orientation) expressed in the
    /// coordinates of an object placed at `object_position`.
    pub fn scene_camera_for(object_position: &Vec3) -> Self {
        Self {
            rotation: Quat::identity(),
            position: -object_position,
        }
    }

    pub fn world_to_camera(&self, p: &Vec3) -> Vec3 {
        self.rotation.inverse_transform_vector(&(p - self.position))
    }

    pub fn optical_axis(&self) -> Vec3 {
        self.rotation * Vec3::z()
    }
}

/// Number of vertices of the icosphere at `level`: `10 * 4^level + 2`.
pub fn icosphere_vertex_count(level: u32) -> usize {
    10 * 4usize.pow(level) + 2
}

/// Cameras on a subdivided icosahedron of radius `radius`, each looking at the
/// origin, with `inplane_count` rolls evenly spaced in [0, 360). Viewpoint
/// `j` uses sphere vertex `j / inplane_count` and roll `j % inplane_count`.
pub fn icosphere_viewpoints(level: u32, inplane_count: u32, radius: f64) -> Vec<Viewpoint> {
    let (verts, _) = icosphere_geometry(level);
    let rolls = inplane_count.max(1);
    let mut out = Vec::with_capacity(verts.len() * rolls as usize);
    for dir in verts {
        let z = -dir;
        let reference = if z.y.abs() < 0.99 { Vec3::y() } else { Vec3::x() };
        let x = reference.cross(&z).normalize();
        let y = z.cross(&x);
        let base = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
        let base = UnitQuaternion::from_rotation_matrix(&base);
        for k in 0..rolls {
            let roll = 2.0 * std::f64::consts::PI * k as f64 / rolls as f64;
            let rotation = base * UnitQuaternion::from_axis_angle(&Vec3::z_axis(), roll);
            out.push(Viewpoint {
                rotation,
                position: dir * radius,
            });
        }
    }
    out
}

/// Vertices in pixel coordinates plus view depth, or the first offending vertex.
fn project_vertices(
    mesh: &TriMesh,
    rotation: &Quat,
    scale: f64,
    position: &Vec3,
    view: &Viewpoint,
    cam: &CameraModel,
) -> Result<Vec<(f64, f64, f64)>, RenderError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(RenderError::InvalidScale(scale));
    }
    let mut out = Vec::with_capacity(mesh.vertices.len());
    for (i, v) in mesh.vertices.iter().enumerate() {
        let world = position + rotation * (v * scale);
        let c = view.world_to_camera(&world);
        if c.z <= 0.0 {
            return Err(RenderError::BehindCamera { vertex: i, depth: c.z });
        }
        out.push((cam.fx * c.x / c.z + cam.cx, cam.fy * c.y / c.z + cam.cy, c.z));
    }
    Ok(out)
}

const EDGE_EPS: f64 = 1e-9;

/// Tie rule for pixel centers exactly on an edge. For a direction `d` exactly one
/// of `d` and `-d` is owned, so a shared edge is filled by exactly one triangle.
#[inline]
pub(crate) fn owns_edge(dx: f64, dy: f64) -> bool {
    dy > 0.0 || (dy == 0.0 && dx < 0.0)
}

#[inline]
pub(crate) fn edge_fn(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

#[inline]
pub(crate) fn edge_covers(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    let e = edge_fn(a, b, p);
    e > EDGE_EPS || (e >= -EDGE_EPS && owns_edge(b.0 - a.0, b.1 - a.1))
}

/// Visit every pixel covered by the screen triangle, with barycentric weights.
fn raster_triangle(
    mut p: [(f64, f64); 3],
    width: u32,
    height: u32,
    mut visit: impl FnMut(u32, u32, [f64; 3]),
) {
    let mut area = edge_fn(p[0], p[1], p[2]);
    let mut order = [0usize, 1, 2];
    if area.abs() < 1e-12 {
        return;
    }
    if area < 0.0 {
        p.swap(1, 2);
        order.swap(1, 2);
        area = -area;
    }
    let min_x = p.iter().map(|q| q.0).fold(f64::INFINITY, f64::min);
    let max_x = p.iter().map(|q| q.0).fold(f64::NEG_INFINITY, f64::max);
    let min_y = p.iter().map(|q| q.1).fold(f64::INFINITY, f64::min);
    let max_y = p.iter().map(|q| q.1).fold(f64::NEG_INFINITY, f64::max);
    if max_x < 0.0 || max_y < 0.0 || min_x > (width - 1) as f64 || min_y > (height - 1) as f64 {
        return;
    }
    let x0 = (min_x - EDGE_EPS).ceil().max(0.0) as u32;
    let x1 = ((max_x + EDGE_EPS).floor() as i64).min(width as i64 - 1);
    let y0 = (min_y - EDGE_EPS).ceil().max(0.0) as u32;
    let y1 = ((max_y + EDGE_EPS).floor() as i64).min(height as i64 - 1);
    if x1 < 0 || y1 < 0 {
        return;
    }
    for y in y0..=y1 as u32 {
        for x in x0..=x1 as u32 {
            let q = (x as f64, y as f64);
            if edge_covers(p[1], p[2], q) && edge_covers(p[2], p[0], q) && edge_covers(p[0], p[1], q) {
                let w0 = edge_fn(p[1], p[2], q) / area;
                let w1 = edge_fn(p[2], p[0], q) / area;
                let w2 = 1.0 - w0 - w1;
                let mut w = [0.0; 3];
                w[order[0]] = w0;
                w[order[1]] = w1;
                w[order[2]] = w2;
                visit(x, y, w);
            }
        }
    }
}

/// Binary silhouette of `mesh` rotated by `object_rotation`, scaled by
/// `object_scale` and centered at the origin, seen from `view`.
pub fn render_silhouette(
    mesh: &TriMesh,
    object_rotation: &Quat,
    object_scale: f64,
    view: &Viewpoint,
    cam: &CameraModel,
) -> Result<BinaryMask, RenderError> {
    render_silhouette_at(mesh, object_rotation, object_scale, &Vec3::zeros(), view, cam)
}

/// As [`render_silhouette`] with the object centered at `object_position`.
pub fn render_silhouette_at(
    mesh: &TriMesh,
    object_rotation: &Quat,
    object_scale: f64,
    object_position: &Vec3,
    view: &Viewpoint,
    cam: &CameraModel,
) -> Result<BinaryMask, RenderError> {
    let px = project_vertices(mesh, object_rotation, object_scale, object_position, view, cam)?;
    let mut mask = BinaryMask::new(cam.width, cam.height).expect("camera dimensions are positive");
    for tri in &mesh.triangles {
        let p = [tri[0], tri[1], tri[2]].map(|i| (px[i].0, px[i].1));
        raster_triangle(p, cam.width, cam.height, |x, y, _| mask.set(x, y, true));
    }
    Ok(mask)
}

/// A posed mesh for depth rendering.
#[derive(Debug, Clone, Copy)]
pub struct PosedMesh<'a> {
    pub mesh: &'a TriMesh,
    pub rotation: Quat,
    pub scale: f64,
    pub position: Vec3,
}

/// Z-buffered perpendicular depth of several meshes from the scene camera at the
/// origin, over a fronto-parallel background at `background_depth`
/// (`0` leaves uncovered pixels empty).
pub fn render_depth(objects: &[PosedMesh<'_>], background_depth: f64, cam: &CameraModel) -> Result<DepthMap, RenderError> {
    let (w, h) = (cam.width as usize, cam.height as usize);
    let mut buf = vec![if background_depth > 0.0 { background_depth } else { f64::INFINITY }; w * h];
    let view = Viewpoint::scene_camera_for(&Vec3::zeros());
    for obj in objects {
        let px = project_vertices(obj.mesh, &obj.rotation, obj.scale, &obj.position, &view, cam)?;
        for tri in &obj.mesh.triangles {
            let p = [tri[0], tri[1], tri[2]].map(|i| (px[i].0, px[i].1));
            let inv_z = [tri[0], tri[1], tri[2]].map(|i| 1.0 / px[i].2);
            raster_triangle(p, cam.width, cam.height, |x, y, bary| {
                let z = 1.0 / (bary[0] * inv_z[0] + bary[1] * inv_z[1] + bary[2] * inv_z[2]);
                let slot = &mut buf[y as usize * w + x as usize];
                if z < *slot {
                    *slot = z;
                }
            });
        }
    }
    let values = buf.into_iter().map(|z| if z.is_finite() { z } else { 0.0 }).collect();
    Ok(DepthMap::new(cam.width, cam.height, values).expect("buffer matches camera"))
}
