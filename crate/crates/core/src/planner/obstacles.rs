use crate::math::{Aabb, Quat, Vec3};
use crate::scene::Scene3D;

use super::kmeans::kmeans_cluster;

/// Inclusive tolerance of the slab test.
pub const SLAB_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObstacleSet {
    /// World-frame boxes in cm.
    pub boxes: Vec<Aabb>,
    /// Object id that produced each box.
    pub sources: Vec<u32>,
}

impl ObstacleSet {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Every box grown by `amount` on both sides of each axis.
    pub fn inflated(&self, amount: &Vec3) -> ObstacleSet {
        ObstacleSet {
            boxes: self.boxes.iter().map(|b| b.inflate(amount)).collect(),
            sources: self.sources.clone(),
        }
    }

    pub fn bounds(&self) -> Option<Aabb> {
        let mut it = self.boxes.iter();
        let first = *it.next()?;
        Some(it.fold(first, |acc, b| acc.union(b)))
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        segment_collides(p, p, self)
    }
}

/// Half size along each world axis of a box with `half_extents` along the
/// columns of `rotation`.
pub fn axis_aligned_half_size(half_extents: &Vec3, rotation: &Quat) -> Vec3 {
    let m = rotation.to_rotation_matrix();
    let m = m.matrix();
    Vec3::from_fn(|r, _| (0..3).map(|c| half_extents[c] * m[(r, c)].abs()).sum())
}

/// Uninflated cluster boxes of every object except `manipulating_id`.
///
/// Triangle centroids are clustered and each box is the AABB of its cluster's
/// triangles, so the boxes cover every mesh surface without gaps.
pub fn cluster_boxes(scene: &Scene3D, manipulating_id: u32, k: usize, seed: u64) -> ObstacleSet {
    let frame = scene.frame();
    let mut set = ObstacleSet::default();
    for obj in scene.objects.iter().filter(|o| o.id != manipulating_id) {
        let verts: Vec<Vec3> = obj.world_vertices().iter().map(|v| frame.to_world(v)).collect();
        let tris = obj.mesh.triangles();
        if tris.is_empty() {
            continue;
        }
        let centroids: Vec<Vec3> = tris.iter().map(|t| (verts[t[0]] + verts[t[1]] + verts[t[2]]) / 3.0).collect();
        let clusters = kmeans_cluster(&centroids, k.max(1), seed ^ u64::from(obj.id));
        for c in 0..clusters.centers.len() {
            if clusters.empty[c] {
                continue;
            }
            let pts = clusters.members(c).flat_map(|t| tris[t].iter().map(|&i| verts[i]));
            let mut b: Option<Aabb> = None;
            for p in pts {
                match &mut b {
                    Some(b) => b.extend(&p),
                    None => b = Some(Aabb::new(p, p)),
                }
            }
            if let Some(b) = b {
                set.boxes.push(b);
                set.sources.push(obj.id);
            }
        }
    }
    set
}

/// Cluster boxes inflated by the manipulating object's world-axis half size at
/// its current pose.
pub fn build_obstacles(scene: &Scene3D, manipulating_id: u32, k: usize, seed: u64) -> ObstacleSet {
    let raw = cluster_boxes(scene, manipulating_id, k, seed);
    match scene.object(manipulating_id) {
        Some(m) => {
            let frame = scene.frame();
            let axes = m.obb.axes.map(|a| frame.to_world(&a));
            let rot = crate::waypoint::rotation_from_axes(&axes);
            raw.inflated(&axis_aligned_half_size(&m.obb.half_extents, &rot))
        }
        None => raw,
    }
}

/// Segment `a`-`b` against one box by the slab method, faces inclusive.
pub fn segment_hits_box(a: &Vec3, b: &Vec3, bx: &Aabb) -> bool {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..3 {
        let lo = bx.min[k] - SLAB_EPS;
        let hi = bx.max[k] + SLAB_EPS;
        if d[k].abs() < 1e-300 {
            if a[k] < lo || a[k] > hi {
                return false;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo - a[k]) / d[k], (hi - a[k]) / d[k]);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}

pub fn segment_collides(a: &Vec3, b: &Vec3, obstacles: &ObstacleSet) -> bool {
    obstacles.boxes.iter().any(|bx| segment_hits_box(a, b, bx))
}
