//! Goal poses for each plan step.
//!
//! Everything here lives in the canonical world frame (x right, y away from the
//! viewer, z up). An object's pose is its OBB center and the rotation whose
//! columns are its OBB x, y, z axes; that rotation is what the steps act on.

use nalgebra::{Rotation3, Unit, UnitQuaternion};
use thiserror::Error;

use crate::math::{Axis, Mat3, Quat, Vec3};
use crate::plan::{PlanProgram, PlanStep, WrefAmount, WrefMode};
use crate::scene::Scene3D;

/// Below this `|d x z_target|` the target's x axis replaces its z axis.
pub const PARALLEL_EPS: f64 = 1e-6;
const COINCIDENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum WaypointError {
    #[error("unknown object id {0}")]
    UnknownId(u32),
    #[error("object centers coincide, the connecting direction is undefined")]
    CoincidentCenters,
    #[error("step moves object {got} but the manipulating object is {expected}")]
    NotManipulating { got: u32, expected: u32 },
    #[error("step {index}: {source}")]
    Step {
        /// 1-based step position.
        index: usize,
        source: Box<WaypointError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseGoal {
    /// World-frame center in cm.
    pub position: Vec3,
    /// World-frame orientation of the object's local axes.
    pub rotation: Quat,
    /// Index of the step that produced this goal; `None` for a starting pose.
    pub source_step: Option<usize>,
}

impl PoseGoal {
    /// The object's local axis in world coordinates.
    pub fn axis(&self, axis: Axis) -> Vec3 {
        self.rotation * axis.unit()
    }
}

/// Quaternion whose rotation matrix has columns `axes`.
pub fn rotation_from_axes(axes: &[Vec3; 3]) -> Quat {
    let m = Mat3::from_columns(axes);
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_eps(&m, 1e-12, 100, Rotation3::identity()))
}

/// Current world pose of an object in `scene`.
pub fn object_pose(scene: &Scene3D, id: u32) -> Result<PoseGoal, WaypointError> {
    let obj = scene.object(id).ok_or(WaypointError::UnknownId(id))?;
    let frame = scene.frame();
    let axes = obj.obb.axes.map(|a| frame.to_world(&a));
    Ok(PoseGoal {
        position: frame.to_world(&obj.obb.center),
        rotation: rotation_from_axes(&axes),
        source_step: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceAxes {
    /// Unit vector from the moving object toward the target.
    pub d: Vec3,
    pub pitch_axis: Vec3,
    pub yaw_axis: Vec3,
    pub roll_axis: Vec3,
}

impl ReferenceAxes {
    pub fn axis(&self, mode: WrefMode) -> Vec3 {
        match mode {
            WrefMode::Pitch => self.pitch_axis,
            WrefMode::Yaw => self.yaw_axis,
            WrefMode::Roll => self.roll_axis,
        }
    }
}

/// Pitch is `d x z_target`, yaw is `d x pitch`, roll is `d`. When `d` is
/// parallel to `target_z`, `target_x` stands in for it.
pub fn reference_axes(obj_center: &Vec3, target_center: &Vec3, target_z: &Vec3, target_x: &Vec3) -> Result<ReferenceAxes, WaypointError> {
    let diff = target_center - obj_center;
    let n = diff.norm();
    if n < COINCIDENT_EPS {
        return Err(WaypointError::CoincidentCenters);
    }
    let d = diff / n;
    let mut cross = d.cross(target_z);
    if cross.norm() < PARALLEL_EPS {
        cross = d.cross(target_x);
    }
    let pitch_axis = cross.normalize();
    let yaw_axis = d.cross(&pitch_axis).normalize();
    Ok(ReferenceAxes {
        d,
        pitch_axis,
        yaw_axis,
        roll_axis: d,
    })
}

fn rotate_about(q: &Quat, axis: &Vec3, radians: f64) -> Quat {
    UnitQuaternion::from_axis_angle(&Unit::new_normalize(*axis), radians) * q
}

/// Local axis that `rotate_wref` turns toward the target; roll has none.
fn facing_axis(mode: WrefMode) -> Option<Axis> {
    match mode {
        WrefMode::Pitch => Some(Axis::Z),
        WrefMode::Yaw => Some(Axis::Y),
        WrefMode::Roll => None,
    }
}

/// Signed angle about unit `axis` that carries the projection of `from` onto
/// the projection of `to`; zero when either projection vanishes.
fn signed_angle_in_plane(from: &Vec3, to: &Vec3, axis: &Vec3) -> f64 {
    let f = from - axis * axis.dot(from);
    let t = to - axis * axis.dot(to);
    if f.norm() < 1e-12 || t.norm() < 1e-12 {
        return 0.0;
    }
    axis.dot(&f.cross(&t)).atan2(f.dot(&t))
}

fn resolve_with<F>(step: &PlanStep, current: &PoseGoal, pose_of: F) -> Result<PoseGoal, WaypointError>
where
    F: Fn(u32) -> Result<PoseGoal, WaypointError>,
{
    let lookup = |id: u32| if id == step.obj() { Ok(*current) } else { pose_of(id) };
    let mut out = *current;
    match *step {
        PlanStep::RotateSelf { axis, degrees, .. } => {
            out.rotation = rotate_about(&current.rotation, &current.axis(axis), degrees.to_radians());
        }
        PlanStep::RotateWref { target, mode, amount, .. } => {
            let t = lookup(target)?;
            let refs = reference_axes(&current.position, &t.position, &t.axis(Axis::Z), &t.axis(Axis::X))?;
            let axis = refs.axis(mode);
            let facing = facing_axis(mode).map(|a| current.axis(a));
            let radians = match (amount, facing) {
                (WrefAmount::Degrees(deg), Some(f)) => {
                    // Rotating by +e about `axis` changes f.d at the rate axis.(f x d).
                    let sign = if axis.dot(&f.cross(&refs.d)) < 0.0 { -1.0 } else { 1.0 };
                    sign * deg.to_radians()
                }
                (WrefAmount::Degrees(deg), None) => deg.to_radians(),
                (WrefAmount::FixedTowards, Some(f)) => signed_angle_in_plane(&f, &refs.d, &axis),
                (WrefAmount::FixedBack, Some(f)) => signed_angle_in_plane(&f, &-refs.d, &axis),
                (WrefAmount::FixedTowards | WrefAmount::FixedBack, None) => 0.0,
            };
            out.rotation = rotate_about(&current.rotation, &axis, radians);
        }
        PlanStep::TranslateTarObj { target, offset, .. } => {
            let t = lookup(target)?;
            out.position = t.position + t.axis(Axis::X) * offset.x + t.axis(Axis::Y) * offset.y + t.axis(Axis::Z) * offset.z;
        }
        PlanStep::TranslateDirecAxis { ref1, ref2, distance, .. } => {
            let a = lookup(ref1)?.position;
            let b = lookup(ref2)?.position;
            let v = b - a;
            if ref1 == ref2 || v.norm() < COINCIDENT_EPS {
                return Err(WaypointError::CoincidentCenters);
            }
            out.position = current.position + v.normalize() * distance;
        }
    }
    Ok(out)
}

/// Goal reached by applying `step` to the moving object at pose `current`.
/// Other objects are read from `scene`; the moving object is always `current`.
pub fn resolve_step(scene: &Scene3D, step: &PlanStep, current: &PoseGoal) -> Result<PoseGoal, WaypointError> {
    resolve_with(step, current, |id| object_pose(scene, id))
}

/// One goal per step, folding from the manipulating object's pose in `scene`.
pub fn resolve_plan(scene: &Scene3D, program: &PlanProgram) -> Result<Vec<PoseGoal>, WaypointError> {
    let wrap = |index: usize| move |e: WaypointError| WaypointError::Step { index, source: Box::new(e) };
    let mut current = object_pose(scene, program.manipulating_id)?;
    let mut goals = Vec::with_capacity(program.steps.len());
    for (i, step) in program.steps.iter().enumerate() {
        if step.obj() != program.manipulating_id {
            return Err(wrap(i + 1)(WaypointError::NotManipulating {
                got: step.obj(),
                expected: program.manipulating_id,
            }));
        }
        let mut g = resolve_step(scene, step, &current).map_err(wrap(i + 1))?;
        g.source_step = Some(i);
        goals.push(g);
        current = g;
    }
    Ok(goals)
}
