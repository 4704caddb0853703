use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::math::{Axis, Vec3};
use crate::plan::PlanStep;
use crate::scene::Scene3D;
use crate::waypoint::{object_pose, PoseGoal, WaypointError};

use super::mix_seed;

/// Draws per call before giving up on the sign rule.
pub const MAX_REJECTIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResampleError {
    #[error(transparent)]
    Waypoint(#[from] WaypointError),
    #[error("sigma must be finite and non-negative, got {0}")]
    InvalidSigma(f64),
    #[error("no sample satisfied the sampling rules")]
    Rejected,
}

fn same_sign(sampled: f64, original: f64) -> bool {
    original == 0.0 || sampled * original > 0.0
}

/// Gaussian perturbation of a translation goal that keeps the step's intent.
///
/// For `translate_tar_obj` the noise is added to the offset in the target's
/// frame: a zero offset is perturbed on all axes; `[0, 0, dz]` only along z;
/// `dz = 0` only along x and y; otherwise on all axes. Whenever `dz != 0` the
/// sampled z keeps its sign. For `translate_direc_axis` only the distance
/// along the connecting vector is perturbed and keeps its sign. Rotation goals
/// are returned unchanged. `current` is the moving object's pose before the step.
pub fn resample_waypoint(
    goal: &PoseGoal,
    step: &PlanStep,
    scene: &Scene3D,
    current: &PoseGoal,
    sigma: f64,
    seed: u64,
    attempt: u64,
) -> Result<PoseGoal, ResampleError> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(ResampleError::InvalidSigma(sigma));
    }
    let lookup = |id: u32| if id == step.obj() { Ok(*current) } else { object_pose(scene, id) };
    let normal = Normal::new(0.0, sigma).map_err(|_| ResampleError::InvalidSigma(sigma))?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, attempt, 0x5245_5341));
    let mut out = *goal;
    match *step {
        PlanStep::TranslateTarObj { target, offset, .. } => {
            let t = lookup(target)?;
            let (dx, dy, dz) = (offset.x, offset.y, offset.z);
            let mask = if dx == 0.0 && dy == 0.0 && dz == 0.0 {
                Vec3::repeat(1.0)
            } else if dx == 0.0 && dy == 0.0 {
                Vec3::z()
            } else if dz == 0.0 {
                Vec3::new(1.0, 1.0, 0.0)
            } else {
                Vec3::repeat(1.0)
            };
            let sampled = (0..MAX_REJECTIONS)
                .map(|_| offset + Vec3::from_fn(|_, _| normal.sample(&mut rng)).component_mul(&mask))
                .find(|o| same_sign(o.z, dz))
                .ok_or(ResampleError::Rejected)?;
            out.position = t.position + t.axis(Axis::X) * sampled.x + t.axis(Axis::Y) * sampled.y + t.axis(Axis::Z) * sampled.z;
        }
        PlanStep::TranslateDirecAxis { ref1, ref2, distance, .. } => {
            let v = (lookup(ref2)?.position - lookup(ref1)?.position).normalize();
            let sampled = (0..MAX_REJECTIONS)
                .map(|_| distance + normal.sample(&mut rng))
                .find(|d| same_sign(*d, distance))
                .ok_or(ResampleError::Rejected)?;
            out.position = current.position + v * sampled;
        }
        PlanStep::RotateSelf { .. } | PlanStep::RotateWref { .. } => {}
    }
    Ok(out)
}
