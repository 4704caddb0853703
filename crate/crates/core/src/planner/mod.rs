//! Collision-free trajectories for a parsed plan: cluster obstacles, RRT* per
//! leg with goal resampling on failure, then spline smoothing.

mod kmeans;
mod obstacles;
mod resample;
mod rrt;
mod smooth;

pub use kmeans::{kmeans_cluster, Clustering, MAX_LLOYD_ITERATIONS};
pub use obstacles::{axis_aligned_half_size, build_obstacles, cluster_boxes, segment_collides, segment_hits_box, ObstacleSet, SLAB_EPS};
pub use resample::{resample_waypoint, ResampleError};
pub use rrt::{path_length, plan_rrt_star, RrtError, RrtParams, RrtPath};
pub use smooth::{
    interpolate_rotation, smooth_trajectory, smooth_trajectory_with, NaturalSpline, SmoothError, Trajectory, TrajectorySample, ROTATION_SAMPLE_DEG,
    ROTATION_SPEED_DEG_S, TRANSLATION_SPEED_CM_S,
};

use thiserror::Error;

use crate::math::{Aabb, Vec3};
use crate::plan::{PlanProgram, PlanStep};
use crate::scene::Scene3D;
use crate::waypoint::{object_pose, resolve_plan, resolve_step, PoseGoal, WaypointError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    /// RRT* steering distance in cm.
    pub step_size: f64,
    pub max_iterations: usize,
    pub goal_bias: f64,
    /// Rewiring radius scale in cm.
    pub neighbor_radius_scale: f64,
    pub rng_seed: u64,
    pub kmeans_k: usize,
    /// Resampling sigma as a fraction of the target's largest OBB dimension.
    pub resample_sigma_scale: f64,
    pub resample_max_attempts: usize,
    pub samples_per_cm: f64,
    /// Sampling volume margin as a fraction of the scene's largest extent.
    pub bounds_margin: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            step_size: 2.0,
            max_iterations: 5000,
            goal_bias: 0.05,
            neighbor_radius_scale: 60.0,
            rng_seed: 0,
            kmeans_k: 64,
            resample_sigma_scale: 0.1,
            resample_max_attempts: 50,
            samples_per_cm: 1.0,
            bounds_margin: 0.2,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlannerError> {
        let bad = |m: &str| Err(PlannerError::Config(m.to_string()));
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return bad("step size must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max iterations must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return bad("goal bias must lie in [0, 1]");
        }
        if !(self.neighbor_radius_scale.is_finite() && self.neighbor_radius_scale >= 0.0) {
            return bad("neighbor radius scale must be non-negative");
        }
        if self.kmeans_k == 0 {
            return bad("k must be at least 1");
        }
        if !(self.resample_sigma_scale.is_finite() && self.resample_sigma_scale >= 0.0) {
            return bad("resample sigma scale must be non-negative");
        }
        if !(self.samples_per_cm.is_finite() && self.samples_per_cm > 0.0) {
            return bad("samples per cm must be positive");
        }
        if !(self.bounds_margin.is_finite() && self.bounds_margin >= 0.0) {
            return bad("bounds margin must be non-negative");
        }
        Ok(())
    }

    fn rrt(&self, seed: u64) -> RrtParams {
        RrtParams {
            step_size: self.step_size,
            max_iterations: self.max_iterations,
            goal_bias: self.goal_bias,
            neighbor_radius_scale: self.neighbor_radius_scale,
            seed,
        }
    }
}

/// Independent stream seed for `(seed, a, b)` via SplitMix64.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegReport {
    /// 0-based plan step.
    pub step: usize,
    pub path: Vec<Vec3>,
    pub cost: f64,
    pub resamples: usize,
    /// Whether the spline was replaced by the polyline to stay collision-free.
    pub linear_fallback: bool,
    /// Inflated boxes the leg was planned against; `None` for in-place legs.
    pub obstacles: Option<ObstacleSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub start: PoseGoal,
    /// Goals actually reached, one per step, after any resampling.
    pub goals: Vec<PoseGoal>,
    pub legs: Vec<LegReport>,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlannerError {
    #[error("invalid planner configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Waypoint(#[from] WaypointError),
    #[error("step {step}: the manipulating object starts inside an obstacle")]
    StartInObstacle { step: usize, completed: Vec<LegReport> },
    #[error("step {step}: no collision-free path after {attempts} resampled goals")]
    Failed { step: usize, attempts: usize, completed: Vec<LegReport> },
    #[error("step {step}: {source}")]
    Resample { step: usize, source: ResampleError },
    #[error(transparent)]
    Smooth(#[from] SmoothError),
}

impl PlannerError {
    /// Legs finished before the failure.
    pub fn completed_legs(&self) -> &[LegReport] {
        match self {
            PlannerError::StartInObstacle { completed, .. } | PlannerError::Failed { completed, .. } => completed,
            _ => &[],
        }
    }
}

fn world_aabb(scene: &Scene3D) -> Option<Aabb> {
    let frame = scene.frame();
    let pts: Vec<Vec3> = scene.objects.iter().flat_map(|o| o.world_vertices()).map(|v| frame.to_world(&v)).collect();
    Aabb::from_points(&pts)
}

/// Object whose size sets the resampling sigma.
fn sigma_object(step: &PlanStep) -> u32 {
    match *step {
        PlanStep::RotateSelf { obj, .. } => obj,
        PlanStep::RotateWref { target, .. } | PlanStep::TranslateTarObj { target, .. } => target,
        PlanStep::TranslateDirecAxis { ref2, .. } => ref2,
    }
}

/// Resolve, plan and smooth `program` against `scene`.
///
/// Each step is resolved from the pose actually reached by the previous one,
/// so a resampled goal carries into later steps. A leg whose goal lies in an
/// obstacle or that RRT* cannot connect gets its goal resampled up to
/// `resample_max_attempts` times.
pub fn plan_trajectory(scene: &Scene3D, program: &PlanProgram, cfg: &PlannerConfig) -> Result<PlanOutcome, PlannerError> {
    cfg.validate()?;
    resolve_plan(scene, program)?;
    let manip = program.manipulating_id;
    let half = scene.object(manip).ok_or(WaypointError::UnknownId(manip))?.obb.half_extents;
    let raw = cluster_boxes(scene, manip, cfg.kmeans_k, cfg.rng_seed);
    let scene_box = world_aabb(scene);

    let start = object_pose(scene, manip)?;
    let mut current = start;
    let mut legs: Vec<LegReport> = Vec::new();
    let mut goals = Vec::new();
    for (i, step) in program.steps.iter().enumerate() {
        let wrap = |e: WaypointError| WaypointError::Step { index: i + 1, source: Box::new(e) };
        let mut goal = resolve_step(scene, step, &current).map_err(wrap)?;
        goal.source_step = Some(i);
        if (goal.position - current.position).norm() <= 1e-9 {
            goal.position = current.position;
            legs.push(LegReport {
                step: i,
                path: vec![current.position, goal.position],
                cost: 0.0,
                resamples: 0,
                linear_fallback: false,
                obstacles: None,
            });
            goals.push(goal);
            current = goal;
            continue;
        }

        let obstacles = raw.inflated(&axis_aligned_half_size(&half, &current.rotation));
        if obstacles.contains_point(&current.position) {
            return Err(PlannerError::StartInObstacle { step: i + 1, completed: legs });
        }
        let sigma = {
            let id = sigma_object(step);
            let h = scene.object(id).map_or(half, |o| o.obb.half_extents);
            cfg.resample_sigma_scale * 2.0 * h.max()
        };
        let original = goal;
        let mut attempt = 0usize;
        let path = loop {
            let mut bounds = Aabb::new(current.position, current.position);
            bounds.extend(&goal.position);
            if let Some(b) = scene_box {
                bounds = bounds.union(&b);
            }
            let bounds = bounds.inflate_fraction(cfg.bounds_margin, cfg.step_size);
            let seed = mix_seed(cfg.rng_seed, i as u64, attempt as u64);
            match plan_rrt_star(&current.position, &goal.position, &obstacles, &bounds, &cfg.rrt(seed)) {
                Ok(Some(p)) => break p,
                Ok(None) | Err(RrtError::GoalInObstacle) | Err(RrtError::OutOfBounds) => {}
                Err(RrtError::StartInObstacle) => return Err(PlannerError::StartInObstacle { step: i + 1, completed: legs }),
            }
            attempt += 1;
            if attempt > cfg.resample_max_attempts {
                return Err(PlannerError::Failed {
                    step: i + 1,
                    attempts: cfg.resample_max_attempts,
                    completed: legs,
                });
            }
            goal = resample_waypoint(&original, step, scene, &current, sigma, mix_seed(cfg.rng_seed, i as u64, u64::MAX), attempt as u64)
                .map_err(|source| PlannerError::Resample { step: i + 1, source })?;
        };
        legs.push(LegReport {
            step: i,
            cost: path.cost,
            path: path.points,
            resamples: attempt,
            linear_fallback: false,
            obstacles: Some(obstacles),
        });
        goals.push(goal);
        current = goal;
    }

    let mut poses = vec![start];
    poses.extend(goals.iter().copied());
    let paths: Vec<Vec<Vec3>> = legs.iter().map(|l| l.path.clone()).collect();
    let mut trajectory = smooth_trajectory(&poses, &paths, cfg.samples_per_cm)?;
    let mut linear = vec![false; legs.len()];
    for (k, leg) in legs.iter().enumerate() {
        if let Some(obs) = &leg.obstacles {
            linear[k] = trajectory.leg_samples(k).windows(2).any(|w| segment_collides(&w[0].position, &w[1].position, obs));
        }
    }
    if linear.iter().any(|&l| l) {
        trajectory = smooth_trajectory_with(&poses, &paths, cfg.samples_per_cm, &linear)?;
        for (leg, l) in legs.iter_mut().zip(&linear) {
            leg.linear_fallback = *l;
        }
    }
    Ok(PlanOutcome {
        start,
        goals,
        legs,
        trajectory,
    })
}
