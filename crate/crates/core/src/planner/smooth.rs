use nalgebra::UnitQuaternion;
use thiserror::Error;

use crate::math::{Quat, Vec3};
use crate::waypoint::PoseGoal;

pub const TRANSLATION_SPEED_CM_S: f64 = 10.0;
pub const ROTATION_SPEED_DEG_S: f64 = 45.0;
/// Largest rotation between consecutive samples.
pub const ROTATION_SAMPLE_DEG: f64 = 2.0;
/// Consecutive vertices closer than this are merged.
pub const DUPLICATE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmoothError {
    #[error("a trajectory needs at least two distinct poses")]
    TooFewPoses,
    #[error("expected {expected} leg paths, got {got}")]
    PathCountMismatch { expected: usize, got: usize },
    #[error("leg {leg}: path does not start and end at its goals")]
    PathEndpointMismatch { leg: usize },
    #[error("samples per cm must be positive and finite, got {0}")]
    InvalidDensity(f64),
}

/// Natural cubic spline through 3D points, parameterized by cumulative chord length.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalSpline {
    knots: Vec<f64>,
    /// Per segment `a + b t + c t^2 + d t^3` with `t` measured from the segment start.
    coeffs: Vec<[Vec3; 4]>,
    points: Vec<Vec3>,
}

impl NaturalSpline {
    /// Panics on an empty point list. Consecutive duplicates are merged.
    pub fn through(points: &[Vec3]) -> NaturalSpline {
        assert!(!points.is_empty(), "spline needs at least one point");
        let mut pts: Vec<Vec3> = vec![points[0]];
        for p in &points[1..] {
            if (p - pts[pts.len() - 1]).norm() > DUPLICATE_EPS {
                pts.push(*p);
            }
        }
        let mut knots = vec![0.0];
        for w in pts.windows(2) {
            knots.push(knots[knots.len() - 1] + (w[1] - w[0]).norm());
        }
        let n = pts.len();
        if n == 1 {
            return NaturalSpline { knots, coeffs: Vec::new(), points: pts };
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        // Second derivatives with M_0 = M_{n-1} = 0, by the Thomas algorithm.
        let mut m = vec![Vec3::zeros(); n];
        if n > 2 {
            let inner = n - 2;
            let mut diag = vec![0.0; inner];
            let mut rhs = vec![Vec3::zeros(); inner];
            for i in 0..inner {
                let k = i + 1;
                diag[i] = 2.0 * (h[k - 1] + h[k]);
                rhs[i] = ((pts[k + 1] - pts[k]) / h[k] - (pts[k] - pts[k - 1]) / h[k - 1]) * 6.0;
            }
            for i in 1..inner {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * h[i];
                let prev = rhs[i - 1];
                rhs[i] -= prev * w;
            }
            m[inner] = rhs[inner - 1] / diag[inner - 1];
            for i in (0..inner - 1).rev() {
                m[i + 1] = (rhs[i] - m[i + 2] * h[i + 1]) / diag[i];
            }
        }
        let coeffs = (0..n - 1)
            .map(|i| {
                let hi = h[i];
                let b = (pts[i + 1] - pts[i]) / hi - (m[i] * 2.0 + m[i + 1]) * (hi / 6.0);
                [pts[i], b, m[i] * 0.5, (m[i + 1] - m[i]) / (6.0 * hi)]
            })
            .collect();
        NaturalSpline { knots, coeffs, points: pts }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// The merged interpolation points.
    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn length_parameter(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    fn segment(&self, s: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= s);
        i.saturating_sub(1).min(self.coeffs.len().saturating_sub(1))
    }

    pub fn eval(&self, s: f64) -> Vec3 {
        if self.coeffs.is_empty() {
            return self.points[0];
        }
        let i = self.segment(s);
        let t = s - self.knots[i];
        let [a, b, c, d] = self.coeffs[i];
        a + b * t + c * (t * t) + d * (t * t * t)
    }

    pub fn second_derivative(&self, s: f64) -> Vec3 {
        if self.coeffs.is_empty() {
            return Vec3::zeros();
        }
        let i = self.segment(s);
        let t = s - self.knots[i];
        let [_, _, c, d] = self.coeffs[i];
        c * 2.0 + d * (6.0 * t)
    }
}

/// Constant-speed geodesic from `a` (at `u = 0`) to `b` (at `u = 1`).
pub fn interpolate_rotation(a: &Quat, b: &Quat, u: f64) -> Quat {
    let rel = a.inverse() * b;
    a * UnitQuaternion::from_scaled_axis(rel.scaled_axis() * u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub position: Vec3,
    pub rotation: Quat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Sample index reached at each goal, starting with the initial pose.
    pub waypoint_indices: Vec<usize>,
}

impl Trajectory {
    /// Samples from goal `leg` to goal `leg + 1`, both ends included.
    pub fn leg_samples(&self, leg: usize) -> &[TrajectorySample] {
        &self.samples[self.waypoint_indices[leg]..=self.waypoint_indices[leg + 1]]
    }
}

/// Spline trajectory through every path vertex.
///
/// `paths[i]` runs from `goals[i]` to `goals[i + 1]`. Leg `i` lasts
/// `max(L / 10 cm/s, angle / 45 deg/s)` and gets `max(1, ceil(L * samples_per_cm),
/// ceil(angle / 2 deg))` samples.
pub fn smooth_trajectory(goals: &[PoseGoal], paths: &[Vec<Vec3>], samples_per_cm: f64) -> Result<Trajectory, SmoothError> {
    smooth_trajectory_with(goals, paths, samples_per_cm, &vec![false; paths.len()])
}

/// As [`smooth_trajectory`], but legs flagged in `linear` follow their
/// polyline exactly instead of the spline.
pub fn smooth_trajectory_with(goals: &[PoseGoal], paths: &[Vec<Vec3>], samples_per_cm: f64, linear: &[bool]) -> Result<Trajectory, SmoothError> {
    if !(samples_per_cm.is_finite() && samples_per_cm > 0.0) {
        return Err(SmoothError::InvalidDensity(samples_per_cm));
    }
    if goals.len() < 2 {
        return Err(SmoothError::TooFewPoses);
    }
    let legs = goals.len() - 1;
    if paths.len() != legs {
        return Err(SmoothError::PathCountMismatch { expected: legs, got: paths.len() });
    }
    for (i, p) in paths.iter().enumerate() {
        let ok = match (p.first(), p.last()) {
            (Some(a), Some(b)) => (a - goals[i].position).norm() < 1e-6 && (b - goals[i + 1].position).norm() < 1e-6,
            _ => false,
        };
        if !ok {
            return Err(SmoothError::PathEndpointMismatch { leg: i });
        }
    }
    let distinct = goals
        .windows(2)
        .any(|w| (w[1].position - w[0].position).norm() > DUPLICATE_EPS || w[0].rotation.angle_to(&w[1].rotation) > 1e-12);
    if !distinct {
        return Err(SmoothError::TooFewPoses);
    }

    let all: Vec<Vec3> = paths.iter().flat_map(|p| p.iter().copied()).collect();
    let spline = NaturalSpline::through(&all);
    // Knot parameter of every goal, walking the merged vertex list.
    let mut goal_param = vec![0.0];
    let mut cursor = 0usize;
    let pts = spline.points();
    for p in paths {
        for v in &p[1..] {
            if cursor + 1 < pts.len() && (pts[cursor + 1] - v).norm() <= DUPLICATE_EPS && (pts[cursor] - v).norm() > DUPLICATE_EPS {
                cursor += 1;
            }
        }
        goal_param.push(spline.knots()[cursor]);
    }

    let mut samples = vec![TrajectorySample {
        t: 0.0,
        position: goals[0].position,
        rotation: goals[0].rotation,
    }];
    let mut waypoint_indices = vec![0];
    for leg in 0..legs {
        let (ga, gb) = (&goals[leg], &goals[leg + 1]);
        let (sa, sb) = (goal_param[leg], goal_param[leg + 1]);
        let len = sb - sa;
        let angle = ga.rotation.angle_to(&gb.rotation).to_degrees();
        if len <= DUPLICATE_EPS && angle <= 1e-9 {
            waypoint_indices.push(samples.len() - 1);
            continue;
        }
        let t0 = samples[samples.len() - 1].t;
        let duration = (len / TRANSLATION_SPEED_CM_S).max(angle / ROTATION_SPEED_DEG_S);
        // (fraction of the leg, position) pairs, excluding the leg start.
        let mut points: Vec<(f64, Vec3)> = Vec::new();
        if linear.get(leg).copied().unwrap_or(false) && len > DUPLICATE_EPS {
            let path = &paths[leg];
            let mut acc = 0.0;
            for w in path.windows(2) {
                let l = (w[1] - w[0]).norm();
                if l <= DUPLICATE_EPS {
                    continue;
                }
                let n = 1usize.max((l * samples_per_cm).ceil() as usize).max((angle * l / len / ROTATION_SAMPLE_DEG).ceil() as usize);
                for j in 1..=n {
                    let f = j as f64 / n as f64;
                    points.push(((acc + l * f) / len, w[0].lerp(&w[1], f)));
                }
                acc += l;
            }
        } else {
            let n = 1usize.max((len * samples_per_cm).ceil() as usize).max((angle / ROTATION_SAMPLE_DEG).ceil() as usize);
            for j in 1..=n {
                let u = j as f64 / n as f64;
                points.push((u, spline.eval(sa + len * u)));
            }
        }
        let last = points.len() - 1;
        for (j, (u, p)) in points.into_iter().enumerate() {
            let end = j == last;
            samples.push(TrajectorySample {
                t: if end { t0 + duration } else { t0 + duration * u },
                position: if end { gb.position } else { p },
                rotation: if end { gb.rotation } else { interpolate_rotation(&ga.rotation, &gb.rotation, u) },
            });
        }
        waypoint_indices.push(samples.len() - 1);
    }
    Ok(Trajectory { samples, waypoint_indices })
}
