//! Trajectory text format, version 1:
//!
//! ```text
//! schema: 1
//! waypoints: 0 12 40
//! t_s,x_cm,y_cm,z_cm,qw,qx,qy,qz
//! 0.000000000,1.500000000,...
//! ```
//!
//! `waypoints` lists the sample index reached at the start pose and at each
//! step goal. Every record has 9 decimals and no negative zero; positions and
//! rotations are in the world frame (x right, y away from the viewer, z up).
//! Lines end with `\n`.

use super::FormatError;
use crate::math::{fmt_fixed, Vec3};
use crate::planner::{Trajectory, TrajectorySample};

pub const TRAJECTORY_SCHEMA: u32 = 1;
pub const TRAJECTORY_HEADER: &str = "t_s,x_cm,y_cm,z_cm,qw,qx,qy,qz";

pub fn format_trajectory(tr: &Trajectory) -> String {
    let mut out = format!("schema: {TRAJECTORY_SCHEMA}\nwaypoints:");
    for i in &tr.waypoint_indices {
        out += &format!(" {i}");
    }
    out += "\n";
    out += TRAJECTORY_HEADER;
    out += "\n";
    for s in &tr.samples {
        let c = s.rotation.quaternion().coords;
        let fields = [s.t, s.position.x, s.position.y, s.position.z, c.w, c.x, c.y, c.z];
        let line: Vec<String> = fields.iter().map(|v| fmt_fixed(*v, 9)).collect();
        out += &line.join(",");
        out += "\n";
    }
    out
}

pub fn parse_trajectory(text: &str) -> Result<Trajectory, FormatError> {
    let mut lines = text.lines().enumerate();
    let mut next = |what: &str| lines.next().ok_or_else(|| FormatError::new(format!("missing {what} line")));
    let (_, schema) = next("schema")?;
    if schema.trim() != format!("schema: {TRAJECTORY_SCHEMA}") {
        return Err(FormatError::new(format!("line 1: expected 'schema: {TRAJECTORY_SCHEMA}'")));
    }
    let (_, wp) = next("waypoints")?;
    let rest = wp.strip_prefix("waypoints:").ok_or_else(|| FormatError::new("line 2: expected 'waypoints:'"))?;
    let waypoint_indices = rest
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| FormatError::new("line 2: bad waypoint index"))?;
    let (_, header) = next("header")?;
    if header.trim() != TRAJECTORY_HEADER {
        return Err(FormatError::new("line 3: unexpected column header"));
    }
    let mut samples = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| FormatError::new(format!("line {}: bad number", i + 1)))?;
        if v.len() != 8 {
            return Err(FormatError::new(format!("line {}: expected 8 fields, found {}", i + 1, v.len())));
        }
        let q = nalgebra::Quaternion::new(v[4], v[5], v[6], v[7]);
        samples.push(TrajectorySample {
            t: v[0],
            position: Vec3::new(v[1], v[2], v[3]),
            rotation: nalgebra::UnitQuaternion::from_quaternion(q),
        });
    }
    if waypoint_indices.iter().any(|&i| i >= samples.len()) {
        return Err(FormatError::new("waypoint index beyond the last sample"));
    }
    Ok(Trajectory { samples, waypoint_indices })
}
