//! Perspective canonicalization, spatial summaries, exact metric queries and
//! scene-to-scene diffs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::Rotation3;
use thiserror::Error;

use crate::camera::SceneExtents;
use crate::math::{angle_between_deg, fmt_fixed, fmt_vec, rotation_angle_deg, Axis, Mat3, Quat, Vec3};
use crate::scene::{ObjectInstance, Scene3D};

#[derive(Debug, Error, PartialEq)]
pub enum ContextError {
    #[error("unknown object id {0}")]
    UnknownId(u32),
    #[error("the two scenes share no object ids")]
    NoCommonIds,
    #[error("invalid query '{token}': {message}")]
    InvalidQuery { token: String, message: String },
}

fn invalid(token: &str, message: impl Into<String>) -> ContextError {
    ContextError::InvalidQuery {
        token: token.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShotAngle {
    Horizontal,
    TopDown,
    BottomUp,
}

impl ShotAngle {
    pub fn as_str(self) -> &'static str {
        match self {
            ShotAngle::Horizontal => "horizontal",
            ShotAngle::TopDown => "top_down",
            ShotAngle::BottomUp => "bottom_up",
        }
    }
}

impl fmt::Display for ShotAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShotAngle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "horizontal" => Ok(ShotAngle::Horizontal),
            "top_down" => Ok(ShotAngle::TopDown),
            "bottom_up" => Ok(ShotAngle::BottomUp),
            other => Err(format!("unknown shot angle '{other}' (expected horizontal, top_down or bottom_up)")),
        }
    }
}

/// Signed permutation taking camera coordinates (x right, y down, z forward)
/// to world coordinates (x right, y away from the viewer, z up).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalFrame {
    pub shot_angle: ShotAngle,
    pub mapping: Mat3,
}

impl CanonicalFrame {
    pub fn new(shot_angle: ShotAngle) -> Self {
        let mapping = match shot_angle {
            ShotAngle::Horizontal => Mat3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0),
            ShotAngle::TopDown => Mat3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0),
            ShotAngle::BottomUp => Mat3::identity(),
        };
        Self { shot_angle, mapping }
    }

    pub fn to_world(&self, v: &Vec3) -> Vec3 {
        self.mapping * v
    }

    pub fn to_camera(&self, v: &Vec3) -> Vec3 {
        self.mapping.transpose() * v
    }

    /// Camera-frame rotation expressed in world coordinates.
    pub fn rotation_to_world(&self, q: &Quat) -> Quat {
        let m = self.mapping_quat();
        m * q * m.inverse()
    }

    /// World-frame rotation expressed in camera coordinates.
    pub fn rotation_to_camera(&self, q: &Quat) -> Quat {
        let m = self.mapping_quat();
        m.inverse() * q * m
    }

    fn mapping_quat(&self) -> Quat {
        Quat::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.mapping))
    }
}

pub fn canonical_axes(shot_angle: ShotAngle) -> CanonicalFrame {
    CanonicalFrame::new(shot_angle)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confidence {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotAngleSuggestion {
    pub angle: ShotAngle,
    pub confidence: Confidence,
    /// The depth profile cannot tell a top-down view from a bottom-up one;
    /// `angle` then holds the top-down default.
    pub top_down_or_bottom_up: bool,
}

/// Ratio of depth span to scene diagonal below which a view is taken as non-horizontal.
pub const FLAT_DEPTH_RATIO: f64 = 0.15;

/// Shot angle heuristic from the depth profile. An explicit angle always wins.
pub fn infer_shot_angle(extents: &SceneExtents, explicit: Option<ShotAngle>) -> ShotAngleSuggestion {
    if let Some(angle) = explicit {
        return ShotAngleSuggestion {
            angle,
            confidence: Confidence::High,
            top_down_or_bottom_up: false,
        };
    }
    let diag = extents.diagonal();
    let ratio = if diag > 0.0 { extents.depth_span() / diag } else { 0.0 };
    if ratio < FLAT_DEPTH_RATIO {
        ShotAngleSuggestion {
            angle: ShotAngle::TopDown,
            confidence: Confidence::Low,
            top_down_or_bottom_up: true,
        }
    } else {
        ShotAngleSuggestion {
            angle: ShotAngle::Horizontal,
            confidence: Confidence::High,
            top_down_or_bottom_up: false,
        }
    }
}

/// Direction of one object relative to another in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Left,
    Right,
    Front,
    Behind,
    Above,
    Below,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::Left,
        Direction::Right,
        Direction::Front,
        Direction::Behind,
        Direction::Above,
        Direction::Below,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Front => "front",
            Direction::Behind => "behind",
            Direction::Above => "above",
            Direction::Below => "below",
        }
    }

    /// Bucket of a world-frame offset by its largest-magnitude component
    /// (earlier axes win exact ties); `None` for the zero vector.
    pub fn of_offset(v: &Vec3) -> Option<Direction> {
        let mut k = 0;
        for i in 1..3 {
            if v[i].abs() > v[k].abs() {
                k = i;
            }
        }
        if v[k] == 0.0 {
            return None;
        }
        let pos = v[k] > 0.0;
        Some(match (k, pos) {
            (0, true) => Direction::Right,
            (0, false) => Direction::Left,
            (1, true) => Direction::Behind,
            (1, false) => Direction::Front,
            (_, true) => Direction::Above,
            (_, false) => Direction::Below,
        })
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Direction::Left),
            "right" => Ok(Direction::Right),
            "front" => Ok(Direction::Front),
            "behind" | "back" => Ok(Direction::Behind),
            "above" | "up" => Ok(Direction::Above),
            "below" | "down" => Ok(Direction::Below),
            other => Err(format!("unknown direction '{other}'")),
        }
    }
}

/// An object's pose in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPose {
    pub center: Vec3,
    /// OBB x, y, z axes.
    pub axes: [Vec3; 3],
    /// Width, depth, height: full OBB extents along x, y, z.
    pub size: Vec3,
}

pub fn world_pose(frame: &CanonicalFrame, obj: &ObjectInstance) -> WorldPose {
    WorldPose {
        center: frame.to_world(&obj.obb.center),
        axes: obj.obb.axes.map(|a| frame.to_world(&a)),
        size: obj.obb.half_extents * 2.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSummary {
    pub id: u32,
    pub name: String,
    pub pose: WorldPose,
    pub closest: BTreeMap<Direction, u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSummary {
    pub shot_angle: ShotAngle,
    pub objects: Vec<ObjectSummary>,
}

impl SpatialSummary {
    pub fn render(&self) -> String {
        let mut out = format!(
            "Spatial context ({} shot; x right, y away from viewer, z up; cm)\n",
            self.shot_angle
        );
        for o in &self.objects {
            let p = &o.pose;
            out += &format!(
                "Obj {} spatial context: 3D center: {} cm; X-axis (right): {}; Y-axis (back): {}; Z-axis (up): {}\n",
                o.id,
                fmt_vec(&p.center, 1),
                fmt_vec(&p.axes[0], 4),
                fmt_vec(&p.axes[1], 4),
                fmt_vec(&p.axes[2], 4)
            );
            out += &format!(
                "Obj {} size: {} cm x {} cm x {} cm (WxDxH)\n",
                o.id,
                fmt_fixed(p.size.x, 2),
                fmt_fixed(p.size.y, 2),
                fmt_fixed(p.size.z, 2)
            );
            if !o.closest.is_empty() {
                let parts: Vec<String> = o.closest.iter().map(|(d, id)| format!("{d}: Obj {id}")).collect();
                out += &format!("Obj {} closest per direction: {}\n", o.id, parts.join("; "));
            }
        }
        out
    }
}

/// Nearest neighbor per direction bucket; Euclidean distance, ties to the lower id.
pub fn closest_per_direction(poses: &[(u32, WorldPose)], subject: usize) -> BTreeMap<Direction, u32> {
    let mut best: BTreeMap<Direction, (f64, u32)> = BTreeMap::new();
    let me = poses[subject].1.center;
    for (i, (id, p)) in poses.iter().enumerate() {
        if i == subject {
            continue;
        }
        let off = p.center - me;
        let Some(dir) = Direction::of_offset(&off) else { continue };
        let d = off.norm();
        let better = match best.get(&dir) {
            None => true,
            Some((bd, bid)) => d < *bd || (d == *bd && id < bid),
        };
        if better {
            best.insert(dir, (d, *id));
        }
    }
    best.into_iter().map(|(k, (_, id))| (k, id)).collect()
}

pub fn summarize_scene(scene: &Scene3D) -> SpatialSummary {
    let frame = scene.frame();
    let mut objs: Vec<&ObjectInstance> = scene.objects.iter().collect();
    objs.sort_by_key(|o| o.id);
    let poses: Vec<(u32, WorldPose)> = objs.iter().map(|o| (o.id, world_pose(&frame, o))).collect();
    let objects = objs
        .iter()
        .enumerate()
        .map(|(i, o)| ObjectSummary {
            id: o.id,
            name: o.name.clone(),
            pose: poses[i].1,
            closest: closest_per_direction(&poses, i),
        })
        .collect();
    SpatialSummary {
        shot_angle: scene.shot_angle,
        objects,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountPredicate {
    Upright,
    NotUpright,
}

/// Default tilt threshold for "upright".
pub const UPRIGHT_THRESHOLD_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricQuery {
    Distance { a: u32, b: u32 },
    DistanceAxis { a: u32, b: u32, axis: Axis },
    Size { a: u32, axis: Option<Axis> },
    Tilt { a: u32 },
    /// Signed tilt of the object z axis within the plane normal to `axis` (x or y).
    TiltAxis { a: u32, axis: Axis },
    AngleBetween { a: u32, b: u32, axis: Axis },
    /// Where `a` lies relative to `b`, or whether it lies in `direction`.
    Relation { a: u32, b: u32, direction: Option<Direction> },
    Count { predicate: CountPredicate, threshold_deg: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Answer {
    Length(f64),
    Size(Vec3),
    Angle(f64),
    Direction(Option<Direction>),
    YesNo(bool),
    Count(Vec<u32>),
}

impl Answer {
    /// `value unit` text as printed after the query index.
    pub fn render(&self) -> String {
        match self {
            Answer::Length(v) => format!("{} cm", fmt_fixed(*v, 2)),
            Answer::Size(s) => format!("{} x {} x {} cm", fmt_fixed(s.x, 2), fmt_fixed(s.y, 2), fmt_fixed(s.z, 2)),
            Answer::Angle(v) => format!("{} deg", fmt_fixed(*v, 2)),
            Answer::Direction(d) => d.map_or("same position".to_string(), |d| d.to_string()),
            Answer::YesNo(b) => (if *b { "yes" } else { "no" }).to_string(),
            Answer::Count(ids) => {
                let list: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
                format!("{} objects [{}]", ids.len(), list.join(", "))
            }
        }
    }
}

fn pose_of(scene: &Scene3D, frame: &CanonicalFrame, id: u32) -> Result<WorldPose, ContextError> {
    scene
        .object(id)
        .map(|o| world_pose(frame, o))
        .ok_or(ContextError::UnknownId(id))
}

/// Angle in degrees between an object's z axis and world up.
pub fn tilt_deg(z_axis: &Vec3) -> f64 {
    angle_between_deg(z_axis, &Vec3::z())
}

/// Signed tilt of `z_axis` about world `axis` (x or y), counter-clockwise positive.
pub fn tilt_about_deg(z_axis: &Vec3, axis: Axis) -> Option<f64> {
    match axis {
        Axis::X => Some((-z_axis.y).atan2(z_axis.z).to_degrees()),
        Axis::Y => Some(z_axis.x.atan2(z_axis.z).to_degrees()),
        Axis::Z => None,
    }
}

pub fn answer_metric_query(scene: &Scene3D, q: &MetricQuery) -> Result<Answer, ContextError> {
    let frame = scene.frame();
    let pose = |id| pose_of(scene, &frame, id);
    Ok(match *q {
        MetricQuery::Distance { a, b } => Answer::Length((pose(a)?.center - pose(b)?.center).norm()),
        MetricQuery::DistanceAxis { a, b, axis } => Answer::Length((pose(a)?.center - pose(b)?.center)[axis.index()].abs()),
        MetricQuery::Size { a, axis: None } => Answer::Size(pose(a)?.size),
        MetricQuery::Size { a, axis: Some(axis) } => Answer::Length(pose(a)?.size[axis.index()]),
        MetricQuery::Tilt { a } => Answer::Angle(tilt_deg(&pose(a)?.axes[2])),
        MetricQuery::TiltAxis { a, axis } => {
            let z = pose(a)?.axes[2];
            Answer::Angle(tilt_about_deg(&z, axis).ok_or_else(|| invalid("axis=z", "tilt axis must be x or y"))?)
        }
        MetricQuery::AngleBetween { a, b, axis } => {
            let k = axis.index();
            Answer::Angle(angle_between_deg(&pose(a)?.axes[k], &pose(b)?.axes[k]))
        }
        MetricQuery::Relation { a, b, direction } => {
            let dir = Direction::of_offset(&(pose(a)?.center - pose(b)?.center));
            match direction {
                None => Answer::Direction(dir),
                Some(d) => Answer::YesNo(dir == Some(d)),
            }
        }
        MetricQuery::Count { predicate, threshold_deg } => {
            let mut ids: Vec<u32> = scene
                .objects
                .iter()
                .filter(|o| {
                    let upright = tilt_deg(&world_pose(&frame, o).axes[2]) <= threshold_deg;
                    upright == (predicate == CountPredicate::Upright)
                })
                .map(|o| o.id)
                .collect();
            ids.sort_unstable();
            Answer::Count(ids)
        }
    })
}

/// One line of a query file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QueryLine {
    Metric(MetricQuery),
    Diff,
}

/// Parse `distance 0 1`, `tilt 2 axis=y`, `relation 0 1 dir=left`, `count upright`, `diff`, ...
pub fn parse_query_line(line: &str) -> Result<QueryLine, ContextError> {
    let mut words = line.split_whitespace();
    let kind = words.next().ok_or_else(|| invalid("", "empty query"))?.to_ascii_lowercase();
    let mut ids = Vec::new();
    let mut opts: BTreeMap<String, String> = BTreeMap::new();
    let mut flags = Vec::new();
    for w in words {
        if let Some((k, v)) = w.split_once('=') {
            opts.insert(k.to_ascii_lowercase(), v.to_string());
        } else if let Ok(id) = w.parse::<u32>() {
            ids.push(id);
        } else {
            flags.push(w.to_ascii_lowercase());
        }
    }
    let axis = |opts: &BTreeMap<String, String>| -> Result<Option<Axis>, ContextError> {
        opts.get("axis")
            .map(|v| v.parse::<Axis>().map_err(|e| invalid(v, e)))
            .transpose()
    };
    let need = |n: usize| -> Result<(), ContextError> {
        if ids.len() != n {
            return Err(invalid(line.trim(), format!("'{kind}' takes {n} object id(s), got {}", ids.len())));
        }
        Ok(())
    };
    let known = |allowed: &[&str]| -> Result<(), ContextError> {
        if let Some(f) = flags.first() {
            return Err(invalid(f, "unexpected word"));
        }
        match opts.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(invalid(k, format!("unknown option for '{kind}'"))),
            None => Ok(()),
        }
    };
    let q = match kind.as_str() {
        "diff" => {
            need(0)?;
            known(&[])?;
            return Ok(QueryLine::Diff);
        }
        "distance" | "distance_axis" => {
            need(2)?;
            known(&["axis"])?;
            match axis(&opts)? {
                Some(axis) => MetricQuery::DistanceAxis { a: ids[0], b: ids[1], axis },
                None if kind == "distance" => MetricQuery::Distance { a: ids[0], b: ids[1] },
                None => return Err(invalid(line.trim(), "distance_axis needs axis=x|y|z")),
            }
        }
        "size" => {
            need(1)?;
            known(&["axis"])?;
            MetricQuery::Size { a: ids[0], axis: axis(&opts)? }
        }
        "tilt" | "tilt_axis" => {
            need(1)?;
            known(&["axis"])?;
            match axis(&opts)? {
                Some(Axis::Z) => return Err(invalid("axis=z", "tilt axis must be x or y")),
                Some(axis) => MetricQuery::TiltAxis { a: ids[0], axis },
                None if kind == "tilt" => MetricQuery::Tilt { a: ids[0] },
                None => return Err(invalid(line.trim(), "tilt_axis needs axis=x|y")),
            }
        }
        "angle_between" => {
            need(2)?;
            known(&["axis"])?;
            MetricQuery::AngleBetween {
                a: ids[0],
                b: ids[1],
                axis: axis(&opts)?.unwrap_or(Axis::Z),
            }
        }
        "relation" => {
            need(2)?;
            known(&["dir"])?;
            let direction = opts
                .get("dir")
                .map(|v| v.parse::<Direction>().map_err(|e| invalid(v, e)))
                .transpose()?;
            MetricQuery::Relation { a: ids[0], b: ids[1], direction }
        }
        "count" | "count_predicate" => {
            need(0)?;
            let pred = flags.first().ok_or_else(|| invalid(line.trim(), "count needs 'upright' or 'not_upright'"))?;
            let predicate = match pred.replace('-', "_").as_str() {
                "upright" => CountPredicate::Upright,
                "not_upright" | "tilted" => CountPredicate::NotUpright,
                _ => return Err(invalid(pred, "expected 'upright' or 'not_upright'")),
            };
            if let Some(extra) = flags.get(1) {
                return Err(invalid(extra, "unexpected word"));
            }
            if let Some(k) = opts.keys().find(|k| k.as_str() != "threshold") {
                return Err(invalid(k, "unknown option for 'count'"));
            }
            let threshold_deg = match opts.get("threshold") {
                Some(v) => v.parse::<f64>().map_err(|_| invalid(v, "threshold must be a number"))?,
                None => UPRIGHT_THRESHOLD_DEG,
            };
            MetricQuery::Count { predicate, threshold_deg }
        }
        other => return Err(invalid(other, "unknown query kind")),
    };
    Ok(QueryLine::Metric(q))
}

/// Per-object change between two scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectDiff {
    pub id: u32,
    /// World-frame translation, compensated for the camera rotation when one is given.
    pub translation: Vec3,
    pub distance: f64,
    /// Raw camera-frame translation.
    pub apparent_translation: Vec3,
    pub rotation_deg: f64,
    /// Unit rotation axis in the world frame; `None` for a zero rotation.
    pub rotation_axis: Option<Vec3>,
    /// Z-Y-X decomposition `(yaw about z, pitch about y, roll about x)` in degrees.
    pub euler_zyx_deg: Vec3,
    pub tilt_change_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDiff {
    pub objects: Vec<ObjectDiff>,
    /// Z-Y-X decomposition of the camera rotation between the shots, when given.
    pub camera_delta_deg: Option<Vec3>,
}

fn euler_zyx_deg(q: &Quat) -> Vec3 {
    let (roll, pitch, yaw) = q.euler_angles();
    Vec3::new(yaw.to_degrees(), pitch.to_degrees(), roll.to_degrees())
}

/// Compare two scenes object by object. `camera_delta` is the rotation of the
/// second camera relative to the first, in the first scene's world frame.
pub fn diff_scenes(before: &Scene3D, after: &Scene3D, camera_delta: Option<&Quat>) -> Result<SceneDiff, ContextError> {
    let fb = before.frame();
    let fa = after.frame();
    let rc = camera_delta.copied().unwrap_or_else(Quat::identity);
    let mut ids: Vec<u32> = before.objects.iter().map(|o| o.id).filter(|id| after.object(*id).is_some()).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() {
        return Err(ContextError::NoCommonIds);
    }
    let objects = ids
        .into_iter()
        .map(|id| {
            let b = before.object(id).expect("id taken from before");
            let a = after.object(id).expect("id present in after");
            let pb = fb.to_world(&b.position);
            let pa = rc * fa.to_world(&a.position);
            let translation = pa - pb;
            let wb = fb.rotation_to_world(&b.rotation);
            let wa = rc * fa.rotation_to_world(&a.rotation);
            let rel = wa * wb.inverse();
            let rotation_deg = rotation_angle_deg(&rel);
            let rotation_axis = rel.axis().map(|ax| ax.into_inner());
            let tilt_b = tilt_deg(&fb.to_world(&b.obb.axes[2]));
            let tilt_a = tilt_deg(&(rc * fa.to_world(&a.obb.axes[2])));
            ObjectDiff {
                id,
                translation,
                distance: translation.norm(),
                apparent_translation: a.position - b.position,
                rotation_deg,
                rotation_axis,
                euler_zyx_deg: euler_zyx_deg(&rel),
                tilt_change_deg: tilt_a - tilt_b,
            }
        })
        .collect();
    Ok(SceneDiff {
        objects,
        camera_delta_deg: camera_delta.map(euler_zyx_deg),
    })
}

/// Movement word for a world-frame translation: right/left/back/front/up/down.
pub fn motion_word(v: &Vec3) -> Option<&'static str> {
    Direction::of_offset(v).map(|d| match d {
        Direction::Left => "left",
        Direction::Right => "right",
        Direction::Front => "front",
        Direction::Behind => "back",
        Direction::Above => "up",
        Direction::Below => "down",
    })
}

/// Below this a displacement or angle is reported as no change.
const REPORT_EPS: f64 = 5e-3;

impl SceneDiff {
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(c) = self.camera_delta_deg {
            out += &format!(
                "camera: rotated yaw {} deg, pitch {} deg, roll {} deg\n",
                fmt_fixed(c.x, 2),
                fmt_fixed(c.y, 2),
                fmt_fixed(c.z, 2)
            );
        }
        for o in &self.objects {
            let word = if o.distance < REPORT_EPS { None } else { motion_word(&o.translation) };
            out += &format!(
                "obj {}: moved {} cm ({})\n",
                o.id,
                fmt_fixed(o.distance, 2),
                word.unwrap_or("none")
            );
            let label = if self.camera_delta_deg.is_some() { "actual" } else { "world" };
            out += &format!("obj {}: {label} translation {} cm\n", o.id, fmt_vec(&o.translation, 2));
            out += &format!(
                "obj {}: apparent translation (camera frame) {} cm, {} cm\n",
                o.id,
                fmt_vec(&o.apparent_translation, 2),
                fmt_fixed(o.apparent_translation.norm(), 2)
            );
            let axis = match o.rotation_axis {
                Some(a) if o.rotation_deg >= REPORT_EPS => fmt_vec(&a, 4),
                _ => "none".to_string(),
            };
            out += &format!("obj {}: rotated {} deg about {}\n", o.id, fmt_fixed(o.rotation_deg, 2), axis);
            let yaw = o.euler_zyx_deg.x;
            let sense = if yaw.abs() < REPORT_EPS {
                "none"
            } else if yaw < 0.0 {
                "clockwise"
            } else {
                "counterclockwise"
            };
            out += &format!(
                "obj {}: yaw {} deg ({}), pitch {} deg, roll {} deg\n",
                o.id,
                fmt_fixed(yaw.abs(), 2),
                sense,
                fmt_fixed(o.euler_zyx_deg.y, 2),
                fmt_fixed(o.euler_zyx_deg.z, 2)
            );
            out += &format!("obj {}: tilt change {} deg\n", o.id, fmt_fixed(o.tilt_change_deg, 2));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{background_plane_placement, CameraModel};
    use crate::render::TriMesh;
    use crate::scene::CameraFrameHint;
    use proptest::prelude::*;

    fn scene_with(objs: &[(u32, Vec3, Quat)], shot: ShotAngle) -> Scene3D {
        let cam = CameraModel::new(240.0, 240.0, 320.0, 240.0, 640, 480).unwrap();
        let frame = CanonicalFrame::new(shot);
        let hint = CameraFrameHint::from(&frame);
        let mesh = TriMesh::cuboid(Vec3::new(3.0, 2.0, 1.0));
        let objects = objs
            .iter()
            .map(|(id, world, rot)| {
                let pos = frame.to_camera(world);
                let cam_rot = frame.rotation_to_camera(rot);
                ObjectInstance::new(*id, format!("o{id}"), mesh.clone(), cam_rot, pos, 1.0, &hint)
            })
            .collect();
        Scene3D {
            camera: cam,
            objects,
            background: background_plane_placement(&cam, 300.0),
            shot_angle: shot,
        }
    }

    #[test]
    fn canonical_mappings() {
        let h = canonical_axes(ShotAngle::Horizontal);
        assert_eq!(h.to_world(&Vec3::z()), Vec3::y());
        assert_eq!(h.to_world(&Vec3::y()), -Vec3::z());
        let t = canonical_axes(ShotAngle::TopDown);
        assert_eq!(t.to_world(&Vec3::z()), -Vec3::z());
        assert_eq!(t.to_world(&-Vec3::y()), Vec3::y());
        let b = canonical_axes(ShotAngle::BottomUp);
        assert_eq!(b.to_world(&Vec3::z()), Vec3::z());
        for s in [ShotAngle::Horizontal, ShotAngle::TopDown, ShotAngle::BottomUp] {
            let m = canonical_axes(s).mapping;
            assert!((m.determinant() - 1.0).abs() < 1e-12);
            assert!((m.transpose() * m - Mat3::identity()).norm() < 1e-12);
        }
    }

    #[test]
    fn shot_angle_heuristic() {
        let deep = SceneExtents { min: Vec3::new(-50.0, -40.0, 57.5), max: Vec3::new(50.0, 40.0, 115.0) };
        assert_eq!(infer_shot_angle(&deep, None).angle, ShotAngle::Horizontal);
        let flat = SceneExtents { min: Vec3::new(-50.0, -40.0, 80.0), max: Vec3::new(50.0, 40.0, 80.0) };
        let s = infer_shot_angle(&flat, None);
        assert!(s.top_down_or_bottom_up);
        assert_eq!(s.confidence, Confidence::Low);
        assert_eq!(infer_shot_angle(&flat, Some(ShotAngle::BottomUp)).angle, ShotAngle::BottomUp);
        assert_eq!(infer_shot_angle(&deep, Some(ShotAngle::TopDown)).angle, ShotAngle::TopDown);
    }

    #[test]
    fn summary_size_line_matches_reference_layout() {
        let mut s = scene_with(&[(1, Vec3::new(7.0, 100.0, 9.0), Quat::identity())], ShotAngle::Horizontal);
        s.objects[0].obb.half_extents = Vec3::new(6.77, 4.685, 4.75);
        let text = summarize_scene(&s).render();
        assert!(text.contains("Obj 1 size: 13.54 cm x 9.37 cm x 9.50 cm (WxDxH)\n"), "{text}");
        assert!(text.contains("Obj 1 spatial context: 3D center: [7.0, 100.0, 9.0] cm; X-axis (right): [1.0000, 0.0000, 0.0000]; Y-axis (back): [0.0000, 1.0000, 0.0000]; Z-axis (up): [0.0000, 0.0000, 1.0000]\n"), "{text}");
        assert!(!text.contains("closest"));
    }

    #[test]
    fn neighbors_along_x() {
        let s = scene_with(&[(0, Vec3::new(0.0, 100.0, 0.0), Quat::identity()), (1, Vec3::new(20.0, 100.0, 0.0), Quat::identity())], ShotAngle::Horizontal);
        let text = summarize_scene(&s).render();
        assert!(text.contains("Obj 0 closest per direction: right: Obj 1\n"), "{text}");
        assert!(text.contains("Obj 1 closest per direction: left: Obj 0\n"), "{text}");
    }

    #[test]
    fn metric_examples() {
        let tilted = Quat::from_axis_angle(&Vec3::y_axis(), 30f64.to_radians());
        let s = scene_with(&[(0, Vec3::new(0.0, 100.0, 0.0), Quat::identity()), (1, Vec3::new(3.0, 104.0, 0.0), tilted)], ShotAngle::Horizontal);
        let d = answer_metric_query(&s, &MetricQuery::Distance { a: 0, b: 1 }).unwrap();
        assert!(matches!(d, Answer::Length(v) if (v - 5.0).abs() < 1e-9));
        assert_eq!(answer_metric_query(&s, &MetricQuery::Tilt { a: 0 }).unwrap().render(), "0.00 deg");
        let ab = answer_metric_query(&s, &MetricQuery::AngleBetween { a: 0, b: 1, axis: Axis::Z }).unwrap();
        assert!(matches!(ab, Answer::Angle(v) if (v - 30.0).abs() < 1e-9), "{ab:?}");
        let ty = answer_metric_query(&s, &MetricQuery::TiltAxis { a: 1, axis: Axis::Y }).unwrap();
        assert!(matches!(ty, Answer::Angle(v) if (v - 30.0).abs() < 1e-9), "{ty:?}");
        let c = answer_metric_query(&s, &MetricQuery::Count { predicate: CountPredicate::Upright, threshold_deg: 5.0 }).unwrap();
        assert_eq!(c, Answer::Count(vec![0]));
        assert_eq!(answer_metric_query(&s, &MetricQuery::Tilt { a: 9 }), Err(ContextError::UnknownId(9)));
        let r = answer_metric_query(&s, &MetricQuery::Relation { a: 1, b: 0, direction: None }).unwrap();
        assert_eq!(r, Answer::Direction(Some(Direction::Behind)));
    }

    #[test]
    fn query_parsing() {
        assert_eq!(parse_query_line("distance 0 1").unwrap(), QueryLine::Metric(MetricQuery::Distance { a: 0, b: 1 }));
        assert_eq!(parse_query_line("tilt 2 axis=y").unwrap(), QueryLine::Metric(MetricQuery::TiltAxis { a: 2, axis: Axis::Y }));
        assert_eq!(parse_query_line("  diff ").unwrap(), QueryLine::Diff);
        assert_eq!(
            parse_query_line("relation 3 1 dir=left").unwrap(),
            QueryLine::Metric(MetricQuery::Relation { a: 3, b: 1, direction: Some(Direction::Left) })
        );
        assert!(parse_query_line("distance 0").is_err());
        assert!(parse_query_line("volume 0").is_err());
        assert!(parse_query_line("tilt 0 axis=z").is_err());
        assert!(parse_query_line("size 0 color=red").is_err());
    }

    #[test]
    fn identical_scenes_diff_to_zero() {
        let s = scene_with(&[(0, Vec3::new(1.0, 90.0, 2.0), Quat::from_euler_angles(0.1, 0.2, 0.3))], ShotAngle::Horizontal);
        let d = diff_scenes(&s, &s, None).unwrap();
        let o = &d.objects[0];
        assert_eq!(o.distance, 0.0);
        assert!(o.rotation_deg < 1e-6);
        assert_eq!(o.tilt_change_deg, 0.0);
        assert!(d.render().contains("obj 0: moved 0.00 cm (none)"));
    }

    #[test]
    fn moved_back_and_rotated_about_up() {
        let a = scene_with(&[(0, Vec3::new(0.0, 100.0, 0.0), Quat::identity())], ShotAngle::Horizontal);
        let rz = Quat::from_axis_angle(&Vec3::z_axis(), 30f64.to_radians());
        let b = scene_with(&[(0, Vec3::new(0.0, 110.0, 0.0), rz)], ShotAngle::Horizontal);
        let d = diff_scenes(&a, &b, None).unwrap();
        let o = &d.objects[0];
        assert!((o.distance - 10.0).abs() < 1e-9);
        assert!((o.rotation_deg - 30.0).abs() < 1e-9);
        assert!((o.rotation_axis.unwrap() - Vec3::z()).norm() < 1e-9);
        assert!((o.euler_zyx_deg.x - 30.0).abs() < 1e-9);
        let text = d.render();
        assert!(text.contains("obj 0: moved 10.00 cm (back)"), "{text}");
        assert!(text.contains("counterclockwise"), "{text}");
    }

    #[test]
    fn disjoint_scenes_error() {
        let a = scene_with(&[(0, Vec3::new(0.0, 100.0, 0.0), Quat::identity())], ShotAngle::Horizontal);
        let b = scene_with(&[(1, Vec3::new(0.0, 100.0, 0.0), Quat::identity())], ShotAngle::Horizontal);
        assert_eq!(diff_scenes(&a, &b, None), Err(ContextError::NoCommonIds));
    }

    proptest! {
        #[test]
        fn diff_is_antisymmetric_and_distance_symmetric(x in -50.0f64..50.0, y in 40.0f64..200.0, z in -50.0f64..50.0,
                                                         dx in -20.0f64..20.0, dy in -20.0f64..20.0, dz in -20.0f64..20.0) {
            let a = scene_with(&[(0, Vec3::new(x, y, z), Quat::identity()), (1, Vec3::new(0.0, 100.0, 0.0), Quat::identity())], ShotAngle::Horizontal);
            let b = scene_with(&[(0, Vec3::new(x + dx, y + dy, z + dz), Quat::identity()), (1, Vec3::new(0.0, 100.0, 0.0), Quat::identity())], ShotAngle::Horizontal);
            let ab = diff_scenes(&a, &b, None).unwrap();
            let ba = diff_scenes(&b, &a, None).unwrap();
            prop_assert!((ab.objects[0].translation + ba.objects[0].translation).norm() < 1e-9);
            let d1 = answer_metric_query(&a, &MetricQuery::Distance { a: 0, b: 1 }).unwrap();
            let d2 = answer_metric_query(&a, &MetricQuery::Distance { a: 1, b: 0 }).unwrap();
            prop_assert_eq!(d1, d2);
        }

        #[test]
        fn relation_is_scale_invariant(x in -50.0f64..50.0, y in 40.0f64..200.0, z in -50.0f64..50.0, k in 0.1f64..10.0) {
            let s1 = scene_with(&[(0, Vec3::new(x, y, z), Quat::identity()), (1, Vec3::new(0.0, 100.0, 0.0), Quat::identity())], ShotAngle::Horizontal);
            let s2 = scene_with(&[(0, Vec3::new(x, y, z) * k, Quat::identity()), (1, Vec3::new(0.0, 100.0, 0.0) * k, Quat::identity())], ShotAngle::Horizontal);
            let q = MetricQuery::Relation { a: 0, b: 1, direction: None };
            prop_assert_eq!(answer_metric_query(&s1, &q).unwrap(), answer_metric_query(&s2, &q).unwrap());
        }

        #[test]
        fn rotation_angle_survives_global_rigid_motion(r1 in 0.0f64..3.0, r2 in 0.0f64..3.0, g1 in 0.0f64..3.0, g2 in 0.0f64..3.0) {
            let qa = Quat::from_euler_angles(r1, 0.2, 0.1);
            let qb = Quat::from_euler_angles(0.3, r2, 0.5);
            let g = Quat::from_euler_angles(g1, g2, 0.7);
            let a = scene_with(&[(0, Vec3::new(0.0, 100.0, 0.0), qa)], ShotAngle::Horizontal);
            let b = scene_with(&[(0, Vec3::new(0.0, 100.0, 0.0), qb)], ShotAngle::Horizontal);
            let ga = scene_with(&[(0, g * Vec3::new(0.0, 100.0, 0.0), g * qa)], ShotAngle::Horizontal);
            let gb = scene_with(&[(0, g * Vec3::new(0.0, 100.0, 0.0), g * qb)], ShotAngle::Horizontal);
            let d1 = diff_scenes(&a, &b, None).unwrap().objects[0].rotation_deg;
            let d2 = diff_scenes(&ga, &gb, None).unwrap().objects[0].rotation_deg;
            prop_assert!((d1 - d2).abs() < 1e-6);
        }
    }
}
