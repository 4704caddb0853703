//! The waypoint plan language: a task header followed by numbered manipulation steps.
//!
//! Canonical form, one item per line:
//!
//! ```text
//! Task Name: Can to Bowl Transfer
//! Description: Pick up the can and pour its contents into the bowl.
//! Manipulating obj idx: 3
//! Interacting obj idx: 4
//! 1. translate_tar_obj: Move Manipulating Object [3] to [6, 0, 7] cm relative to Target Object [4]'s local [x, y, z] axes.
//! 2. rotate_wref: Rotate Manipulating Object [3] relative to Target Object [4] around [pitch] axis by [75] degrees.
//! ```
//!
//! The remaining step sentences are
//! `rotate_self: Rotate Manipulating Object [5] around its local axis [z] by [90] degrees.`,
//! `... around [yaw] axis by [fixed_towards].` and
//! `translate_direc_axis: Move Manipulating Object [5] [-3] cm along the directional vector from Reference Object [1] to Reference Object [2].`

mod parse;

use std::fmt;

pub use parse::{parse_plan, ParseError};

use crate::math::{Axis, Vec3};

/// Which header key introduced the task title.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TitleKey {
    Name,
    Category,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WrefMode {
    Pitch,
    Yaw,
    Roll,
}

impl WrefMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WrefMode::Pitch => "pitch",
            WrefMode::Yaw => "yaw",
            WrefMode::Roll => "roll",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WrefAmount {
    Degrees(f64),
    FixedTowards,
    FixedBack,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanStep {
    RotateSelf { obj: u32, axis: Axis, degrees: f64 },
    RotateWref { obj: u32, target: u32, mode: WrefMode, amount: WrefAmount },
    TranslateTarObj { obj: u32, target: u32, offset: Vec3 },
    TranslateDirecAxis { obj: u32, ref1: u32, ref2: u32, distance: f64 },
}

impl PlanStep {
    pub fn op_name(&self) -> &'static str {
        match self {
            PlanStep::RotateSelf { .. } => "rotate_self",
            PlanStep::RotateWref { .. } => "rotate_wref",
            PlanStep::TranslateTarObj { .. } => "translate_tar_obj",
            PlanStep::TranslateDirecAxis { .. } => "translate_direc_axis",
        }
    }

    /// The object the step moves.
    pub fn obj(&self) -> u32 {
        match *self {
            PlanStep::RotateSelf { obj, .. }
            | PlanStep::RotateWref { obj, .. }
            | PlanStep::TranslateTarObj { obj, .. }
            | PlanStep::TranslateDirecAxis { obj, .. } => obj,
        }
    }

    /// Every object id the step mentions.
    pub fn referenced_ids(&self) -> Vec<u32> {
        match *self {
            PlanStep::RotateSelf { obj, .. } => vec![obj],
            PlanStep::RotateWref { obj, target, .. } | PlanStep::TranslateTarObj { obj, target, .. } => vec![obj, target],
            PlanStep::TranslateDirecAxis { obj, ref1, ref2, .. } => vec![obj, ref1, ref2],
        }
    }
}

/// Shortest round-trip decimal, without a negative zero.
pub fn fmt_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PlanStep::RotateSelf { obj, axis, degrees } => write!(
                f,
                "rotate_self: Rotate Manipulating Object [{obj}] around its local axis [{axis}] by [{}] degrees.",
                fmt_number(degrees)
            ),
            PlanStep::RotateWref { obj, target, mode, amount } => {
                let by = match amount {
                    WrefAmount::Degrees(d) => format!("[{}] degrees", fmt_number(d)),
                    WrefAmount::FixedTowards => "[fixed_towards]".to_string(),
                    WrefAmount::FixedBack => "[fixed_back]".to_string(),
                };
                write!(
                    f,
                    "rotate_wref: Rotate Manipulating Object [{obj}] relative to Target Object [{target}] around [{}] axis by {by}.",
                    mode.as_str()
                )
            }
            PlanStep::TranslateTarObj { obj, target, offset } => write!(
                f,
                "translate_tar_obj: Move Manipulating Object [{obj}] to [{}, {}, {}] cm relative to Target Object [{target}]'s local [x, y, z] axes.",
                fmt_number(offset.x),
                fmt_number(offset.y),
                fmt_number(offset.z)
            ),
            PlanStep::TranslateDirecAxis { obj, ref1, ref2, distance } => write!(
                f,
                "translate_direc_axis: Move Manipulating Object [{obj}] [{}] cm along the directional vector from Reference Object [{ref1}] to Reference Object [{ref2}].",
                fmt_number(distance)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanProgram {
    pub task_name: String,
    pub title_key: TitleKey,
    pub description: Option<String>,
    /// Whether the optional `Motion Planning:` marker line was present.
    pub motion_planning_marker: bool,
    pub manipulating_id: u32,
    pub interacting_id: u32,
    pub steps: Vec<PlanStep>,
}

impl PlanProgram {
    /// Program with a `Task Name` title, no description and no marker line.
    pub fn new(task_name: impl Into<String>, manipulating_id: u32, interacting_id: u32, steps: Vec<PlanStep>) -> Self {
        Self {
            task_name: task_name.into(),
            title_key: TitleKey::Name,
            description: None,
            motion_planning_marker: false,
            manipulating_id,
            interacting_id,
            steps,
        }
    }
}

/// Canonical text; `parse_plan(&format_plan(p)) == p` for every valid program.
pub fn format_plan(p: &PlanProgram) -> String {
    let key = match p.title_key {
        TitleKey::Name => "Task Name",
        TitleKey::Category => "Task Category",
    };
    let mut out = format!("{key}: {}\n", p.task_name);
    if let Some(d) = &p.description {
        out += &format!("Description: {d}\n");
    }
    if p.motion_planning_marker {
        out += "Motion Planning:\n";
    }
    out += &format!("Manipulating obj idx: {}\n", p.manipulating_id);
    out += &format!("Interacting obj idx: {}\n", p.interacting_id);
    for (i, s) in p.steps.iter().enumerate() {
        out += &format!("{}. {s}\n", i + 1);
    }
    out
}
