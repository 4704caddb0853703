//! The `monoview` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::UnitQuaternion;

use crate::camera::scene_extents;
use crate::context::{diff_scenes, infer_shot_angle, parse_query_line, summarize_scene, answer_metric_query, QueryLine};
use crate::error::{Error, Result};
use crate::io::{format_scene, format_trajectory, load_manifest, load_object_inputs, read_mask, read_mesh, read_scene, read_text, write_bytes};
use crate::math::{fmt_fixed, fmt_vec, quat_from_wxyz, quat_to_wxyz, rotation_distance_deg, Quat};
use crate::plan::parse_plan;
use crate::planner::{plan_trajectory, PlannerConfig, PlannerError};
use crate::pose::{estimate_rotation, MatchWeights, TemplateConfig, TemplateSet};
use crate::scene::{build_scene, BuildConfig};

#[derive(Debug, Parser)]
#[command(name = "monoview", version, about = "Metric scene reconstruction, spatial queries and waypoint planning from one view")]
pub struct Cli {
    /// Worker threads for template rendering and scoring (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a scene document from a manifest.
    Reconstruct {
        manifest: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        templates: TemplateFlags,
        /// Scale calibration passes.
        #[arg(long, default_value_t = 2)]
        calibration_passes: u32,
    },
    /// Print the spatial context of a scene.
    Summarize { scene: PathBuf },
    /// Answer metric queries, one per line.
    Query {
        scene: PathBuf,
        /// File with one query per line; `#` starts a comment.
        #[arg(short, long)]
        file: Option<PathBuf>,
        /// Inline query; may be repeated.
        #[arg(short, long = "query")]
        queries: Vec<String>,
        /// Second scene for `diff` queries.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Compare two scenes of the same objects.
    Diff {
        before: PathBuf,
        after: PathBuf,
        #[command(flatten)]
        camera: CameraDelta,
    },
    /// Plan a trajectory for a plan program.
    Plan {
        scene: PathBuf,
        plan: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        planner: PlannerFlags,
    },
    /// Estimate a mesh's rotation from one silhouette.
    MatchPose {
        mesh: PathBuf,
        mask: PathBuf,
        #[command(flatten)]
        templates: TemplateFlags,
        /// Ground-truth rotation `w,x,y,z`; prints the geodesic error.
        #[arg(long, value_parser = parse_wxyz, allow_hyphen_values = true)]
        expected: Option<Quat>,
    },
}

#[derive(Debug, Args)]
pub struct TemplateFlags {
    #[arg(long, default_value_t = 2)]
    pub subdivision_level: u32,
    #[arg(long, default_value_t = 8)]
    pub inplane_count: u32,
    #[arg(long, default_value_t = 256)]
    pub template_resolution: u32,
    /// Weight of the area term.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Weight of the Hu term.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

impl TemplateFlags {
    fn config(&self) -> TemplateConfig {
        TemplateConfig {
            subdivision_level: self.subdivision_level,
            inplane_count: self.inplane_count,
            resolution: self.template_resolution,
            ..TemplateConfig::default()
        }
    }

    fn weights(&self) -> MatchWeights {
        MatchWeights {
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

#[derive(Debug, Args)]
pub struct CameraDelta {
    /// Camera rotation between the shots about world z, in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub camera_yaw: Option<f64>,
    /// About world y.
    #[arg(long, allow_hyphen_values = true)]
    pub camera_pitch: Option<f64>,
    /// About world x.
    #[arg(long, allow_hyphen_values = true)]
    pub camera_roll: Option<f64>,
}

impl CameraDelta {
    fn rotation(&self) -> Option<Quat> {
        if self.camera_yaw.is_none() && self.camera_pitch.is_none() && self.camera_roll.is_none() {
            return None;
        }
        let r = |v: Option<f64>| v.unwrap_or(0.0).to_radians();
        Some(UnitQuaternion::from_euler_angles(r(self.camera_roll), r(self.camera_pitch), r(self.camera_yaw)))
    }
}

#[derive(Debug, Args)]
pub struct PlannerFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub step_size: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 0.05)]
    pub goal_bias: f64,
    #[arg(long, default_value_t = 64)]
    pub kmeans_k: usize,
    #[arg(long, default_value_t = 50)]
    pub resample_attempts: usize,
    #[arg(long, default_value_t = 1.0)]
    pub samples_per_cm: f64,
}

impl PlannerFlags {
    fn config(&self) -> PlannerConfig {
        PlannerConfig {
            rng_seed: self.seed,
            step_size: self.step_size,
            max_iterations: self.max_iterations,
            goal_bias: self.goal_bias,
            kmeans_k: self.kmeans_k,
            resample_max_attempts: self.resample_attempts,
            samples_per_cm: self.samples_per_cm,
            ..PlannerConfig::default()
        }
    }
}

fn parse_wxyz(s: &str) -> std::result::Result<Quat, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number '{t}'")))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [w, x, y, z] => Ok(quat_from_wxyz([*w, *x, *y, *z])),
        _ => Err("expected four comma-separated numbers w,x,y,z".to_string()),
    }
}

fn write_out(out: &mut (dyn Write + Send), text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::Usage(format!("cannot write output: {e}")))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn reconstruct(manifest: &Path, out_path: &Path, templates: &TemplateFlags, passes: u32, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    let m = load_manifest(manifest)?;
    let src = load_object_inputs(&m, &base_dir(manifest))?;
    let shot = match src.shot_angle {
        Some(s) => s,
        None => {
            let extents = scene_extents(&src.camera, &src.depth)?;
            let guess = infer_shot_angle(&extents, None);
            let caveat = if guess.top_down_or_bottom_up { " (top-down and bottom-up look alike in depth)" } else { "" };
            let _ = writeln!(err, "note: shot angle inferred as {}{caveat}", guess.angle);
            guess.angle
        }
    };
    let cfg = BuildConfig {
        templates: templates.config(),
        weights: templates.weights(),
        calibration_passes: passes,
    };
    let scene = build_scene(&src.objects, &src.camera, &src.depth, shot, &cfg)?;
    write_bytes(out_path, format_scene(&scene).as_bytes())?;
    let frame = scene.frame();
    let mut text = format!("scene: {} objects, {} shot\n", scene.objects.len(), scene.shot_angle);
    for o in &scene.objects {
        text += &format!(
            "obj {} ({}): center {} cm, scale {}, score {}{}\n",
            o.id,
            o.name,
            fmt_vec(&frame.to_world(&o.obb.center), 2),
            fmt_fixed(o.scale, 4),
            o.match_score.map_or("n/a".to_string(), |s| fmt_fixed(s.total, 6)),
            if o.ray_fallback { ", ray fallback" } else { "" }
        );
    }
    write_out(out, &text)
}

fn query(scene_path: &Path, file: Option<&Path>, inline: &[String], against: Option<&Path>, out: &mut (dyn Write + Send)) -> Result<()> {
    let scene = read_scene(scene_path)?;
    let other = against.map(read_scene).transpose()?;
    let mut lines: Vec<String> = Vec::new();
    if let Some(f) = file {
        lines.extend(read_text(f)?.lines().map(str::to_string));
    }
    lines.extend(inline.iter().cloned());
    let queries = lines.iter().map(|l| l.split('#').next().unwrap_or_default().trim()).filter(|l| !l.is_empty());
    for (i, q) in queries.enumerate() {
        // Answers already written stay written when a later query fails.
        let text = match parse_query_line(q)? {
            QueryLine::Metric(mq) => format!("{i}: {}\n", answer_metric_query(&scene, &mq)?.render()),
            QueryLine::Diff => {
                let other = other.as_ref().ok_or_else(|| Error::Usage(format!("query {i}: 'diff' needs --against")))?;
                diff_scenes(&scene, other, None)?.render().lines().map(|l| format!("{i}: {l}\n")).collect()
            }
        };
        write_out(out, &text)?;
        let _ = out.flush();
    }
    Ok(())
}

fn plan(scene_path: &Path, plan_path: &Path, out_path: &Path, flags: &PlannerFlags, out: &mut (dyn Write + Send)) -> Result<()> {
    let scene = read_scene(scene_path)?;
    let program = parse_plan(&read_text(plan_path)?)?;
    let cfg = flags.config();
    let report_legs = |legs: &[crate::planner::LegReport], out: &mut (dyn Write + Send)| -> Result<()> {
        for l in legs {
            write_out(
                out,
                &format!(
                    "step {}: path {} cm, {} resamples{}\n",
                    l.step + 1,
                    fmt_fixed(l.cost, 2),
                    l.resamples,
                    if l.linear_fallback { ", linear" } else { "" }
                ),
            )?;
        }
        Ok(())
    };
    match plan_trajectory(&scene, &program, &cfg) {
        Ok(outcome) => {
            write_bytes(out_path, format_trajectory(&outcome.trajectory).as_bytes())?;
            report_legs(&outcome.legs, out)?;
            let last = outcome.trajectory.samples.last().map_or(0.0, |s| s.t);
            write_out(out, &format!("trajectory: {} samples, {} s\n", outcome.trajectory.samples.len(), fmt_fixed(last, 3)))
        }
        Err(e) => {
            report_legs(e.completed_legs(), out)?;
            Err(e.into())
        }
    }
}

fn match_pose(mesh_path: &Path, mask_path: &Path, templates: &TemplateFlags, expected: Option<&Quat>, out: &mut (dyn Write + Send)) -> Result<()> {
    let mesh = read_mesh(mesh_path)?.centered();
    let mask = read_mask(mask_path)?;
    if mask.is_empty() {
        return Err(Error::Usage(format!("{}: mask is empty", mask_path.display())));
    }
    let set = TemplateSet::render(&mesh, templates.config())?;
    let est = estimate_rotation(&mask, &set, templates.weights())?;
    let q = quat_to_wxyz(&est.rotation);
    let mut text = format!(
        "template: {}\nrotation_wxyz: [{}, {}, {}, {}]\nscore: {} (area {}, hu {})\n",
        est.template_index,
        fmt_fixed(q[0], 9),
        fmt_fixed(q[1], 9),
        fmt_fixed(q[2], 9),
        fmt_fixed(q[3], 9),
        fmt_fixed(est.score.total, 9),
        fmt_fixed(est.score.area_term, 9),
        fmt_fixed(est.score.hu_term, 9)
    );
    if let Some(gt) = expected {
        text += &format!("geodesic error: {} deg\n", fmt_fixed(rotation_distance_deg(&est.rotation, gt), 2));
    }
    write_out(out, &text)
}

fn dispatch(cli: &Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    match &cli.command {
        Command::Reconstruct {
            manifest,
            out: out_path,
            templates,
            calibration_passes,
        } => reconstruct(manifest, out_path, templates, *calibration_passes, out, err),
        Command::Summarize { scene } => write_out(out, &summarize_scene(&read_scene(scene)?).render()),
        Command::Query { scene, file, queries, against } => query(scene, file.as_deref(), queries, against.as_deref(), out),
        Command::Diff { before, after, camera } => {
            let d = diff_scenes(&read_scene(before)?, &read_scene(after)?, camera.rotation().as_ref())?;
            write_out(out, &d.render())
        }
        Command::Plan {
            scene,
            plan: plan_path,
            out: out_path,
            planner,
        } => plan(scene, plan_path, out_path, planner, out),
        Command::MatchPose {
            mesh,
            mask,
            templates,
            expected,
        } => match_pose(mesh, mask, templates, expected.as_ref(), out),
    }
}

/// Run the CLI on `args` (including the program name) and return the exit status.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker threads: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli, out, err)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::Planner(PlannerError::Failed { .. } | PlannerError::StartInObstacle { .. }) = e {
                let _ = writeln!(err, "planning stopped; completed legs are listed above");
            }
            e.exit_code()
        }
    }
}
