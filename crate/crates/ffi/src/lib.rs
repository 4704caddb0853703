//! C ABI over the monoview scene, plan and trajectory APIs.
//!
//! Every fallible call returns an [`MvStatus`]. On failure the message is kept
//! per thread and read with [`mv_last_error_message`]. Handles are opaque and
//! owned by the caller until passed to the matching `*_free`. Strings returned
//! through `char **` out parameters are released with [`mv_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use monoview::camera::focal_from_fov;
use monoview::context::{answer_metric_query, parse_query_line, summarize_scene, QueryLine};
use monoview::io::{format_trajectory, parse_scene, read_scene, write_bytes, IoError};
use monoview::math::quat_to_wxyz;
use monoview::plan::{format_plan, parse_plan, PlanProgram};
use monoview::planner::{plan_trajectory, PlannerConfig, PlannerError, Trajectory};
use monoview::scene::Scene3D;
use monoview::waypoint::object_pose;
use monoview::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A file could not be read or written.
    Io = 3,
    /// Text input (scene, plan, query) could not be parsed.
    Parse = 4,
    /// Input was well formed but unusable (unknown id, bad config, ...).
    InvalidInput = 5,
    /// No collision-free trajectory was found.
    Planning = 6,
    /// The library panicked; this is a bug.
    Panic = 7,
}

/// Reconstructed or loaded scene.
pub struct MvScene(Scene3D);

/// Parsed plan program.
pub struct MvPlan(PlanProgram);

/// Smoothed trajectory.
pub struct MvTrajectory(Trajectory);

/// Planner settings; start from [`mv_planner_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MvPlannerConfig {
    pub step_size: f64,
    pub max_iterations: u64,
    pub goal_bias: f64,
    pub neighbor_radius_scale: f64,
    pub rng_seed: u64,
    pub kmeans_k: u64,
    pub resample_sigma_scale: f64,
    pub resample_max_attempts: u64,
    pub samples_per_cm: f64,
    pub bounds_margin: f64,
}

impl From<PlannerConfig> for MvPlannerConfig {
    fn from(c: PlannerConfig) -> Self {
        Self {
            step_size: c.step_size,
            max_iterations: c.max_iterations as u64,
            goal_bias: c.goal_bias,
            neighbor_radius_scale: c.neighbor_radius_scale,
            rng_seed: c.rng_seed,
            kmeans_k: c.kmeans_k as u64,
            resample_sigma_scale: c.resample_sigma_scale,
            resample_max_attempts: c.resample_max_attempts as u64,
            samples_per_cm: c.samples_per_cm,
            bounds_margin: c.bounds_margin,
        }
    }
}

impl From<&MvPlannerConfig> for PlannerConfig {
    fn from(c: &MvPlannerConfig) -> Self {
        let size = |v: u64| usize::try_from(v).unwrap_or(usize::MAX);
        Self {
            step_size: c.step_size,
            max_iterations: size(c.max_iterations),
            goal_bias: c.goal_bias,
            neighbor_radius_scale: c.neighbor_radius_scale,
            rng_seed: c.rng_seed,
            kmeans_k: size(c.kmeans_k),
            resample_sigma_scale: c.resample_sigma_scale,
            resample_max_attempts: size(c.resample_max_attempts),
            samples_per_cm: c.samples_per_cm,
            bounds_margin: c.bounds_margin,
        }
    }
}

/// One trajectory sample: time in s, world position in cm, rotation as w, x, y, z.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MvSample {
    pub t: f64,
    pub position: [f64; 3],
    pub rotation_wxyz: [f64; 4],
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn io_status(e: &IoError) -> MvStatus {
    match e {
        IoError::NotFound { .. } | IoError::Io { .. } => MvStatus::Io,
        IoError::Format { .. } => MvStatus::Parse,
        IoError::Object { source, .. } => io_status(source),
    }
}

fn status_of(e: &Error) -> MvStatus {
    match e {
        Error::Io(io) => io_status(io),
        Error::Parse(_) | Error::Format(_) => MvStatus::Parse,
        Error::Planner(PlannerError::Config(_) | PlannerError::Waypoint(_)) => MvStatus::InvalidInput,
        Error::Planner(_) => MvStatus::Planning,
        Error::Context(monoview::context::ContextError::InvalidQuery { .. }) => MvStatus::Parse,
        _ => MvStatus::InvalidInput,
    }
}

struct Failure(MvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail(status: MvStatus, message: &str) -> Failure {
    Failure(status, message.to_string())
}

/// Run `f`, record any error message and turn panics into [`MvStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MvStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(&format!("internal error: {msg}"));
            MvStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(MvStatus::NullArgument, &format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MvStatus::InvalidUtf8, &format!("{what} is not valid UTF-8")))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(MvStatus::NullArgument, &format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T) {
    out.write(value);
}

fn out_check<T>(out: *mut T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        Err(fail(MvStatus::NullArgument, &format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Focal length in pixels for an image height and vertical field of view in degrees.
///
/// # Safety
/// `out_focal` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mv_focal_from_fov(height_px: f64, fov_v_deg: f64, out_focal: *mut f64) -> MvStatus {
    guard(|| {
        out_check(out_focal, "out_focal")?;
        let f = focal_from_fov(height_px, fov_v_deg).map_err(Error::from)?;
        put(out_focal, f);
        Ok(())
    })
}

/// Load a scene document from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mv_scene_load(path: *const c_char, out: *mut *mut MvScene) -> MvStatus {
    guard(|| {
        out_check(out, "out")?;
        let path = read_str(path, "path")?;
        let scene = read_scene(Path::new(path)).map_err(Error::from)?;
        put(out, Box::into_raw(Box::new(MvScene(scene))));
        Ok(())
    })
}

/// Parse a scene document held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mv_scene_parse(text: *const c_char, out: *mut *mut MvScene) -> MvStatus {
    guard(|| {
        out_check(out, "out")?;
        let text = read_str(text, "text")?;
        let scene = parse_scene(text).map_err(Error::from)?;
        put(out, Box::into_raw(Box::new(MvScene(scene))));
        Ok(())
    })
}

/// Number of objects in the scene; 0 for null.
///
/// # Safety
/// `scene` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_scene_object_count(scene: *const MvScene) -> usize {
    scene.as_ref().map_or(0, |s| s.0.objects.len())
}

/// World-frame center (cm) of object `id`.
///
/// # Safety
/// `scene` must be a live handle and `out_center` valid for three doubles.
#[no_mangle]
pub unsafe extern "C" fn mv_scene_object_center(scene: *const MvScene, id: u32, out_center: *mut f64) -> MvStatus {
    guard(|| {
        let scene = borrow(scene, "scene")?;
        out_check(out_center, "out_center")?;
        let pose = object_pose(&scene.0, id).map_err(Error::from)?;
        let c = [pose.position.x, pose.position.y, pose.position.z];
        ptr::copy_nonoverlapping(c.as_ptr(), out_center, 3);
        Ok(())
    })
}

/// Spatial context text of the scene.
///
/// # Safety
/// `scene` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mv_scene_summary(scene: *const MvScene, out: *mut *mut c_char) -> MvStatus {
    guard(|| {
        let scene = borrow(scene, "scene")?;
        out_check(out, "out")?;
        put(out, c_string(summarize_scene(&scene.0).render()));
        Ok(())
    })
}

/// Answer one metric query line such as `distance 3 4` and return `value unit`.
///
/// # Safety
/// `scene` must be a live handle, `query` a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mv_scene_query(scene: *const MvScene, query: *const c_char, out: *mut *mut c_char) -> MvStatus {
    guard(|| {
        let scene = borrow(scene, "scene")?;
        out_check(out, "out")?;
        let query = read_str(query, "query")?;
        let q = match parse_query_line(query).map_err(Error::from)? {
            QueryLine::Metric(q) => q,
            QueryLine::Diff => return Err(fail(MvStatus::InvalidInput, "'diff' needs two scenes")),
        };
        let answer = answer_metric_query(&scene.0, &q).map_err(Error::from)?;
        put(out, c_string(answer.render()));
        Ok(())
    })
}

/// # Safety
/// `scene` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mv_scene_free(scene: *mut MvScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Parse plan text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mv_plan_parse(text: *const c_char, out: *mut *mut MvPlan) -> MvStatus {
    guard(|| {
        out_check(out, "out")?;
        let text = read_str(text, "text")?;
        let plan = parse_plan(text).map_err(Error::from)?;
        put(out, Box::into_raw(Box::new(MvPlan(plan))));
        Ok(())
    })
}

/// Number of steps; 0 for null.
///
/// # Safety
/// `plan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_plan_step_count(plan: *const MvPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.0.steps.len())
}

/// Canonical text of the plan.
///
/// # Safety
/// `plan` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mv_plan_format(plan: *const MvPlan, out: *mut *mut c_char) -> MvStatus {
    guard(|| {
        let plan = borrow(plan, "plan")?;
        out_check(out, "out")?;
        put(out, c_string(format_plan(&plan.0)));
        Ok(())
    })
}

/// # Safety
/// `plan` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mv_plan_free(plan: *mut MvPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Default planner settings.
#[no_mangle]
pub extern "C" fn mv_planner_config_default() -> MvPlannerConfig {
    PlannerConfig::default().into()
}

/// Plan and smooth a trajectory. `config` may be null for the defaults.
///
/// # Safety
/// `scene` and `plan` must be live handles, `config` null or valid, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mv_plan_trajectory(
    scene: *const MvScene,
    plan: *const MvPlan,
    config: *const MvPlannerConfig,
    out: *mut *mut MvTrajectory,
) -> MvStatus {
    guard(|| {
        let scene = borrow(scene, "scene")?;
        let plan = borrow(plan, "plan")?;
        out_check(out, "out")?;
        let cfg = config.as_ref().map_or_else(PlannerConfig::default, PlannerConfig::from);
        let outcome = plan_trajectory(&scene.0, &plan.0, &cfg).map_err(Error::from)?;
        put(out, Box::into_raw(Box::new(MvTrajectory(outcome.trajectory))));
        Ok(())
    })
}

/// Number of samples; 0 for null.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_trajectory_len(traj: *const MvTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.samples.len())
}

/// Copy sample `index`.
///
/// # Safety
/// `traj` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mv_trajectory_sample(traj: *const MvTrajectory, index: usize, out: *mut MvSample) -> MvStatus {
    guard(|| {
        let traj = borrow(traj, "trajectory")?;
        out_check(out, "out")?;
        let n = traj.0.samples.len();
        let s = traj
            .0
            .samples
            .get(index)
            .ok_or_else(|| fail(MvStatus::InvalidInput, &format!("sample {index} out of range (len {n})")))?;
        put(
            out,
            MvSample {
                t: s.t,
                position: [s.position.x, s.position.y, s.position.z],
                rotation_wxyz: quat_to_wxyz(&s.rotation),
            },
        );
        Ok(())
    })
}

/// Trajectory file text.
///
/// # Safety
/// `traj` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mv_trajectory_to_text(traj: *const MvTrajectory, out: *mut *mut c_char) -> MvStatus {
    guard(|| {
        let traj = borrow(traj, "trajectory")?;
        out_check(out, "out")?;
        put(out, c_string(format_trajectory(&traj.0)));
        Ok(())
    })
}

/// Write the trajectory file to `path`.
///
/// # Safety
/// `traj` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mv_trajectory_write(traj: *const MvTrajectory, path: *const c_char) -> MvStatus {
    guard(|| {
        let traj = borrow(traj, "trajectory")?;
        let path = read_str(path, "path")?;
        write_bytes(Path::new(path), format_trajectory(&traj.0).as_bytes()).map_err(Error::from)?;
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mv_trajectory_free(traj: *mut MvTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}
