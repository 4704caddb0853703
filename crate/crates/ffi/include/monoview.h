#ifndef MONOVIEW_H
#define MONOVIEW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum MvStatus {
  MV_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MV_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  MV_STATUS_INVALID_UTF8 = 2,
  /**
   * A file could not be read or written.
   */
  MV_STATUS_IO = 3,
  /**
   * Text input (scene, plan, query) could not be parsed.
   */
  MV_STATUS_PARSE = 4,
  /**
   * Input was well formed but unusable (unknown id, bad config, ...).
   */
  MV_STATUS_INVALID_INPUT = 5,
  /**
   * No collision-free trajectory was found.
   */
  MV_STATUS_PLANNING = 6,
  /**
   * The library panicked; this is a bug.
   */
  MV_STATUS_PANIC = 7,
} MvStatus;

/**
 * Parsed plan program.
 */
typedef struct MvPlan MvPlan;

/**
 * Reconstructed or loaded scene.
 */
typedef struct MvScene MvScene;

/**
 * Smoothed trajectory.
 */
typedef struct MvTrajectory MvTrajectory;

/**
 * Planner settings; start from [`mv_planner_config_default`].
 */
typedef struct MvPlannerConfig {
  double step_size;
  uint64_t max_iterations;
  double goal_bias;
  double neighbor_radius_scale;
  uint64_t rng_seed;
  uint64_t kmeans_k;
  double resample_sigma_scale;
  uint64_t resample_max_attempts;
  double samples_per_cm;
  double bounds_margin;
} MvPlannerConfig;

/**
 * One trajectory sample: time in s, world position in cm, rotation as w, x, y, z.
 */
typedef struct MvSample {
  double t;
  double position[3];
  double rotation_wxyz[4];
} MvSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *mv_last_error_message(void);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void mv_string_free(char *s);

/**
 * Focal length in pixels for an image height and vertical field of view in degrees.
 *
 * # Safety
 * `out_focal` must be valid for writes.
 */
enum MvStatus mv_focal_from_fov(double height_px, double fov_v_deg, double *out_focal);

/**
 * Load a scene document from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum MvStatus mv_scene_load(const char *path, struct MvScene **out);

/**
 * Parse a scene document held in memory.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` valid for writes.
 */
enum MvStatus mv_scene_parse(const char *text, struct MvScene **out);

/**
 * Number of objects in the scene; 0 for null.
 *
 * # Safety
 * `scene` must be null or a live handle.
 */
size_t mv_scene_object_count(const struct MvScene *scene);

/**
 * World-frame center (cm) of object `id`.
 *
 * # Safety
 * `scene` must be a live handle and `out_center` valid for three doubles.
 */
enum MvStatus mv_scene_object_center(const struct MvScene *scene, uint32_t id, double *out_center);

/**
 * Spatial context text of the scene.
 *
 * # Safety
 * `scene` must be a live handle and `out` valid for writes.
 */
enum MvStatus mv_scene_summary(const struct MvScene *scene, char **out);

/**
 * Answer one metric query line such as `distance 3 4` and return `value unit`.
 *
 * # Safety
 * `scene` must be a live handle, `query` a NUL-terminated string and `out` valid for writes.
 */
enum MvStatus mv_scene_query(const struct MvScene *scene, const char *query, char **out);

/**
 * # Safety
 * `scene` must be null or a handle not yet freed.
 */
void mv_scene_free(struct MvScene *scene);

/**
 * Parse plan text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` valid for writes.
 */
enum MvStatus mv_plan_parse(const char *text, struct MvPlan **out);

/**
 * Number of steps; 0 for null.
 *
 * # Safety
 * `plan` must be null or a live handle.
 */
size_t mv_plan_step_count(const struct MvPlan *plan);

/**
 * Canonical text of the plan.
 *
 * # Safety
 * `plan` must be a live handle and `out` valid for writes.
 */
enum MvStatus mv_plan_format(const struct MvPlan *plan, char **out);

/**
 * # Safety
 * `plan` must be null or a handle not yet freed.
 */
void mv_plan_free(struct MvPlan *plan);

/**
 * Default planner settings.
 */
struct MvPlannerConfig mv_planner_config_default(void);

/**
 * Plan and smooth a trajectory. `config` may be null for the defaults.
 *
 * # Safety
 * `scene` and `plan` must be live handles, `config` null or valid, `out` valid for writes.
 */
enum MvStatus mv_plan_trajectory(const struct MvScene *scene,
                                 const struct MvPlan *plan,
                                 const struct MvPlannerConfig *config,
                                 struct MvTrajectory **out);

/**
 * Number of samples; 0 for null.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t mv_trajectory_len(const struct MvTrajectory *traj);

/**
 * Copy sample `index`.
 *
 * # Safety
 * `traj` must be a live handle and `out` valid for writes.
 */
enum MvStatus mv_trajectory_sample(const struct MvTrajectory *traj,
                                   size_t index,
                                   struct MvSample *out);

/**
 * Trajectory file text.
 *
 * # Safety
 * `traj` must be a live handle and `out` valid for writes.
 */
enum MvStatus mv_trajectory_to_text(const struct MvTrajectory *traj, char **out);

/**
 * Write the trajectory file to `path`.
 *
 * # Safety
 * `traj` must be a live handle and `path` a NUL-terminated string.
 */
enum MvStatus mv_trajectory_write(const struct MvTrajectory *traj, const char *path);

/**
 * # Safety
 * `traj` must be null or a handle not yet freed.
 */
void mv_trajectory_free(struct MvTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MONOVIEW_H */
