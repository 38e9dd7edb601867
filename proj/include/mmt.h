/* Motion transfer toolkit — C interface to the shared library.
 *
 * Conventions:
 *   - Every fallible call returns mm_status; MM_OK is zero. On failure the
 *     thread-local message from mm_last_error() describes what went wrong,
 *     and no output parameter has been written.
 *   - Objects are opaque handles created by the library and released with the
 *     matching *_free call (free functions accept NULL). Accessors taking a
 *     handle plus indices write through caller-provided buffers.
 *   - Angles are radians, distances scene units, colors [0, 1] per channel.
 */
#ifndef MMT_H
#define MMT_H

#include <stdint.h>

#ifndef MMT_API
#if defined(_WIN32)
#define MMT_API
#else
#define MMT_API __attribute__((visibility("default")))
#endif
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mm_status {
  MM_OK = 0,
  MM_E_INVALID_ARGUMENT = 1,
  MM_E_IO = 2,
  MM_E_PARSE = 3,
  MM_E_TOO_FEW_POINTS = 4,
  MM_E_DEGENERATE_CONFIGURATION = 5,
  MM_E_BEHIND_CAMERA = 6,
  MM_E_NON_POSITIVE_DEPTH = 7,
  MM_E_RESOLUTION_MISMATCH = 8,
  MM_E_NO_VISIBLE_SAMPLE = 9,
  MM_E_EMPTY_FOREGROUND = 10,
  MM_E_LABEL_OUT_OF_RANGE = 11,
  MM_E_LABEL_COUNT_MISMATCH = 12,
  MM_E_DIMENSION_MISMATCH = 13,
  MM_E_INDEX_OUT_OF_RANGE = 14,
  MM_E_INVALID_SEED = 15,
  MM_E_INVALID_SPEC = 16,
  MM_E_EMPTY_CLOUD = 17,
  MM_E_DEGENERATE_CLOUD = 18,
  MM_E_EMPTY_SEQUENCE = 19,
  MM_E_TOO_SMALL = 20,
  MM_E_UNSUPPORTED = 21,
  MM_E_INTERNAL = 22
} mm_status;

/* Message for the most recent failure on this thread ("" after a success). */
MMT_API const char* mm_last_error(void);
/* Stable name for a status code, e.g. "ParseError". */
MMT_API const char* mm_status_name(mm_status status);
/* Worker threads for parallel stages; 0 restores the hardware default.
 * Any count produces bit-identical results. */
MMT_API void mm_set_threads(int threads);

typedef struct mm_trajectories mm_trajectories;
typedef struct mm_prior mm_prior;
typedef struct mm_cloud mm_cloud;
typedef struct mm_graph mm_graph;
typedef struct mm_boundary mm_boundary;
typedef struct mm_field mm_field;
typedef struct mm_trace mm_trace;
typedef struct mm_cameras mm_cameras;
typedef struct mm_frames mm_frames;

/* ---- synthetic scenes ---------------------------------------------------- */

typedef enum mm_motion_type {
  MM_MOTION_TRANSLATION = 0,
  MM_MOTION_ROTATION = 1,
  MM_MOTION_OSCILLATION = 2
} mm_motion_type;

typedef struct mm_motion_spec {
  int type;               /* mm_motion_type */
  double velocity[3];     /* translation: per-frame displacement */
  double axis[3];         /* rotation: axis (any nonzero length) */
  double radians_per_frame;
  double amplitude[3];    /* oscillation: sine amplitude */
  double frequency;       /* oscillation: cycles per frame */
  int64_t frames;         /* T >= 2 */
  int64_t points;         /* K >= 3 per component */
  double box_lo[3], box_hi[3]; /* sampling box */
  int32_t component_count;     /* last component moves, the rest hold still */
  uint64_t seed;
} mm_motion_spec;

/* Fills the documented defaults (translation, 10 frames, 300 points, ...). */
MMT_API void mm_motion_spec_init(mm_motion_spec* spec);

/* Random labeled scene following the spec exactly (no noise). out_truth, when
 * non-NULL, receives the ground-truth motion prior. */
MMT_API mm_status mm_synthesize(const mm_motion_spec* spec, mm_trajectories** out_trajectories,
                                mm_prior** out_truth);

/* ---- trajectories -------------------------------------------------------- */

MMT_API mm_status mm_trajectories_load(const char* path, mm_trajectories** out);
MMT_API mm_status mm_trajectories_save(const mm_trajectories* trajs, const char* path);
MMT_API void mm_trajectories_free(mm_trajectories* trajs);
MMT_API int64_t mm_trajectories_count(const mm_trajectories* trajs);
MMT_API int64_t mm_trajectories_frames(const mm_trajectories* trajs);
MMT_API double mm_trajectories_scale(const mm_trajectories* trajs);
/* "full" or "masked"; the pointer lives as long as the handle. */
MMT_API const char* mm_trajectories_source(const mm_trajectories* trajs);
/* Diagnostics attached by the operation that produced the handle (masking
 * notes and the like); empty for plain loads. */
MMT_API int64_t mm_trajectories_warning_count(const mm_trajectories* trajs);
MMT_API const char* mm_trajectories_warning(const mm_trajectories* trajs, int64_t i);
MMT_API mm_status mm_trajectories_position(const mm_trajectories* trajs, int64_t k, int64_t t,
                                           double out_xyz[3]);
MMT_API mm_status mm_trajectories_label(const mm_trajectories* trajs, int64_t k, int32_t* out);
/* Scales so the first-frame bounding-box diagonal is 1; writes the factor. */
MMT_API mm_status mm_trajectories_normalize(mm_trajectories* trajs, double* out_scale);

/* Lifts 2D tracks to world space: tracks file + a directory of per-frame
 * 16-bit PGM depth maps (sorted by name) + a camera file. A NULL cameras_path
 * means identity cameras (fx = fy = 1, cx = cy = 0, identity pose) at the
 * depth-map resolution. */
MMT_API mm_status mm_lift_tracks_files(const char* tracks_path, const char* depth_dir,
                                       const char* cameras_path, mm_trajectories** out);
/* Drops trajectories whose projection never sits inside the foreground for a
 * strict majority of some `window` consecutive frames. Masks are per-frame
 * PBM files (sorted by name). NULL cameras_path = identity cameras at the
 * mask resolution. */
MMT_API mm_status mm_mask_trajectories_files(const mm_trajectories* trajs, const char* mask_dir,
                                             const char* cameras_path, int window,
                                             mm_trajectories** out, int64_t* out_dropped);

/* ---- motion prior -------------------------------------------------------- */

MMT_API mm_status mm_prior_build(const mm_trajectories* trajs, mm_prior** out);
MMT_API mm_status mm_prior_load(const char* path, mm_prior** out);
MMT_API mm_status mm_prior_save(const mm_prior* prior, const char* path);
MMT_API void mm_prior_free(mm_prior* prior);
MMT_API int32_t mm_prior_components(const mm_prior* prior);
MMT_API int64_t mm_prior_frames(const mm_prior* prior);
MMT_API mm_status mm_prior_anchor(const mm_prior* prior, int32_t component, double out_xyz[3]);
/* Step transform: rotation row-major, then translation. step in [0, T-1). */
MMT_API mm_status mm_prior_step(const mm_prior* prior, int32_t component, int64_t step,
                                double out_rotation[9], double out_translation[3]);
/* Replays the prior over the trajectories' own first frame and reports, per
 * component, the maximum deviation from the recorded positions — the fit
 * residual. out must hold mm_prior_components() values. */
MMT_API mm_status mm_prior_replay_deviation(const mm_prior* prior, const mm_trajectories* trajs,
                                            double* out, int32_t out_count);

/* ---- target cloud -------------------------------------------------------- */

MMT_API mm_status mm_cloud_load(const char* path, mm_cloud** out);
MMT_API mm_status mm_cloud_save(const mm_cloud* cloud, const char* path, int binary);
MMT_API void mm_cloud_free(mm_cloud* cloud);
MMT_API int64_t mm_cloud_size(const mm_cloud* cloud);
MMT_API int32_t mm_cloud_components(const mm_cloud* cloud);
/* Vertex properties the loader skipped, one message each. */
MMT_API int64_t mm_cloud_warning_count(const mm_cloud* cloud);
MMT_API const char* mm_cloud_warning(const mm_cloud* cloud, int64_t i);
MMT_API mm_status mm_cloud_position(const mm_cloud* cloud, int64_t i, double out_xyz[3]);
/* Centers the centroid and scales the bounding-box diagonal to 1. Outputs
 * (optional) give the inverse map: original = normalized * scale + offset. */
MMT_API mm_status mm_cloud_normalize(mm_cloud* cloud, double* out_scale, double out_offset[3]);
/* First-frame positions and labels as a renderable cloud (mid-gray, radius
 * 1% of the bounding-box diagonal) — the self-transfer target. */
MMT_API mm_status mm_cloud_from_trajectories(const mm_trajectories* trajs, mm_cloud** out);
/* One label per line; must cover every point with a dense label set. */
MMT_API mm_status mm_cloud_apply_labels_file(mm_cloud* cloud, const char* path);
/* Seed file of `point_index component_label` lines; every point takes the
 * label of its geodesically nearest seed along the graph. */
MMT_API mm_status mm_cloud_apply_seeds_file(mm_cloud* cloud, const mm_graph* graph,
                                            const char* path);

/* ---- neighbor graph ------------------------------------------------------ */

/* Exact mutual k-nearest-neighbor graph over the cloud positions. */
MMT_API mm_status mm_graph_build(const mm_cloud* cloud, int64_t k, mm_graph** out);
MMT_API void mm_graph_free(mm_graph* graph);
MMT_API int64_t mm_graph_count(const mm_graph* graph);
MMT_API int64_t mm_graph_cap(const mm_graph* graph);
MMT_API int64_t mm_graph_edge_count(const mm_graph* graph);
/* -1 when graph is NULL or i is out of range. */
MMT_API int64_t mm_graph_degree(const mm_graph* graph, int64_t i);
/* Zero-copy view of point i's sorted neighbor list; valid until the graph is
 * freed. */
MMT_API mm_status mm_graph_neighbors(const mm_graph* graph, int64_t i, const int64_t** out,
                                     int64_t* out_count);

/* ---- motion boundary ----------------------------------------------------- */

MMT_API mm_status mm_boundary_flood_fill(const mm_graph* graph, const mm_cloud* cloud,
                                         const int64_t* seeds, int64_t seed_count, int hops,
                                         mm_boundary** out);
/* Same, reading seeds from an index file (one point index per line). */
MMT_API mm_status mm_boundary_flood_fill_file(const mm_graph* graph, const mm_cloud* cloud,
                                              const char* seeds_path, int hops, mm_boundary** out);
MMT_API void mm_boundary_free(mm_boundary* boundary);
MMT_API int64_t mm_boundary_size(const mm_boundary* boundary);
/* Zero-copy view of the sorted boundary indices; valid until freed. */
MMT_API mm_status mm_boundary_indices(const mm_boundary* boundary, const int64_t** out,
                                      int64_t* out_count);
MMT_API mm_status mm_boundary_save(const mm_boundary* boundary, const char* path);

/* ---- velocity field ------------------------------------------------------ */

typedef enum mm_extend_mode { MM_EXTEND_LOOP = 0, MM_EXTEND_PINGPONG = 1 } mm_extend_mode;
typedef enum mm_propagate_mode {
  MM_PROPAGATE_GLOBAL = 0,
  MM_PROPAGATE_NEIGHBORHOOD = 1
} mm_propagate_mode;

typedef struct mm_refine_config {
  double lambda_topo;
  double lambda_kin;
  int64_t sweeps;
  double omega;   /* damping in (0, 1] */
  double epsilon; /* static-speed threshold */
} mm_refine_config;

MMT_API void mm_refine_config_init(mm_refine_config* config);

/* Materializes the prior over the cloud as per-point, per-step displacements. */
MMT_API mm_status mm_field_compute(const mm_prior* prior, const mm_cloud* cloud, mm_field** out);
MMT_API mm_status mm_field_load(const char* path, mm_field** out);
MMT_API mm_status mm_field_save(const mm_field* field, const char* path);
MMT_API void mm_field_free(mm_field* field);
MMT_API int64_t mm_field_points(const mm_field* field);
MMT_API int64_t mm_field_steps(const mm_field* field);
MMT_API mm_status mm_field_value(const mm_field* field, int64_t step, int64_t i,
                                 double out_xyz[3]);
/* Damped Jacobi smoothing of the field. boundary may be NULL (no topological
 * term) and config may be NULL (defaults); out_trace, when non-NULL, receives
 * the per-sweep loss trace. */
MMT_API mm_status mm_field_refine(const mm_field* field, const mm_graph* graph,
                                  const mm_boundary* boundary, const mm_refine_config* config,
                                  mm_field** out, mm_trace** out_trace);
/* Fills near-static points (speed < epsilon) from the dynamic ones. */
MMT_API mm_status mm_field_propagate_static(const mm_field* field, const mm_cloud* cloud,
                                            const mm_graph* graph, double epsilon, int mode,
                                            mm_field** out);
MMT_API mm_status mm_field_scale(const mm_field* field, double factor, mm_field** out);
MMT_API mm_status mm_field_extend(const mm_field* field, int64_t repeats, int mode,
                                  mm_field** out);

/* ---- loss trace ----------------------------------------------------------- */

MMT_API void mm_trace_free(mm_trace* trace);
MMT_API int64_t mm_trace_rows(const mm_trace* trace);
/* Any output pointer may be NULL. Sweep 0 is the pre-refinement loss. */
MMT_API mm_status mm_trace_row(const mm_trace* trace, int64_t i, int64_t* out_sweep,
                               int64_t* out_step, double* out_kinematic, double* out_topological,
                               double* out_total);
MMT_API mm_status mm_trace_save_csv(const mm_trace* trace, const char* path);

/* ---- cameras and rendering ----------------------------------------------- */

/* Camera file: per line fx fy cx cy + 3x4 camera-to-world, row-major. The
 * file carries no resolution; the caller supplies it. */
MMT_API mm_status mm_cameras_load(const char* path, int width, int height, mm_cameras** out);
/* Static default camera framing the whole integrated motion of the field. */
MMT_API mm_status mm_cameras_default(const mm_cloud* cloud, const mm_field* field, int width,
                                     int height, mm_cameras** out);
/* Same framing rule over recorded trajectories. */
MMT_API mm_status mm_cameras_default_for_trajectories(const mm_trajectories* trajs, int width,
                                                      int height, mm_cameras** out);
MMT_API void mm_cameras_free(mm_cameras* cameras);
MMT_API int64_t mm_cameras_count(const mm_cameras* cameras);

/* Integrates the field from the cloud positions and rasterizes every frame.
 * background is RGB in [0, 1]; NULL means black. */
MMT_API mm_status mm_render_motion(const mm_cloud* cloud, const mm_field* field,
                                   const mm_cameras* cameras, const double background[3],
                                   mm_frames** out);
/* Renders recorded trajectories as uniform gray points of the given radius. */
MMT_API mm_status mm_render_trajectories(const mm_trajectories* trajs, const mm_cameras* cameras,
                                         double radius, const double background[3],
                                         mm_frames** out);
MMT_API void mm_frames_free(mm_frames* frames);
MMT_API int64_t mm_frames_count(const mm_frames* frames);
/* Writes <prefix>NNNN.ppm per frame into dir (created if missing). */
MMT_API mm_status mm_frames_save_ppm_dir(const mm_frames* frames, const char* dir,
                                         const char* prefix);
/* Loads every .ppm in dir, sorted by name. */
MMT_API mm_status mm_frames_load_ppm_dir(const char* dir, mm_frames** out);
/* Per-frame PSNR/SSIM of a against b. csv_path (optional) receives a
 * frame,psnr_db,ssim table; the means land in the optional out pointers. */
MMT_API mm_status mm_frames_compare(const mm_frames* a, const mm_frames* b, const char* csv_path,
                                    double* out_mean_psnr, double* out_mean_ssim);

/* ---- rigid alignment ------------------------------------------------------ */

/* Least-squares rigid fit (no scale) between corresponded point arrays laid
 * out [x0 y0 z0 x1 y1 z1 ...]. Writes the row-major rotation (det +1 always),
 * the translation, and optionally the per-point RMS residual. */
MMT_API mm_status mm_umeyama_align(const double* src_xyz, const double* dst_xyz, int64_t count,
                                   double out_rotation[9], double out_translation[3],
                                   double* out_rmse);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MMT_H */
