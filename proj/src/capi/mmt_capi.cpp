// C interface of the shared library. Every entry point converts between the
// C++ value types and opaque handles, funnels exceptions into status codes,
// and parks the message in a thread-local slot for mm_last_error(). Output
// parameters are only written after all fallible work has finished.

#include "mmt.h"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/cloud.hpp"
#include "core/error.hpp"
#include "core/formats.hpp"
#include "core/geometry.hpp"
#include "core/graph.hpp"
#include "core/image_io.hpp"
#include "core/metrics.hpp"
#include "core/parallel.hpp"
#include "core/refine.hpp"
#include "core/render.hpp"
#include "core/spat_prior.hpp"
#include "core/synth.hpp"
#include "core/trajectory.hpp"
#include "core/velocity_field.hpp"

struct mm_trajectories {
  mmt::TrajectorySet value;
  std::vector<std::string> warnings;
};
struct mm_prior {
  mmt::SpatPrior value;
};
struct mm_cloud {
  mmt::TargetCloud value;
  std::vector<std::string> warnings;
};
struct mm_graph {
  mmt::NeighborGraph value;
};
struct mm_boundary {
  mmt::BoundarySet value;
};
struct mm_field {
  mmt::VelocityField value;
};
struct mm_trace {
  std::vector<mmt::LossTraceRow> rows;
};
struct mm_cameras {
  mmt::CameraPath value;
};
struct mm_frames {
  std::vector<mmt::Frame> value;
};

namespace {

thread_local std::string g_error;

mm_status status_of(mmt::ErrorCode code) { return mm_status(int(code) + 1); }

/// Runs the body and maps any escaping exception onto a status. Success
/// clears the thread-local message so stale text never outlives its failure.
template <typename Fn>
mm_status wrap(Fn&& fn) {
  try {
    fn();
    g_error.clear();
    return MM_OK;
  } catch (const mmt::Error& e) {
    g_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_error = e.what();
    return MM_E_INTERNAL;
  } catch (...) {
    g_error = "unknown exception";
    return MM_E_INTERNAL;
  }
}

mm_status fail_null(const char* function) {
  g_error = std::string(function) + ": null argument";
  return MM_E_INVALID_ARGUMENT;
}

void put3(const mmt::Vec3& v, double out[3]) {
  out[0] = v.x;
  out[1] = v.y;
  out[2] = v.z;
}

mmt::Vec3 get3(const double in[3]) { return {in[0], in[1], in[2]}; }

void check_index(int64_t i, int64_t count, const char* what) {
  if (i < 0 || i >= count)
    throw mmt::Error(mmt::ErrorCode::IndexOutOfRange,
                     std::string(what) + " " + std::to_string(i) + " not in [0, " +
                         std::to_string(count) + ")");
}

/// Per-frame position lists (frame-major) from a trajectory-major set.
std::vector<std::vector<mmt::Vec3>> frames_of(const mmt::TrajectorySet& trajs) {
  std::vector<std::vector<mmt::Vec3>> frames(static_cast<size_t>(trajs.frame_count));
  for (int64_t t = 0; t < trajs.frame_count; ++t) {
    frames[size_t(t)].reserve(static_cast<size_t>(trajs.trajectory_count));
    for (int64_t k = 0; k < trajs.trajectory_count; ++k) frames[size_t(t)].push_back(trajs.at(k, t));
  }
  return frames;
}

/// First-frame positions of every trajectory (the transfer target geometry).
std::vector<mmt::Vec3> first_frame_of(const mmt::TrajectorySet& trajs) {
  std::vector<mmt::Vec3> points;
  points.reserve(static_cast<size_t>(trajs.trajectory_count));
  for (int64_t k = 0; k < trajs.trajectory_count; ++k) points.push_back(trajs.at(k, 0));
  return points;
}

/// Renderable stand-in cloud over trajectory first-frame positions: mid-gray,
/// per-point radius as a fraction of the bounding-box diagonal.
mmt::TargetCloud cloud_over(const mmt::TrajectorySet& trajs, double radius) {
  mmt::TargetCloud cloud;
  cloud.positions = first_frame_of(trajs);
  if (radius <= 0.0)
    throw mmt::Error(mmt::ErrorCode::InvalidArgument, "point radius must be positive");
  cloud.colors.assign(cloud.positions.size(), mmt::Vec3{0.5, 0.5, 0.5});
  cloud.labels = trajs.labels;
  cloud.radii.assign(cloud.positions.size(), radius);
  cloud.validate();
  return cloud;
}

/// Default point radius over trajectory geometry: 1% of the first frame's
/// bounding-box diagonal, the same rule PLY loading applies when radii are
/// absent.
double derived_radius(const mmt::TrajectorySet& trajs) {
  const double diagonal = mmt::compute_aabb(first_frame_of(trajs)).diagonal();
  if (diagonal <= 0.0)
    throw mmt::Error(mmt::ErrorCode::DegenerateCloud,
                     "trajectory first frame has zero spatial extent");
  return 0.01 * diagonal;
}

mmt::DepthMapSequence read_depth_dir(const std::string& dir) {
  mmt::DepthMapSequence depths;
  for (const std::string& file : mmt::list_files(dir, ".pgm"))
    depths.push_back(mmt::read_pgm_depth(file));
  if (depths.empty())
    throw mmt::Error(mmt::ErrorCode::EmptySequence, "no .pgm depth maps in '" + dir + "'");
  return depths;
}

mmt::MaskSequence read_mask_dir(const std::string& dir) {
  mmt::MaskSequence masks;
  for (const std::string& file : mmt::list_files(dir, ".pbm"))
    masks.push_back(mmt::read_pbm(file));
  if (masks.empty())
    throw mmt::Error(mmt::ErrorCode::EmptySequence, "no .pbm masks in '" + dir + "'");
  return masks;
}

/// The documented camera fallback: unit intrinsics, principal point at the
/// origin, identity pose, one camera per frame.
std::vector<mmt::CameraModel> identity_cameras(int64_t count, int width, int height) {
  mmt::CameraModel camera;
  camera.fx = camera.fy = 1.0;
  camera.cx = camera.cy = 0.0;
  camera.width = width;
  camera.height = height;
  return std::vector<mmt::CameraModel>(static_cast<size_t>(count), camera);
}

}  // namespace

extern "C" {

const char* mm_last_error(void) { return g_error.c_str(); }

const char* mm_status_name(mm_status status) {
  if (status == MM_OK) return "Ok";
  if (status == MM_E_INTERNAL) return "InternalError";
  const int code = int(status) - 1;
  if (code < 0 || code > int(mmt::ErrorCode::Unsupported)) return "UnknownStatus";
  return mmt::error_code_name(mmt::ErrorCode(code));
}

void mm_set_threads(int threads) { mmt::set_thread_count(threads < 0 ? 0 : threads); }

/* ---- synthetic scenes ---------------------------------------------------- */

void mm_motion_spec_init(mm_motion_spec* spec) {
  if (!spec) return;
  const mmt::MotionSpec d;
  spec->type = MM_MOTION_TRANSLATION;
  put3(d.velocity, spec->velocity);
  put3(d.axis, spec->axis);
  spec->radians_per_frame = d.radians_per_frame;
  put3(d.amplitude, spec->amplitude);
  spec->frequency = d.frequency;
  spec->frames = d.frames;
  spec->points = d.points;
  put3(d.box_lo, spec->box_lo);
  put3(d.box_hi, spec->box_hi);
  spec->component_count = d.component_count;
  spec->seed = d.seed;
}

mm_status mm_synthesize(const mm_motion_spec* spec, mm_trajectories** out_trajectories,
                        mm_prior** out_truth) {
  if (!spec || !out_trajectories) return fail_null("mm_synthesize");
  return wrap([&] {
    mmt::MotionSpec s;
    switch (spec->type) {
      case MM_MOTION_TRANSLATION: s.type = mmt::MotionType::Translation; break;
      case MM_MOTION_ROTATION: s.type = mmt::MotionType::Rotation; break;
      case MM_MOTION_OSCILLATION: s.type = mmt::MotionType::Oscillation; break;
      default:
        throw mmt::Error(mmt::ErrorCode::InvalidArgument,
                         "unknown motion type " + std::to_string(spec->type));
    }
    s.velocity = get3(spec->velocity);
    s.axis = get3(spec->axis);
    s.radians_per_frame = spec->radians_per_frame;
    s.amplitude = get3(spec->amplitude);
    s.frequency = spec->frequency;
    s.frames = spec->frames;
    s.points = spec->points;
    s.box_lo = get3(spec->box_lo);
    s.box_hi = get3(spec->box_hi);
    s.component_count = spec->component_count;
    s.seed = spec->seed;

    mmt::SynthesizedScene scene = mmt::synthesize_scene(s);
    std::unique_ptr<mm_prior> truth;
    if (out_truth) truth.reset(new mm_prior{std::move(scene.ground_truth)});
    std::unique_ptr<mm_trajectories> trajs(new mm_trajectories{std::move(scene.trajectories), {}});
    *out_trajectories = trajs.release();
    if (out_truth) *out_truth = truth.release();
  });
}

/* ---- trajectories -------------------------------------------------------- */

mm_status mm_trajectories_load(const char* path, mm_trajectories** out) {
  if (!path || !out) return fail_null("mm_trajectories_load");
  return wrap([&] { *out = new mm_trajectories{mmt::load_trajectories(path), {}}; });
}

mm_status mm_trajectories_save(const mm_trajectories* trajs, const char* path) {
  if (!trajs || !path) return fail_null("mm_trajectories_save");
  return wrap([&] { mmt::save_trajectories(trajs->value, path); });
}

void mm_trajectories_free(mm_trajectories* trajs) { delete trajs; }

int64_t mm_trajectories_count(const mm_trajectories* trajs) {
  return trajs ? trajs->value.trajectory_count : 0;
}

int64_t mm_trajectories_frames(const mm_trajectories* trajs) {
  return trajs ? trajs->value.frame_count : 0;
}

double mm_trajectories_scale(const mm_trajectories* trajs) {
  return trajs ? trajs->value.scale : 0.0;
}

const char* mm_trajectories_source(const mm_trajectories* trajs) {
  return trajs ? trajs->value.source.c_str() : "";
}

int64_t mm_trajectories_warning_count(const mm_trajectories* trajs) {
  return trajs ? int64_t(trajs->warnings.size()) : 0;
}

const char* mm_trajectories_warning(const mm_trajectories* trajs, int64_t i) {
  if (!trajs || i < 0 || i >= int64_t(trajs->warnings.size())) return "";
  return trajs->warnings[size_t(i)].c_str();
}

mm_status mm_trajectories_position(const mm_trajectories* trajs, int64_t k, int64_t t,
                                   double out_xyz[3]) {
  if (!trajs || !out_xyz) return fail_null("mm_trajectories_position");
  return wrap([&] {
    check_index(k, trajs->value.trajectory_count, "trajectory");
    check_index(t, trajs->value.frame_count, "frame");
    put3(trajs->value.at(k, t), out_xyz);
  });
}

mm_status mm_trajectories_label(const mm_trajectories* trajs, int64_t k, int32_t* out) {
  if (!trajs || !out) return fail_null("mm_trajectories_label");
  return wrap([&] {
    check_index(k, trajs->value.trajectory_count, "trajectory");
    *out = trajs->value.labels[size_t(k)];
  });
}

mm_status mm_trajectories_normalize(mm_trajectories* trajs, double* out_scale) {
  if (!trajs) return fail_null("mm_trajectories_normalize");
  return wrap([&] {
    const double scale = mmt::normalize_trajectories(trajs->value);
    if (out_scale) *out_scale = scale;
  });
}

mm_status mm_lift_tracks_files(const char* tracks_path, const char* depth_dir,
                               const char* cameras_path, mm_trajectories** out) {
  if (!tracks_path || !depth_dir || !out) return fail_null("mm_lift_tracks_files");
  return wrap([&] {
    const mmt::Track2DSet tracks = mmt::load_tracks(tracks_path);
    const mmt::DepthMapSequence depths = read_depth_dir(depth_dir);
    const std::vector<mmt::CameraModel> cameras =
        cameras_path ? mmt::load_cameras(cameras_path, depths[0].width, depths[0].height)
                     : identity_cameras(tracks.frame_count, depths[0].width, depths[0].height);
    *out = new mm_trajectories{mmt::lift_tracks(tracks, depths, cameras), {}};
  });
}

mm_status mm_mask_trajectories_files(const mm_trajectories* trajs, const char* mask_dir,
                                     const char* cameras_path, int window, mm_trajectories** out,
                                     int64_t* out_dropped) {
  if (!trajs || !mask_dir || !out) return fail_null("mm_mask_trajectories_files");
  return wrap([&] {
    const mmt::MaskSequence masks = read_mask_dir(mask_dir);
    const std::vector<mmt::CameraModel> cameras =
        cameras_path
            ? mmt::load_cameras(cameras_path, masks[0].width, masks[0].height)
            : identity_cameras(trajs->value.frame_count, masks[0].width, masks[0].height);
    mmt::MaskResult result = mmt::mask_trajectories(trajs->value, masks, cameras, window);
    *out = new mm_trajectories{std::move(result.kept), std::move(result.warnings)};
    if (out_dropped) *out_dropped = result.dropped;
  });
}

/* ---- motion prior -------------------------------------------------------- */

mm_status mm_prior_build(const mm_trajectories* trajs, mm_prior** out) {
  if (!trajs || !out) return fail_null("mm_prior_build");
  return wrap([&] { *out = new mm_prior{mmt::build_prior(trajs->value)}; });
}

mm_status mm_prior_load(const char* path, mm_prior** out) {
  if (!path || !out) return fail_null("mm_prior_load");
  return wrap([&] { *out = new mm_prior{mmt::load_prior(path)}; });
}

mm_status mm_prior_save(const mm_prior* prior, const char* path) {
  if (!prior || !path) return fail_null("mm_prior_save");
  return wrap([&] { mmt::save_prior(prior->value, path); });
}

void mm_prior_free(mm_prior* prior) { delete prior; }

int32_t mm_prior_components(const mm_prior* prior) {
  return prior ? prior->value.component_count() : 0;
}

int64_t mm_prior_frames(const mm_prior* prior) { return prior ? prior->value.frame_count : 0; }

mm_status mm_prior_anchor(const mm_prior* prior, int32_t component, double out_xyz[3]) {
  if (!prior || !out_xyz) return fail_null("mm_prior_anchor");
  return wrap([&] {
    check_index(component, prior->value.component_count(), "component");
    put3(prior->value.anchors[size_t(component)], out_xyz);
  });
}

mm_status mm_prior_step(const mm_prior* prior, int32_t component, int64_t step,
                        double out_rotation[9], double out_translation[3]) {
  if (!prior || !out_rotation || !out_translation) return fail_null("mm_prior_step");
  return wrap([&] {
    check_index(component, prior->value.component_count(), "component");
    check_index(step, prior->value.step_count(), "step");
    const mmt::RigidTransform& tf = prior->value.components[size_t(component)][size_t(step)];
    for (int i = 0; i < 9; ++i) out_rotation[i] = tf.rotation.m[i];
    put3(tf.translation, out_translation);
  });
}

mm_status mm_prior_replay_deviation(const mm_prior* prior, const mm_trajectories* trajs,
                                    double* out, int32_t out_count) {
  if (!prior || !trajs || !out) return fail_null("mm_prior_replay_deviation");
  return wrap([&] {
    const mmt::SpatPrior& p = prior->value;
    const mmt::TrajectorySet& ts = trajs->value;
    if (out_count != p.component_count())
      throw mmt::Error(mmt::ErrorCode::DimensionMismatch,
                       "deviation buffer holds " + std::to_string(out_count) + " values, prior has " +
                           std::to_string(p.component_count()) + " components");
    if (ts.frame_count != p.frame_count)
      throw mmt::Error(mmt::ErrorCode::DimensionMismatch,
                       "prior spans " + std::to_string(p.frame_count) + " frames, trajectories " +
                           std::to_string(ts.frame_count));
    const std::vector<mmt::Vec3> start = first_frame_of(ts);
    const std::vector<std::vector<mmt::Vec3>> replayed =
        mmt::apply_prior(p, start, ts.labels, mmt::Alignment::Anchored);
    std::vector<double> worst(static_cast<size_t>(p.component_count()), 0.0);
    for (int64_t k = 0; k < ts.trajectory_count; ++k) {
      double& slot = worst[size_t(ts.labels[size_t(k)])];
      for (int64_t t = 0; t < ts.frame_count; ++t)
        slot = std::max(slot, mmt::norm(replayed[size_t(t)][size_t(k)] - ts.at(k, t)));
    }
    for (int32_t c = 0; c < out_count; ++c) out[size_t(c)] = worst[size_t(c)];
  });
}

/* ---- target cloud -------------------------------------------------------- */

mm_status mm_cloud_load(const char* path, mm_cloud** out) {
  if (!path || !out) return fail_null("mm_cloud_load");
  return wrap([&] {
    mmt::CloudLoadResult result = mmt::load_cloud(path);
    *out = new mm_cloud{std::move(result.cloud), std::move(result.warnings)};
  });
}

mm_status mm_cloud_save(const mm_cloud* cloud, const char* path, int binary) {
  if (!cloud || !path) return fail_null("mm_cloud_save");
  return wrap([&] { mmt::save_cloud(cloud->value, path, binary != 0); });
}

void mm_cloud_free(mm_cloud* cloud) { delete cloud; }

int64_t mm_cloud_size(const mm_cloud* cloud) { return cloud ? cloud->value.size() : 0; }

int32_t mm_cloud_components(const mm_cloud* cloud) {
  return cloud ? cloud->value.components() : 0;
}

int64_t mm_cloud_warning_count(const mm_cloud* cloud) {
  return cloud ? int64_t(cloud->warnings.size()) : 0;
}

const char* mm_cloud_warning(const mm_cloud* cloud, int64_t i) {
  if (!cloud || i < 0 || i >= int64_t(cloud->warnings.size())) return "";
  return cloud->warnings[size_t(i)].c_str();
}

mm_status mm_cloud_position(const mm_cloud* cloud, int64_t i, double out_xyz[3]) {
  if (!cloud || !out_xyz) return fail_null("mm_cloud_position");
  return wrap([&] {
    check_index(i, cloud->value.size(), "point");
    put3(cloud->value.positions[size_t(i)], out_xyz);
  });
}

mm_status mm_cloud_normalize(mm_cloud* cloud, double* out_scale, double out_offset[3]) {
  if (!cloud) return fail_null("mm_cloud_normalize");
  return wrap([&] {
    const mmt::NormalizeResult result = mmt::normalize_cloud(cloud->value);
    if (out_scale) *out_scale = result.scale;
    if (out_offset) put3(result.offset, out_offset);
  });
}

mm_status mm_cloud_from_trajectories(const mm_trajectories* trajs, mm_cloud** out) {
  if (!trajs || !out) return fail_null("mm_cloud_from_trajectories");
  return wrap([&] {
    *out = new mm_cloud{cloud_over(trajs->value, derived_radius(trajs->value)), {}};
  });
}

mm_status mm_cloud_apply_labels_file(mm_cloud* cloud, const char* path) {
  if (!cloud || !path) return fail_null("mm_cloud_apply_labels_file");
  return wrap([&] {
    const std::vector<int32_t> labels = mmt::load_labels(path);
    mmt::assign_labels(cloud->value, labels);
  });
}

mm_status mm_cloud_apply_seeds_file(mm_cloud* cloud, const mm_graph* graph, const char* path) {
  if (!cloud || !graph || !path) return fail_null("mm_cloud_apply_seeds_file");
  return wrap([&] {
    const std::vector<mmt::LabelSeed> seeds = mmt::load_label_seeds(path);
    mmt::assign_labels_by_seeds(cloud->value, graph->value, seeds);
  });
}

/* ---- neighbor graph ------------------------------------------------------ */

mm_status mm_graph_build(const mm_cloud* cloud, int64_t k, mm_graph** out) {
  if (!cloud || !out) return fail_null("mm_graph_build");
  return wrap([&] { *out = new mm_graph{mmt::build_graph(cloud->value.positions, k)}; });
}

void mm_graph_free(mm_graph* graph) { delete graph; }

int64_t mm_graph_count(const mm_graph* graph) { return graph ? graph->value.count : 0; }

int64_t mm_graph_cap(const mm_graph* graph) { return graph ? graph->value.cap : 0; }

int64_t mm_graph_edge_count(const mm_graph* graph) {
  return graph ? graph->value.edge_count() : 0;
}

int64_t mm_graph_degree(const mm_graph* graph, int64_t i) {
  if (!graph || i < 0 || i >= graph->value.count) return -1;
  return graph->value.degree(i);
}

mm_status mm_graph_neighbors(const mm_graph* graph, int64_t i, const int64_t** out,
                             int64_t* out_count) {
  if (!graph || !out || !out_count) return fail_null("mm_graph_neighbors");
  return wrap([&] {
    check_index(i, graph->value.count, "point");
    const std::span<const int64_t> span = graph->value.of(i);
    *out = span.data();
    *out_count = int64_t(span.size());
  });
}

/* ---- motion boundary ----------------------------------------------------- */

mm_status mm_boundary_flood_fill(const mm_graph* graph, const mm_cloud* cloud,
                                 const int64_t* seeds, int64_t seed_count, int hops,
                                 mm_boundary** out) {
  if (!graph || !cloud || !out || (!seeds && seed_count > 0))
    return fail_null("mm_boundary_flood_fill");
  return wrap([&] {
    if (seed_count < 0)
      throw mmt::Error(mmt::ErrorCode::InvalidArgument, "negative seed count");
    const std::span<const int64_t> span(seeds, static_cast<size_t>(seed_count));
    *out = new mm_boundary{
        mmt::flood_fill_boundary(graph->value, cloud->value.labels, span, hops)};
  });
}

mm_status mm_boundary_flood_fill_file(const mm_graph* graph, const mm_cloud* cloud,
                                      const char* seeds_path, int hops, mm_boundary** out) {
  if (!graph || !cloud || !seeds_path || !out) return fail_null("mm_boundary_flood_fill_file");
  return wrap([&] {
    const std::vector<int64_t> seeds = mmt::load_indices(seeds_path);
    *out = new mm_boundary{
        mmt::flood_fill_boundary(graph->value, cloud->value.labels, seeds, hops)};
  });
}

void mm_boundary_free(mm_boundary* boundary) { delete boundary; }

int64_t mm_boundary_size(const mm_boundary* boundary) {
  return boundary ? boundary->value.size() : 0;
}

mm_status mm_boundary_indices(const mm_boundary* boundary, const int64_t** out,
                              int64_t* out_count) {
  if (!boundary || !out || !out_count) return fail_null("mm_boundary_indices");
  return wrap([&] {
    *out = boundary->value.indices.data();
    *out_count = boundary->value.size();
  });
}

mm_status mm_boundary_save(const mm_boundary* boundary, const char* path) {
  if (!boundary || !path) return fail_null("mm_boundary_save");
  return wrap([&] { mmt::save_indices(boundary->value.indices, path); });
}

/* ---- velocity field ------------------------------------------------------ */

void mm_refine_config_init(mm_refine_config* config) {
  if (!config) return;
  const mmt::RefinementConfig d;
  config->lambda_topo = d.lambda_topo;
  config->lambda_kin = d.lambda_kin;
  config->sweeps = d.sweeps;
  config->omega = d.omega;
  config->epsilon = d.epsilon;
}

mm_status mm_field_compute(const mm_prior* prior, const mm_cloud* cloud, mm_field** out) {
  if (!prior || !cloud || !out) return fail_null("mm_field_compute");
  return wrap([&] { *out = new mm_field{mmt::compute_field(prior->value, cloud->value)}; });
}

mm_status mm_field_load(const char* path, mm_field** out) {
  if (!path || !out) return fail_null("mm_field_load");
  return wrap([&] { *out = new mm_field{mmt::load_field(path)}; });
}

mm_status mm_field_save(const mm_field* field, const char* path) {
  if (!field || !path) return fail_null("mm_field_save");
  return wrap([&] { mmt::save_field(field->value, path); });
}

void mm_field_free(mm_field* field) { delete field; }

int64_t mm_field_points(const mm_field* field) { return field ? field->value.point_count : 0; }

int64_t mm_field_steps(const mm_field* field) { return field ? field->value.steps : 0; }

mm_status mm_field_value(const mm_field* field, int64_t step, int64_t i, double out_xyz[3]) {
  if (!field || !out_xyz) return fail_null("mm_field_value");
  return wrap([&] {
    check_index(step, field->value.steps, "step");
    check_index(i, field->value.point_count, "point");
    put3(field->value.at(step, i), out_xyz);
  });
}

mm_status mm_field_refine(const mm_field* field, const mm_graph* graph,
                          const mm_boundary* boundary, const mm_refine_config* config,
                          mm_field** out, mm_trace** out_trace) {
  if (!field || !graph || !out) return fail_null("mm_field_refine");
  return wrap([&] {
    mmt::RefinementConfig rc;
    if (config) {
      rc.lambda_topo = config->lambda_topo;
      rc.lambda_kin = config->lambda_kin;
      rc.sweeps = config->sweeps;
      rc.omega = config->omega;
      rc.epsilon = config->epsilon;
    }
    static const mmt::BoundarySet kEmpty;
    const mmt::BoundarySet& bset = boundary ? boundary->value : kEmpty;
    mmt::RefineResult result = mmt::refine(field->value, graph->value, bset, rc);
    std::unique_ptr<mm_trace> trace;
    if (out_trace) trace.reset(new mm_trace{std::move(result.trace)});
    std::unique_ptr<mm_field> refined(new mm_field{std::move(result.field)});
    *out = refined.release();
    if (out_trace) *out_trace = trace.release();
  });
}

mm_status mm_field_propagate_static(const mm_field* field, const mm_cloud* cloud,
                                    const mm_graph* graph, double epsilon, int mode,
                                    mm_field** out) {
  if (!field || !cloud || !graph || !out) return fail_null("mm_field_propagate_static");
  return wrap([&] {
    mmt::PropagateMode pm;
    switch (mode) {
      case MM_PROPAGATE_GLOBAL: pm = mmt::PropagateMode::Global; break;
      case MM_PROPAGATE_NEIGHBORHOOD: pm = mmt::PropagateMode::Neighborhood; break;
      default:
        throw mmt::Error(mmt::ErrorCode::InvalidArgument,
                         "unknown propagation mode " + std::to_string(mode));
    }
    *out = new mm_field{
        mmt::propagate_static(field->value, cloud->value, graph->value, epsilon, pm)};
  });
}

mm_status mm_field_scale(const mm_field* field, double factor, mm_field** out) {
  if (!field || !out) return fail_null("mm_field_scale");
  return wrap([&] { *out = new mm_field{mmt::scale_field(field->value, factor)}; });
}

mm_status mm_field_extend(const mm_field* field, int64_t repeats, int mode, mm_field** out) {
  if (!field || !out) return fail_null("mm_field_extend");
  return wrap([&] {
    mmt::ExtendMode em;
    switch (mode) {
      case MM_EXTEND_LOOP: em = mmt::ExtendMode::Loop; break;
      case MM_EXTEND_PINGPONG: em = mmt::ExtendMode::PingPong; break;
      default:
        throw mmt::Error(mmt::ErrorCode::InvalidArgument,
                         "unknown extension mode " + std::to_string(mode));
    }
    *out = new mm_field{mmt::extend_field(field->value, repeats, em)};
  });
}

/* ---- loss trace ----------------------------------------------------------- */

void mm_trace_free(mm_trace* trace) { delete trace; }

int64_t mm_trace_rows(const mm_trace* trace) { return trace ? int64_t(trace->rows.size()) : 0; }

mm_status mm_trace_row(const mm_trace* trace, int64_t i, int64_t* out_sweep, int64_t* out_step,
                       double* out_kinematic, double* out_topological, double* out_total) {
  if (!trace) return fail_null("mm_trace_row");
  return wrap([&] {
    check_index(i, int64_t(trace->rows.size()), "row");
    const mmt::LossTraceRow& row = trace->rows[size_t(i)];
    if (out_sweep) *out_sweep = row.sweep;
    if (out_step) *out_step = row.step;
    if (out_kinematic) *out_kinematic = row.kinematic;
    if (out_topological) *out_topological = row.topological;
    if (out_total) *out_total = row.total;
  });
}

mm_status mm_trace_save_csv(const mm_trace* trace, const char* path) {
  if (!trace || !path) return fail_null("mm_trace_save_csv");
  return wrap([&] { mmt::write_loss_trace_csv(trace->rows, path); });
}

/* ---- cameras and rendering ----------------------------------------------- */

mm_status mm_cameras_load(const char* path, int width, int height, mm_cameras** out) {
  if (!path || !out) return fail_null("mm_cameras_load");
  return wrap([&] {
    mmt::CameraPath path_value{mmt::load_cameras(path, width, height)};
    path_value.validate();
    *out = new mm_cameras{std::move(path_value)};
  });
}

mm_status mm_cameras_default(const mm_cloud* cloud, const mm_field* field, int width, int height,
                             mm_cameras** out) {
  if (!cloud || !field || !out) return fail_null("mm_cameras_default");
  return wrap([&] {
    const std::vector<std::vector<mmt::Vec3>> frames =
        mmt::integrate(cloud->value.positions, field->value);
    *out = new mm_cameras{mmt::default_camera_path(frames, width, height)};
  });
}

mm_status mm_cameras_default_for_trajectories(const mm_trajectories* trajs, int width, int height,
                                              mm_cameras** out) {
  if (!trajs || !out) return fail_null("mm_cameras_default_for_trajectories");
  return wrap([&] {
    trajs->value.validate();
    *out = new mm_cameras{mmt::default_camera_path(frames_of(trajs->value), width, height)};
  });
}

void mm_cameras_free(mm_cameras* cameras) { delete cameras; }

int64_t mm_cameras_count(const mm_cameras* cameras) {
  return cameras ? cameras->value.size() : 0;
}

mm_status mm_render_motion(const mm_cloud* cloud, const mm_field* field, const mm_cameras* cameras,
                           const double background[3], mm_frames** out) {
  if (!cloud || !field || !cameras || !out) return fail_null("mm_render_motion");
  return wrap([&] {
    const mmt::Vec3 bg = background ? get3(background) : mmt::Vec3{0.0, 0.0, 0.0};
    const std::vector<std::vector<mmt::Vec3>> frames =
        mmt::integrate(cloud->value.positions, field->value);
    *out = new mm_frames{mmt::render(frames, cloud->value, cameras->value, bg)};
  });
}

mm_status mm_render_trajectories(const mm_trajectories* trajs, const mm_cameras* cameras,
                                 double radius, const double background[3], mm_frames** out) {
  if (!trajs || !cameras || !out) return fail_null("mm_render_trajectories");
  return wrap([&] {
    trajs->value.validate();
    const mmt::Vec3 bg = background ? get3(background) : mmt::Vec3{0.0, 0.0, 0.0};
    const double r = radius > 0.0 ? radius : derived_radius(trajs->value);
    const mmt::TargetCloud cloud = cloud_over(trajs->value, r);
    *out = new mm_frames{mmt::render(frames_of(trajs->value), cloud, cameras->value, bg)};
  });
}

void mm_frames_free(mm_frames* frames) { delete frames; }

int64_t mm_frames_count(const mm_frames* frames) {
  return frames ? int64_t(frames->value.size()) : 0;
}

mm_status mm_frames_save_ppm_dir(const mm_frames* frames, const char* dir, const char* prefix) {
  if (!frames || !dir) return fail_null("mm_frames_save_ppm_dir");
  return wrap([&] {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
      throw mmt::Error(mmt::ErrorCode::Io,
                       "cannot create directory '" + std::string(dir) + "': " + ec.message());
    const std::string stem = prefix ? prefix : "frame_";
    for (size_t i = 0; i < frames->value.size(); ++i) {
      char number[16];
      std::snprintf(number, sizeof number, "%04zu", i);
      const std::filesystem::path file =
          std::filesystem::path(dir) / (stem + number + ".ppm");
      mmt::write_ppm(frames->value[i], file.string());
    }
  });
}

mm_status mm_frames_load_ppm_dir(const char* dir, mm_frames** out) {
  if (!dir || !out) return fail_null("mm_frames_load_ppm_dir");
  return wrap([&] {
    std::vector<mmt::Frame> frames;
    for (const std::string& file : mmt::list_files(dir, ".ppm"))
      frames.push_back(mmt::read_ppm(file));
    if (frames.empty())
      throw mmt::Error(mmt::ErrorCode::EmptySequence, "no .ppm frames in '" + std::string(dir) + "'");
    *out = new mm_frames{std::move(frames)};
  });
}

mm_status mm_frames_compare(const mm_frames* a, const mm_frames* b, const char* csv_path,
                            double* out_mean_psnr, double* out_mean_ssim) {
  if (!a || !b) return fail_null("mm_frames_compare");
  return wrap([&] {
    if (a->value.size() != b->value.size())
      throw mmt::Error(mmt::ErrorCode::DimensionMismatch,
                       "comparing " + std::to_string(a->value.size()) + " frames against " +
                           std::to_string(b->value.size()));
    if (a->value.empty())
      throw mmt::Error(mmt::ErrorCode::EmptySequence, "no frames to compare");
    std::vector<mmt::MetricsRow> rows;
    rows.reserve(a->value.size());
    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (size_t i = 0; i < a->value.size(); ++i) {
      mmt::MetricsRow row;
      row.frame = int64_t(i);
      row.psnr_db = mmt::psnr(a->value[i], b->value[i]);
      row.ssim = mmt::ssim(a->value[i], b->value[i]);
      psnr_sum += row.psnr_db;
      ssim_sum += row.ssim;
      rows.push_back(row);
    }
    if (csv_path) mmt::write_metrics_csv(rows, csv_path);
    if (out_mean_psnr) *out_mean_psnr = psnr_sum / double(rows.size());
    if (out_mean_ssim) *out_mean_ssim = ssim_sum / double(rows.size());
  });
}

/* ---- rigid alignment ------------------------------------------------------ */

mm_status mm_umeyama_align(const double* src_xyz, const double* dst_xyz, int64_t count,
                           double out_rotation[9], double out_translation[3], double* out_rmse) {
  if (!src_xyz || !dst_xyz || !out_rotation || !out_translation)
    return fail_null("mm_umeyama_align");
  return wrap([&] {
    if (count < 0) throw mmt::Error(mmt::ErrorCode::InvalidArgument, "negative point count");
    std::vector<mmt::Vec3> src, dst;
    src.reserve(static_cast<size_t>(count));
    dst.reserve(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) {
      src.push_back(get3(src_xyz + 3 * i));
      dst.push_back(get3(dst_xyz + 3 * i));
    }
    const mmt::UmeyamaResult result = mmt::umeyama_align(src, dst);
    for (int i = 0; i < 9; ++i) out_rotation[i] = result.transform.rotation.m[i];
    put3(result.transform.translation, out_translation);
    if (out_rmse) *out_rmse = result.rmse;
  });
}

}  // extern "C"
