// Release gate for the motion-transfer toolkit: ten numbered criteria, each
// printing exactly one PASS/FAIL line with its measured numbers. The binary
// exits 0 only when every criterion passes.
//
// Criteria 1-8 and 10 exercise the core library in-process; criterion 9
// drives the installed command-line binary (path passed as argv[1]) and
// checks its outputs byte for byte.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "core/cloud.hpp"
#include "core/error.hpp"
#include "core/geometry.hpp"
#include "core/graph.hpp"
#include "core/metrics.hpp"
#include "core/refine.hpp"
#include "core/render.hpp"
#include "core/spat_prior.hpp"
#include "core/synth.hpp"
#include "core/trajectory.hpp"
#include "core/velocity_field.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mmt;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buffer[512];
  std::vsnprintf(buffer, sizeof buffer, fmt, args);
  va_end(args);
  return buffer;
}

/* ---- shared fixtures -------------------------------------------------------- */

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 v;
  do {
    v = {gauss(rng), gauss(rng), gauss(rng)};
  } while (norm(v) < 1e-6);
  return normalized(v);
}

std::vector<Vec3> random_points(std::mt19937_64& rng, int64_t n, double extent = 1.0) {
  std::uniform_real_distribution<double> coord(-extent, extent);
  std::vector<Vec3> points(static_cast<size_t>(n));
  for (Vec3& p : points) p = {coord(rng), coord(rng), coord(rng)};
  return points;
}

std::vector<std::vector<Vec3>> frames_of(const TrajectorySet& trajs) {
  std::vector<std::vector<Vec3>> frames(static_cast<size_t>(trajs.frame_count));
  for (int64_t t = 0; t < trajs.frame_count; ++t) {
    frames[static_cast<size_t>(t)].resize(static_cast<size_t>(trajs.trajectory_count));
    for (int64_t k = 0; k < trajs.trajectory_count; ++k)
      frames[static_cast<size_t>(t)][static_cast<size_t>(k)] = trajs.at(k, t);
  }
  return frames;
}

// Target cloud over a trajectory set's first frame: mid-gray points whose
// radius is 1% of the first-frame extent, labels carried over.
TargetCloud cloud_over(const TrajectorySet& trajs) {
  TargetCloud cloud;
  cloud.positions.resize(static_cast<size_t>(trajs.trajectory_count));
  for (int64_t k = 0; k < trajs.trajectory_count; ++k)
    cloud.positions[static_cast<size_t>(k)] = trajs.at(k, 0);
  cloud.colors.assign(cloud.positions.size(), Vec3{0.5, 0.5, 0.5});
  cloud.labels = trajs.labels;
  const double radius = 0.01 * compute_aabb(cloud.positions).diagonal();
  cloud.radii.assign(cloud.positions.size(), radius);
  return cloud;
}

/* ---- criterion 1: rigid alignment exactness ---------------------------------- */

bool c1_alignment(std::string& detail) {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int64_t> size_dist(3, 500);
  std::uniform_real_distribution<double> angle_dist(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);

  double worst_residual = 0.0;
  double worst_det = 0.0;
  for (int iter = 0; iter < 1000; ++iter) {
    const int64_t n = size_dist(rng);
    const Mat3 r = axis_angle_rotation(random_unit(rng), angle_dist(rng));
    const Vec3 t{shift(rng), shift(rng), shift(rng)};
    const std::vector<Vec3> src = random_points(rng, n);
    std::vector<Vec3> dst(src.size());
    for (size_t i = 0; i < src.size(); ++i) dst[i] = r * src[i] + t;

    const UmeyamaResult fit = umeyama_align(src, dst);
    for (size_t i = 0; i < src.size(); ++i)
      worst_residual = std::max(worst_residual, norm(fit.transform.apply(src[i]) - dst[i]));
    worst_det = std::max(worst_det, std::abs(det(fit.transform.rotation) - 1.0));
  }

  // A mirrored tetrahedron drives the cross-covariance determinant negative;
  // the fit must still return a proper rotation.
  const std::vector<Vec3> tetra = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<Vec3> mirrored = tetra;
  for (Vec3& p : mirrored) p.x = -p.x;
  const UmeyamaResult reflected = umeyama_align(tetra, mirrored);
  const double reflected_det = det(reflected.transform.rotation);

  const double elapsed = seconds_since(start);
  const bool pass = worst_residual < 1e-9 && worst_det <= 1e-9 &&
                    std::abs(reflected_det - 1.0) <= 1e-9 && elapsed < 5.0;
  detail = format("max residual %.2e, max |det-1| %.2e, mirrored det %+.6f, %.2f s",
                  worst_residual, worst_det, reflected_det, elapsed);
  return pass;
}

/* ---- criterion 2: self-transfer fidelity -------------------------------------- */

MotionSpec scene_spec(MotionType type, uint64_t seed) {
  MotionSpec spec;
  spec.type = type;
  spec.frames = 10;
  spec.points = 300;
  spec.component_count = 2;
  spec.seed = seed;
  spec.velocity = {0.02, -0.013, 0.007};
  spec.axis = {0.3, -0.2, 0.93};
  spec.radians_per_frame = 4.0 * std::numbers::pi / 180.0;
  spec.amplitude = {0.12, 0.05, -0.08};
  spec.frequency = 0.13;
  return spec;
}

bool c2_self_transfer(std::string& detail) {
  const auto start = Clock::now();
  double worst_deviation = 0.0;
  double worst_psnr = 1e9;
  double worst_ssim = 1e9;

  const MotionType kinds[] = {MotionType::Translation, MotionType::Rotation,
                              MotionType::Oscillation};
  uint64_t seed = 21;
  for (MotionType kind : kinds) {
    const SynthesizedScene scene = synthesize_scene(scene_spec(kind, seed++));
    const TrajectorySet& trajs = scene.trajectories;
    const SpatPrior prior = build_prior(trajs);

    // Replaying the prior from the first frame must reproduce the recording.
    std::vector<Vec3> first(static_cast<size_t>(trajs.trajectory_count));
    for (int64_t k = 0; k < trajs.trajectory_count; ++k) first[static_cast<size_t>(k)] = trajs.at(k, 0);
    const auto replay = apply_prior(prior, first, trajs.labels, Alignment::Anchored);
    for (int64_t t = 0; t < trajs.frame_count; ++t)
      for (int64_t k = 0; k < trajs.trajectory_count; ++k)
        worst_deviation =
            std::max(worst_deviation,
                     norm(replay[static_cast<size_t>(t)][static_cast<size_t>(k)] - trajs.at(k, t)));

    // Rendered self-transfer against the rendered source, sharing one camera
    // path and one point appearance.
    const TargetCloud cloud = cloud_over(trajs);
    const auto source_frames = frames_of(trajs);
    const CameraPath path = default_camera_path(source_frames, 640, 480);
    const std::vector<Frame> reference = render(source_frames, cloud, path, {0, 0, 0});

    const VelocityField field = compute_field(prior, cloud);
    const auto moved = integrate(cloud.positions, field);
    const std::vector<Frame> transferred = render(moved, cloud, path, {0, 0, 0});

    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (size_t f = 0; f < reference.size(); ++f) {
      psnr_sum += psnr(transferred[f], reference[f]);
      ssim_sum += ssim(transferred[f], reference[f]);
    }
    worst_psnr = std::min(worst_psnr, psnr_sum / double(reference.size()));
    worst_ssim = std::min(worst_ssim, ssim_sum / double(reference.size()));
  }

  // Noisy rotation: per-step angles recovered from a jittered recording.
  MotionSpec noisy_spec = scene_spec(MotionType::Rotation, 29);
  noisy_spec.component_count = 1;
  SynthesizedScene noisy = synthesize_scene(noisy_spec);
  std::mt19937_64 rng(202);
  std::normal_distribution<double> jitter(0.0, 1e-3);
  for (Vec3& p : noisy.trajectories.positions) {
    p.x += jitter(rng);
    p.y += jitter(rng);
    p.z += jitter(rng);
  }
  const SpatPrior noisy_prior = build_prior(noisy.trajectories);
  double worst_angle_error = 0.0;
  for (const RigidTransform& step : noisy_prior.components[0])
    worst_angle_error = std::max(
        worst_angle_error, std::abs(rotation_angle(step.rotation) - noisy_spec.radians_per_frame));

  const double elapsed = seconds_since(start);
  const double angle_limit = 0.1 * std::numbers::pi / 180.0;
  const bool pass = worst_deviation < 1e-9 && worst_psnr >= 45.0 && worst_ssim >= 0.99 &&
                    worst_angle_error < angle_limit && elapsed < 30.0;
  detail = format("max deviation %.2e, min PSNR %.1f dB, min SSIM %.4f, "
                  "noisy angle error %.2e rad, %.2f s",
                  worst_deviation, worst_psnr, worst_ssim, worst_angle_error, elapsed);
  return pass;
}

/* ---- criterion 3: loss oracles -------------------------------------------------- */

double naive_kinematic(const VelocityField& field, const NeighborGraph& graph, int64_t s) {
  double sum = 0.0;
  for (int64_t i = 0; i < graph.count; ++i) {
    for (int64_t j : graph.of(i)) {
      sum += norm_sq(field.at(s, i) - field.at(s, j));
      if (s + 1 < field.steps) {
        const Vec3 ai = field.at(s + 1, i) - field.at(s, i);
        const Vec3 aj = field.at(s + 1, j) - field.at(s, j);
        sum += norm_sq(ai - aj);
      }
    }
  }
  return sum;
}

double naive_topological(const VelocityField& field, const BoundarySet& boundary,
                         const NeighborGraph& graph, int64_t s) {
  if (boundary.indices.empty()) return 0.0;
  double sum = 0.0;
  for (int64_t b : boundary.indices) {
    const auto neighbors = graph.of(b);
    if (neighbors.empty()) continue;
    Vec3 mean{0, 0, 0};
    for (int64_t j : neighbors) mean = mean + field.at(s, j);
    mean = mean / double(neighbors.size());
    sum += norm_sq(field.at(s, b) - mean);
  }
  return sum / double(boundary.indices.size());
}

bool c3_loss_oracles(std::string& detail) {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int64_t> size_dist(3, 200);
  std::uniform_int_distribution<int64_t> frame_dist(2, 10);
  std::uniform_int_distribution<int64_t> k_dist(2, 8);
  std::normal_distribution<double> vel(0.0, 0.1);

  double worst = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const int64_t n = size_dist(rng);
    const int64_t steps = frame_dist(rng) - 1;
    const auto points = random_points(rng, n);
    const NeighborGraph graph = build_graph(points, k_dist(rng));

    VelocityField field;
    field.point_count = n;
    field.steps = steps;
    field.v.resize(static_cast<size_t>(n * steps));
    for (Vec3& v : field.v) v = {vel(rng), vel(rng), vel(rng)};

    BoundarySet boundary;
    std::uniform_int_distribution<int64_t> pick(0, n - 1);
    for (int64_t c = 0; c < std::max<int64_t>(1, n / 4); ++c) boundary.indices.push_back(pick(rng));
    std::sort(boundary.indices.begin(), boundary.indices.end());
    boundary.indices.erase(std::unique(boundary.indices.begin(), boundary.indices.end()),
                           boundary.indices.end());

    for (int64_t s = 0; s < steps; ++s) {
      worst = std::max(worst, std::abs(kinematic_loss(field, graph, s) -
                                       naive_kinematic(field, graph, s)));
      worst = std::max(worst, std::abs(topological_loss(field, boundary, graph, s) -
                                       naive_topological(field, boundary, graph, s)));
    }
  }
  detail = format("max |library - oracle| %.2e over 100 instances", worst);
  return worst < 1e-9;
}

/* ---- criterion 4: refinement monotonicity ----------------------------------------- */

struct CorruptedInstance {
  TargetCloud cloud;
  NeighborGraph graph;
  BoundarySet boundary;
  VelocityField field;
};

CorruptedInstance make_corrupted(std::mt19937_64& rng) {
  std::uniform_int_distribution<int64_t> size_dist(50, 150);
  std::uniform_int_distribution<int64_t> frame_dist(4, 8);
  std::normal_distribution<double> noise(0.0, 0.05);

  CorruptedInstance inst;
  const int64_t n = size_dist(rng);
  inst.cloud.positions = random_points(rng, n);
  inst.cloud.colors.assign(static_cast<size_t>(n), Vec3{0.5, 0.5, 0.5});
  inst.cloud.radii.assign(static_cast<size_t>(n), 0.01);
  inst.cloud.labels.resize(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    inst.cloud.labels[static_cast<size_t>(i)] = inst.cloud.positions[static_cast<size_t>(i)].x > 0 ? 1 : 0;

  inst.graph = build_graph(inst.cloud.positions, 6);
  std::vector<int64_t> everything(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) everything[static_cast<size_t>(i)] = i;
  inst.boundary = flood_fill_boundary(inst.graph, inst.cloud.labels, everything, 1);

  const int64_t steps = frame_dist(rng) - 1;
  inst.field.point_count = n;
  inst.field.steps = steps;
  inst.field.v.resize(static_cast<size_t>(n * steps));
  const Vec3 per_component[2] = {{0.02, 0.0, 0.005}, {-0.01, 0.03, 0.0}};
  for (int64_t s = 0; s < steps; ++s)
    for (int64_t i = 0; i < n; ++i) {
      Vec3 v = per_component[inst.cloud.labels[static_cast<size_t>(i)]];
      v = v + Vec3{noise(rng), noise(rng), noise(rng)};
      inst.field.at(s, i) = v;
    }
  return inst;
}

bool c4_refinement(std::string& detail) {
  std::mt19937_64 rng(404);
  RefinementConfig config;  // omega 0.5, sweeps 5, both weights 1

  int halved = 0;
  bool monotone = true;
  double worst_ratio = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const CorruptedInstance inst = make_corrupted(rng);
    const RefineResult result = refine(inst.field, inst.graph, inst.boundary, config);
    const std::vector<double> totals = sweep_totals(result.trace);
    for (size_t i = 1; i < totals.size(); ++i)
      if (totals[i] > totals[i - 1] * (1.0 + 1e-12) + 1e-15) monotone = false;
    const double ratio = totals.back() / totals.front();
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio <= 0.5) ++halved;
  }

  // Point-order equivariance: refining a shuffled copy must give bitwise the
  // same velocities, relabeled.
  bool equivariant = true;
  for (int iter = 0; iter < 5 && equivariant; ++iter) {
    const CorruptedInstance inst = make_corrupted(rng);
    const int64_t n = inst.cloud.size();
    std::vector<int64_t> perm(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);

    TargetCloud shuffled = inst.cloud;
    VelocityField shuffled_field = inst.field;
    for (int64_t i = 0; i < n; ++i) {
      shuffled.positions[static_cast<size_t>(perm[static_cast<size_t>(i)])] =
          inst.cloud.positions[static_cast<size_t>(i)];
      shuffled.labels[static_cast<size_t>(perm[static_cast<size_t>(i)])] =
          inst.cloud.labels[static_cast<size_t>(i)];
      for (int64_t s = 0; s < inst.field.steps; ++s)
        shuffled_field.at(s, perm[static_cast<size_t>(i)]) = inst.field.at(s, i);
    }
    const NeighborGraph shuffled_graph = build_graph(shuffled.positions, 6);
    std::vector<int64_t> everything(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) everything[static_cast<size_t>(i)] = i;
    const BoundarySet shuffled_boundary =
        flood_fill_boundary(shuffled_graph, shuffled.labels, everything, 1);

    const RefineResult base = refine(inst.field, inst.graph, inst.boundary, config);
    const RefineResult moved = refine(shuffled_field, shuffled_graph, shuffled_boundary, config);
    for (int64_t s = 0; s < inst.field.steps && equivariant; ++s)
      for (int64_t i = 0; i < n; ++i) {
        const Vec3& a = base.field.at(s, i);
        const Vec3& b = moved.field.at(s, perm[static_cast<size_t>(i)]);
        if (a.x != b.x || a.y != b.y || a.z != b.z) {
          equivariant = false;
          break;
        }
      }
  }

  const bool pass = monotone && halved >= 90 && equivariant;
  detail = format("monotone %s, halved %d/100 (worst final/initial %.3f), "
                  "order-equivariant %s",
                  monotone ? "yes" : "NO", halved, worst_ratio, equivariant ? "yes" : "NO");
  return pass;
}

/* ---- criterion 5: neighbor-graph oracle --------------------------------------------- */

NeighborGraph brute_force_graph(const std::vector<Vec3>& points, int64_t k) {
  const int64_t n = int64_t(points.size());
  std::vector<std::vector<int64_t>> nearest(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, int64_t>> order;
    order.reserve(static_cast<size_t>(n - 1));
    for (int64_t j = 0; j < n; ++j)
      if (j != i)
        order.emplace_back(norm_sq(points[static_cast<size_t>(i)] - points[static_cast<size_t>(j)]), j);
    std::sort(order.begin(), order.end());
    const size_t keep = static_cast<size_t>(std::min<int64_t>(k, n - 1));
    nearest[static_cast<size_t>(i)].reserve(keep);
    for (size_t r = 0; r < keep; ++r) nearest[static_cast<size_t>(i)].push_back(order[r].second);
  }

  NeighborGraph graph;
  graph.count = n;
  graph.cap = k;
  graph.offsets.assign(static_cast<size_t>(n) + 1, 0);
  std::vector<std::vector<int64_t>> adjacency(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j : nearest[static_cast<size_t>(i)]) {
      const auto& back = nearest[static_cast<size_t>(j)];
      if (std::find(back.begin(), back.end(), i) != back.end())
        adjacency[static_cast<size_t>(i)].push_back(j);
    }
  for (int64_t i = 0; i < n; ++i) {
    std::sort(adjacency[static_cast<size_t>(i)].begin(), adjacency[static_cast<size_t>(i)].end());
    graph.offsets[static_cast<size_t>(i) + 1] =
        graph.offsets[static_cast<size_t>(i)] + int64_t(adjacency[static_cast<size_t>(i)].size());
    graph.neighbors.insert(graph.neighbors.end(), adjacency[static_cast<size_t>(i)].begin(),
                           adjacency[static_cast<size_t>(i)].end());
  }
  return graph;
}

bool c5_graph_oracle(std::string& detail) {
  std::mt19937_64 rng(505);
  const int64_t sizes[] = {2, 3, 4, 7, 16, 33, 64, 129, 257, 500};
  const int64_t caps[] = {1, 2, 3, 5, 8, 16, 2048};

  // Below two points there is no neighbor to rank; the library refuses.
  try {
    build_graph(random_points(rng, 1), 3);
    detail = "a single-point cloud should be rejected";
    return false;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TooFewPoints) {
      detail = format("single-point cloud raised the wrong error: %s", e.what());
      return false;
    }
  }

  int64_t compared = 0;
  for (int64_t n : sizes) {
    const auto points = random_points(rng, n);
    for (int64_t k : caps) {
      const NeighborGraph built = build_graph(points, k);
      const NeighborGraph brute = brute_force_graph(points, k);
      if (built.offsets != brute.offsets || built.neighbors != brute.neighbors) {
        detail = format("mismatch at N=%lld k=%lld", static_cast<long long>(n),
                        static_cast<long long>(k));
        return false;
      }
      ++compared;
    }
  }
  detail = format("%lld cloud/cap combinations identical to brute force (up to N=500, k=2048)",
                  static_cast<long long>(compared));
  return true;
}

/* ---- criterion 6: flood-fill oracle ---------------------------------------------------- */

std::vector<int64_t> brute_force_boundary(const NeighborGraph& graph,
                                          const std::vector<int32_t>& labels,
                                          const std::vector<int64_t>& seeds, int hops) {
  const int64_t n = graph.count;
  std::vector<int> depth(static_cast<size_t>(n), -1);
  std::vector<int64_t> frontier;
  for (int64_t s : seeds)
    if (depth[static_cast<size_t>(s)] < 0) {
      depth[static_cast<size_t>(s)] = 0;
      frontier.push_back(s);
    }
  for (int d = 0; d < hops && !frontier.empty(); ++d) {
    std::vector<int64_t> next;
    for (int64_t i : frontier)
      for (int64_t j : graph.of(i))
        if (depth[static_cast<size_t>(j)] < 0) {
          depth[static_cast<size_t>(j)] = d + 1;
          next.push_back(j);
        }
    frontier = std::move(next);
  }

  std::vector<int64_t> boundary;
  for (int64_t i = 0; i < n; ++i) {
    if (depth[static_cast<size_t>(i)] < 0) continue;
    for (int64_t j : graph.of(i))
      if (labels[static_cast<size_t>(j)] != labels[static_cast<size_t>(i)]) {
        boundary.push_back(i);
        break;
      }
  }
  return boundary;  // ascending by construction
}

bool c6_flood_fill(std::string& detail) {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int64_t> size_dist(2, 200);
  std::uniform_int_distribution<int64_t> k_dist(2, 6);
  std::uniform_int_distribution<int> comp_dist(1, 4);
  std::uniform_int_distribution<int> hop_dist(1, 4);

  for (int iter = 0; iter < 50; ++iter) {
    const int64_t n = size_dist(rng);
    const auto points = random_points(rng, n);
    const NeighborGraph graph = build_graph(points, k_dist(rng));

    const int components = comp_dist(rng);
    std::uniform_int_distribution<int32_t> label_dist(0, components - 1);
    std::vector<int32_t> labels(static_cast<size_t>(n));
    for (int32_t& l : labels) l = label_dist(rng);

    std::uniform_int_distribution<int64_t> seed_count_dist(0, std::min<int64_t>(5, n));
    std::uniform_int_distribution<int64_t> pick(0, n - 1);
    std::vector<int64_t> seeds(static_cast<size_t>(seed_count_dist(rng)));
    for (int64_t& s : seeds) s = pick(rng);

    const int hops = hop_dist(rng);
    const BoundarySet built = flood_fill_boundary(graph, labels, seeds, hops);
    const std::vector<int64_t> brute = brute_force_boundary(graph, labels, seeds, hops);
    if (built.indices != brute) {
      detail = format("mismatch at instance %d (N=%lld)", iter, static_cast<long long>(n));
      return false;
    }
  }
  detail = "boundary sets identical to brute-force scans on 50 labeled graphs";
  return true;
}

/* ---- criterion 7: playback control linearity --------------------------------------------- */

bool c7_control(std::string& detail) {
  MotionSpec spec = scene_spec(MotionType::Rotation, 77);
  spec.frames = 8;
  spec.points = 150;
  const SynthesizedScene scene = synthesize_scene(spec);
  const SpatPrior prior = build_prior(scene.trajectories);
  const TargetCloud cloud = cloud_over(scene.trajectories);
  const VelocityField field = compute_field(prior, cloud);

  const double factors[] = {-1.0, 0.0, 0.5, 2.0};
  for (double s : factors) {
    const VelocityField scaled = scale_field(field, s);
    for (int64_t step = 0; step < field.steps; ++step)
      for (int64_t i = 0; i < field.point_count; ++i) {
        const Vec3 expect = s * field.at(step, i);
        const Vec3& got = scaled.at(step, i);
        if (got.x != expect.x || got.y != expect.y || got.z != expect.z) {
          detail = format("scaled displacement differs at factor %g", s);
          return false;
        }
      }
  }

  const VelocityField bounce = extend_field(field, 1, ExtendMode::PingPong);
  const auto frames = integrate(cloud.positions, bounce);
  double worst_return = 0.0;
  for (int64_t i = 0; i < field.point_count; ++i)
    worst_return = std::max(
        worst_return, norm(frames.back()[static_cast<size_t>(i)] - cloud.positions[static_cast<size_t>(i)]));

  detail = format("displacements scale bitwise for s in {-1, 0, 0.5, 2}; "
                  "pingpong return gap %.2e",
                  worst_return);
  return worst_return < 1e-9;
}

/* ---- criterion 8: static propagation -------------------------------------------------------- */

bool c8_propagation(std::string& detail) {
  const RefinementConfig defaults;
  if (defaults.epsilon != 1e-5) {
    detail = format("default static threshold is %.3e, expected 1e-5", defaults.epsilon);
    return false;
  }

  // Three moving points near the origin, two still points beside them, and
  // one still point far away that the mutual-k=2 graph must leave isolated.
  TargetCloud cloud;
  cloud.positions = {{0, 0, 0},      {0.1, 0, 0},    {0, 0.1, 0},
                     {0.25, 0, 0},   {0.27, 0.1, 0}, {5, 5, 5}};
  const int64_t n = cloud.size();
  cloud.colors.assign(static_cast<size_t>(n), Vec3{0.5, 0.5, 0.5});
  cloud.labels.assign(static_cast<size_t>(n), 0);
  cloud.radii.assign(static_cast<size_t>(n), 0.01);
  const NeighborGraph graph = build_graph(cloud.positions, 2);
  if (graph.degree(5) != 0) {
    detail = "fixture error: far point is not isolated";
    return false;
  }

  VelocityField field;
  field.point_count = n;
  field.steps = 3;
  field.v.assign(static_cast<size_t>(n * field.steps), Vec3{0, 0, 0});
  for (int64_t s = 0; s < field.steps; ++s)
    for (int64_t i = 0; i < 3; ++i)
      field.at(s, i) = {0.01 * double(i + 1), 0.002 * double(s + 1), -0.004};

  // Global rule: every still point takes the steps' mean over moving points.
  const VelocityField global = propagate_static(field, cloud, graph, 1e-5, PropagateMode::Global);
  double worst_global = 0.0;
  for (int64_t s = 0; s < field.steps; ++s) {
    const Vec3 mean = (field.at(s, 0) + field.at(s, 1) + field.at(s, 2)) / 3.0;
    for (int64_t i = 3; i < n; ++i) worst_global = std::max(worst_global, norm(global.at(s, i) - mean));
    for (int64_t i = 0; i < 3; ++i)
      if (norm(global.at(s, i) - field.at(s, i)) != 0.0) {
        detail = "global propagation altered a moving point";
        return false;
      }
  }

  // Neighborhood rule: still points take their moving neighbors' mean; the
  // isolated one must stay exactly still.
  const VelocityField local =
      propagate_static(field, cloud, graph, 1e-5, PropagateMode::Neighborhood);
  double worst_local = 0.0;
  for (int64_t s = 0; s < field.steps; ++s) {
    for (int64_t i = 3; i < 5; ++i) {
      Vec3 mean{0, 0, 0};
      int64_t moving = 0;
      for (int64_t j : graph.of(i))
        if (norm(field.at(s, j)) >= 1e-5) {
          mean = mean + field.at(s, j);
          ++moving;
        }
      const Vec3 expect = moving > 0 ? mean / double(moving) : field.at(s, i);
      worst_local = std::max(worst_local, norm(local.at(s, i) - expect));
    }
    const Vec3& isolated = local.at(s, 5);
    if (isolated.x != 0.0 || isolated.y != 0.0 || isolated.z != 0.0) {
      detail = "neighborhood propagation moved the isolated still point";
      return false;
    }
  }

  detail = format("global mean-rule gap %.2e, neighborhood gap %.2e, isolated point untouched",
                  worst_global, worst_local);
  return worst_global <= 1e-12 && worst_local <= 1e-12;
}

/* ---- criterion 9: end-to-end determinism ------------------------------------------------------ */

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    files[fs::relative(entry.path(), root).string()] = std::move(bytes);
  }
  return files;
}

bool c9_determinism(const std::string& cli, std::string& detail) {
  if (cli.empty()) {
    detail = "no CLI binary path supplied";
    return false;
  }
  const fs::path base = fs::temp_directory_path() / "mmt_acceptance_determinism";
  fs::remove_all(base);

  auto pipeline = [&](const std::string& name, const std::string& threads) -> bool {
    const fs::path dir = base / name;
    fs::create_directories(dir);
    const std::string scene = (dir / "scene.mmtj").string();
    const std::string truth = (dir / "truth.mmsp").string();
    const std::string fitted = (dir / "fitted.mmsp").string();
    const std::string out = (dir / "out").string();
    const std::string quiet = " >/dev/null 2>&1";
    const std::string t = threads.empty() ? "" : " --threads " + threads;
    if (run_command("'" + cli + "' synth --motion rotation --deg-per-frame 3 --frames 6"
                    " --points 120 --components 2 --seed 5 --trajectories '" +
                    scene + "' --prior '" + truth + "'" + t + quiet) != 0)
      return false;
    if (run_command("'" + cli + "' extract --trajectories '" + scene + "' --prior '" + fitted +
                    "'" + t + quiet) != 0)
      return false;
    return run_command("'" + cli + "' transfer --prior '" + fitted + "' --trajectories '" + scene +
                       "' --output '" + out + "'" + t + quiet) == 0;
  };

  if (!pipeline("a", "") || !pipeline("b", "") || !pipeline("c", "1") || !pipeline("d", "4")) {
    detail = "a pipeline run failed";
    fs::remove_all(base);
    return false;
  }

  const auto a = read_tree(base / "a");
  const bool rerun_same = a == read_tree(base / "b");
  const bool one_thread_same = a == read_tree(base / "c");
  const bool four_threads_same = a == read_tree(base / "d");
  fs::remove_all(base);

  detail = format("%zu files; re-run %s, --threads 1 %s, --threads 4 %s", a.size(),
                  rerun_same ? "identical" : "DIFFERS", one_thread_same ? "identical" : "DIFFERS",
                  four_threads_same ? "identical" : "DIFFERS");
  return !a.empty() && rerun_same && one_thread_same && four_threads_same;
}

/* ---- criterion 10: throughput --------------------------------------------------------------- */

bool c10_throughput(std::string& detail) {
  MotionSpec spec;
  spec.type = MotionType::Rotation;
  spec.axis = {0, 0, 1};
  spec.radians_per_frame = 2.0 * std::numbers::pi / 180.0;
  spec.frames = 50;
  spec.points = 50000;
  spec.component_count = 2;
  spec.seed = 99;
  const SynthesizedScene scene = synthesize_scene(spec);
  const SpatPrior prior = build_prior(scene.trajectories);
  const TargetCloud cloud = cloud_over(scene.trajectories);

  const auto start = Clock::now();
  const NeighborGraph graph = build_graph(cloud.positions, 32);
  const VelocityField field = compute_field(prior, cloud);
  const RefineResult refined = refine(field, graph, BoundarySet{}, RefinementConfig{});
  const VelocityField final_field =
      propagate_static(refined.field, cloud, graph, 1e-5, PropagateMode::Neighborhood);
  const auto moved = integrate(cloud.positions, final_field);
  const CameraPath path = default_camera_path(moved, 640, 480);
  const std::vector<Frame> frames = render(moved, cloud, path, {0, 0, 0});
  const double elapsed = seconds_since(start);

  detail = format("50k points, 50 frames through graph+field+refine+propagate+render "
                  "in %.1f s (limit 120)",
                  elapsed);
  return frames.size() == 50 && elapsed < 120.0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";

  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "rigid alignment exactness", c1_alignment},
      {2, "self-transfer fidelity", c2_self_transfer},
      {3, "loss oracle equivalence", c3_loss_oracles},
      {4, "refinement monotonicity", c4_refinement},
      {5, "neighbor-graph oracle", c5_graph_oracle},
      {6, "flood-fill oracle", c6_flood_fill},
      {7, "playback control linearity", c7_control},
      {8, "static propagation", c8_propagation},
      {9, "end-to-end determinism", [&cli](std::string& d) { return c9_determinism(cli, d); }},
      {10, "throughput", c10_throughput},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    std::string detail;
    bool pass = false;
    try {
      pass = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!pass) ++failures;
    std::printf("criterion %2d %s  %-28s %s\n", criterion.id, pass ? "PASS" : "FAIL",
                criterion.name, detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/10 passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
