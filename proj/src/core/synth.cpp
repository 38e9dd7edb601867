#include "core/synth.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mmt {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

/// Displacement of the oscillation at frame t relative to frame 0.
Vec3 oscillation_offset(const MotionSpec& spec, int64_t t) {
  return spec.amplitude * std::sin(kTwoPi * spec.frequency * double(t));
}
}  // namespace

SynthesizedScene synthesize_scene(const MotionSpec& spec) {
  if (spec.frames < 2)
    throw Error(ErrorCode::InvalidSpec, "need at least 2 frames, got " +
                                            std::to_string(spec.frames));
  if (spec.component_count < 1)
    throw Error(ErrorCode::InvalidSpec, "component count must be >= 1");
  if (spec.points < 3 * spec.component_count)
    throw Error(ErrorCode::InvalidSpec,
                "need at least 3 points per component (" + std::to_string(spec.points) +
                    " points for " + std::to_string(spec.component_count) + " components)");
  for (int a = 0; a < 3; ++a)
    if (!(spec.box_lo[a] < spec.box_hi[a]))
      throw Error(ErrorCode::InvalidSpec, "sampling box is empty along axis " + std::to_string(a));
  if (spec.type == MotionType::Rotation && norm(spec.axis) <= 0.0)
    throw Error(ErrorCode::InvalidSpec, "rotation axis must be nonzero");

  const int64_t T = spec.frames;
  const int64_t K = spec.points;
  const int32_t C = spec.component_count;

  // Slice the box into C slabs along its longest axis; slab c = component c.
  Vec3 extent = spec.box_hi - spec.box_lo;
  int axis = 0;
  if (extent.y > extent[axis]) axis = 1;
  if (extent.z > extent[axis]) axis = 2;
  auto slab = [&](int32_t c) {
    Vec3 lo = spec.box_lo, hi = spec.box_hi;
    double width = extent[axis] / double(C);
    lo[axis] = spec.box_lo[axis] + width * double(c);
    hi[axis] = lo[axis] + width;
    return std::pair<Vec3, Vec3>{lo, hi};
  };

  // Even share of points per slab, remainder to the last (moving) one.
  std::vector<int64_t> share(size_t(C), K / C);
  share.back() += K % C;

  Rng rng(spec.seed);
  TrajectorySet trajs;
  trajs.trajectory_count = K;
  trajs.frame_count = T;
  trajs.positions.resize(size_t(K * T));
  trajs.labels.reserve(size_t(K));

  // The moving component's per-frame placement, as a world transform taking
  // frame-0 positions to frame-t positions.
  const auto [mlo, mhi] = slab(C - 1);
  const Vec3 pivot = (mlo + mhi) * 0.5;
  auto placement = [&](int64_t t) -> RigidTransform {
    switch (spec.type) {
      case MotionType::Translation:
        return {Mat3::identity(), spec.velocity * double(t)};
      case MotionType::Rotation: {
        Mat3 r = axis_angle_rotation(spec.axis, spec.radians_per_frame * double(t));
        return {r, pivot - r * pivot};  // spin about the slab center
      }
      case MotionType::Oscillation:
        return {Mat3::identity(), oscillation_offset(spec, t)};
    }
    throw Error(ErrorCode::InvalidSpec, "unknown motion type");
  };

  int64_t k = 0;
  for (int32_t c = 0; c < C; ++c) {
    const auto [lo, hi] = slab(c);
    const bool moves = (c == C - 1);
    for (int64_t s = 0; s < share[size_t(c)]; ++s, ++k) {
      Vec3 p = rng.in_box(lo, hi);
      trajs.labels.push_back(c);
      for (int64_t t = 0; t < T; ++t)
        trajs.at(k, t) = moves ? placement(t).apply(p) : p;
    }
  }

  // Ground truth: per-step transforms, i.e. placement(t+1) after undoing
  // placement(t).
  SynthesizedScene scene;
  scene.ground_truth.frame_count = T;
  scene.ground_truth.components.resize(size_t(C));
  scene.ground_truth.anchors.resize(size_t(C));
  for (int32_t c = 0; c < C; ++c) {
    auto& seq = scene.ground_truth.components[size_t(c)];
    seq.assign(size_t(T - 1), RigidTransform::identity());
    if (c == C - 1)
      for (int64_t t = 0; t + 1 < T; ++t)
        seq[size_t(t)] = compose(placement(t + 1), placement(t).inverse());
  }
  // Anchors are the first-frame component centroids, same as build_prior's.
  {
    std::vector<Vec3> sum(static_cast<size_t>(C));
    std::vector<int64_t> cnt(size_t(C), 0);
    for (int64_t i = 0; i < K; ++i) {
      sum[size_t(trajs.labels[size_t(i)])] += trajs.at(i, 0);
      ++cnt[size_t(trajs.labels[size_t(i)])];
    }
    for (int32_t c = 0; c < C; ++c)
      scene.ground_truth.anchors[size_t(c)] = sum[size_t(c)] * (1.0 / double(cnt[size_t(c)]));
  }

  scene.trajectories = std::move(trajs);
  scene.trajectories.validate();
  scene.ground_truth.validate();
  return scene;
}

}  // namespace mmt
