#include "core/spat_prior.hpp"

#include <algorithm>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace mmt {

void SpatPrior::validate() const {
  if (frame_count < 2)
    throw Error(ErrorCode::InvalidArgument, "prior needs at least 2 frames");
  if (anchors.size() != components.size())
    throw Error(ErrorCode::DimensionMismatch, "anchor count does not match component count");
  for (size_t c = 0; c < components.size(); ++c) {
    if (int64_t(components[c].size()) != step_count())
      throw Error(ErrorCode::DimensionMismatch,
                  "component " + std::to_string(c) + " has " +
                      std::to_string(components[c].size()) + " steps, expected " +
                      std::to_string(step_count()));
    for (size_t t = 0; t < components[c].size(); ++t)
      if (!is_rotation(components[c][t].rotation))
        throw Error(ErrorCode::InvalidArgument, "component " + std::to_string(c) + " step " +
                                                    std::to_string(t) +
                                                    " rotation is not in SO(3)");
  }
}

SpatPrior build_prior(const TrajectorySet& trajs) {
  trajs.validate();
  const int32_t C = trajs.components();
  if (C == 0) throw Error(ErrorCode::EmptyForeground, "trajectory set has no components");
  const int64_t T = trajs.frame_count;

  // Member trajectories per component.
  std::vector<std::vector<int64_t>> members(static_cast<size_t>(C));
  for (int64_t k = 0; k < trajs.trajectory_count; ++k)
    members[size_t(trajs.labels[size_t(k)])].push_back(k);

  SpatPrior prior;
  prior.frame_count = T;
  prior.components.resize(size_t(C));
  prior.anchors.resize(size_t(C));

  for (int32_t c = 0; c < C; ++c) {
    const auto& ks = members[size_t(c)];
    if (int64_t(ks.size()) < 3)
      throw Error(ErrorCode::TooFewPoints, "component " + std::to_string(c) + " has only " +
                                               std::to_string(ks.size()) +
                                               " trajectories; the fit needs 3");

    Vec3 anchor;
    for (int64_t k : ks) anchor += trajs.at(k, 0);
    prior.anchors[size_t(c)] = anchor * (1.0 / double(ks.size()));

    auto& seq = prior.components[size_t(c)];
    seq.resize(size_t(T - 1));
    parallel_for(T - 1, [&](int64_t begin, int64_t end) {
      std::vector<Vec3> src(ks.size()), dst(ks.size());
      for (int64_t t = begin; t < end; ++t) {
        for (size_t m = 0; m < ks.size(); ++m) {
          src[m] = trajs.at(ks[m], t);
          dst[m] = trajs.at(ks[m], t + 1);
        }
        try {
          seq[size_t(t)] = umeyama_align(src, dst).transform;
        } catch (const Error& e) {
          throw Error(e.code(), "component " + std::to_string(c) + ", frames " +
                                    std::to_string(t) + "->" + std::to_string(t + 1) + ": " +
                                    e.what());
        }
      }
    }, 4);
  }

  prior.validate();
  return prior;
}

std::vector<std::vector<Vec3>> apply_prior(const SpatPrior& prior, std::span<const Vec3> points,
                                           std::span<const int32_t> labels, Alignment alignment) {
  prior.validate();
  const int64_t n = int64_t(points.size());
  if (int64_t(labels.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "label count does not match point count");
  const int32_t C = prior.component_count();
  for (int64_t i = 0; i < n; ++i)
    if (labels[size_t(i)] < 0 || labels[size_t(i)] >= C)
      throw Error(ErrorCode::LabelOutOfRange,
                  "point " + std::to_string(i) + " has label " +
                      std::to_string(labels[size_t(i)]) + " but the prior has " +
                      std::to_string(C) + " components");

  // Per-component offset from the stored anchor to where this point set
  // actually sits (first-frame component centroid). Each point is virtually
  // shifted onto the anchor, moved by the stored transforms, and shifted
  // back — the offset is fixed by frame 0 and reused for every step.
  std::vector<Vec3> offset(static_cast<size_t>(C));
  if (alignment == Alignment::Anchored) {
    std::vector<Vec3> centroid(static_cast<size_t>(C));
    std::vector<int64_t> count(size_t(C), 0);
    for (int64_t i = 0; i < n; ++i) {
      centroid[size_t(labels[size_t(i)])] += points[size_t(i)];
      ++count[size_t(labels[size_t(i)])];
    }
    for (int32_t c = 0; c < C; ++c)
      if (count[size_t(c)] > 0)
        offset[size_t(c)] =
            centroid[size_t(c)] * (1.0 / double(count[size_t(c)])) - prior.anchors[size_t(c)];
  }

  const int64_t T = prior.frame_count;
  std::vector<std::vector<Vec3>> frames(static_cast<size_t>(T));
  frames[0].assign(points.begin(), points.end());
  for (int64_t t = 0; t + 1 < T; ++t) {
    frames[size_t(t + 1)].resize(size_t(n));
    const auto& cur = frames[size_t(t)];
    auto& nxt = frames[size_t(t + 1)];
    parallel_for(n, [&](int64_t begin, int64_t end) {
      for (int64_t i = begin; i < end; ++i) {
        int32_t c = labels[size_t(i)];
        const RigidTransform& step = prior.components[size_t(c)][size_t(t)];
        const Vec3& off = offset[size_t(c)];
        nxt[size_t(i)] = step.apply(cur[size_t(i)] - off) + off;
      }
    });
  }
  return frames;
}

}  // namespace mmt
