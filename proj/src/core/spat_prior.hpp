#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/geometry.hpp"
#include "core/trajectory.hpp"

namespace mmt {

/// The motion prior: per rigid component, the sequence of T-1 step transforms
/// (frame t -> t+1) plus the component's first-frame trajectory centroid,
/// which anchors the transforms when they are replayed somewhere else.
struct SpatPrior {
  std::vector<std::vector<RigidTransform>> components;  // C x (T-1)
  std::vector<Vec3> anchors;                            // C
  int64_t frame_count = 0;                              // T

  int32_t component_count() const { return int32_t(components.size()); }
  int64_t step_count() const { return frame_count - 1; }
  void validate() const;
};

/// Fits the prior from a trajectory set: one rigid transform per component per
/// consecutive frame pair. Fitting per pair (never chaining from frame 1)
/// keeps accumulated drift bounded by per-pair fit error. The fit uses the
/// component's tracked points but the resulting transform stands in for the
/// whole rigid region.
///
/// Alignment failures are rethrown with the component and frame pair attached.
SpatPrior build_prior(const TrajectorySet& trajs);

enum class Alignment {
  /// Re-anchor each component: the target's first-frame component centroid is
  /// shifted onto the stored anchor, the step transforms run there, and the
  /// result shifts back. Motion becomes independent of where the target sits.
  Anchored,
  /// Apply the stored transforms literally (position-dependent; debugging aid).
  Raw,
};

/// Rolls a labeled point set forward through the prior: frame 0 is the input,
/// frame t+1 applies each component's step-t transform. Returns T frames of
/// |points| positions.
std::vector<std::vector<Vec3>> apply_prior(const SpatPrior& prior, std::span<const Vec3> points,
                                           std::span<const int32_t> labels, Alignment alignment);

}  // namespace mmt
