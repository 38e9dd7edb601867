#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/cloud.hpp"
#include "core/spat_prior.hpp"

namespace mmt {

/// Per-point, per-step displacement vectors: v(s, i) moves point i from frame
/// s to frame s+1 (unit timestep, so velocity and displacement coincide).
/// Stored step-major: index s*point_count + i.
struct VelocityField {
  int64_t point_count = 0;  // N
  int64_t steps = 0;        // T-1
  std::vector<Vec3> v;      // steps * N

  int64_t frame_count() const { return steps + 1; }
  const Vec3& at(int64_t s, int64_t i) const { return v[size_t(s * point_count + i)]; }
  Vec3& at(int64_t s, int64_t i) { return v[size_t(s * point_count + i)]; }
  void validate() const;
};

/// Materializes the prior over the cloud: rolls the positions forward with
/// apply_prior (anchored) and stores the per-step differences, so integrating
/// the field reproduces those frames.
VelocityField compute_field(const SpatPrior& prior, const TargetCloud& cloud);

/// Euler integration: frame 0 = `positions`, frame s+1 = frame s + v(s, ·).
std::vector<std::vector<Vec3>> integrate(std::span<const Vec3> positions,
                                         const VelocityField& field);

/// Every velocity multiplied by `factor`; negative factors reverse the motion.
VelocityField scale_field(const VelocityField& field, double factor);

enum class ExtendMode {
  Loop,      // concatenate `repeats` copies
  PingPong,  // each cycle: forward copy, then time-reversed negated copy
};

/// Repeats the motion. PingPong alternates the field with its time-reversed
/// negation, so every cycle provably returns the integrated positions to
/// their start.
VelocityField extend_field(const VelocityField& field, int64_t repeats, ExtendMode mode);

}  // namespace mmt
