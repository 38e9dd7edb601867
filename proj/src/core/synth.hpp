#pragma once

#include <cstdint>

#include "core/spat_prior.hpp"
#include "core/trajectory.hpp"

namespace mmt {

enum class MotionType { Translation, Rotation, Oscillation };

/// Recipe for a synthetic scene with exactly known motion.
struct MotionSpec {
  MotionType type = MotionType::Translation;

  Vec3 velocity{0.01, 0.0, 0.0};      // translation: displacement per frame
  Vec3 axis{0.0, 0.0, 1.0};           // rotation axis (normalized internally)
  double radians_per_frame = 0.0;     // rotation rate
  Vec3 amplitude{0.1, 0.0, 0.0};      // oscillation: x(t) = A * sin(2*pi*f*t)
  double frequency = 0.1;             // oscillation cycles per frame

  int64_t frames = 10;                // T
  int64_t points = 300;               // K
  Vec3 box_lo{-0.5, -0.5, -0.5};      // sampling region
  Vec3 box_hi{0.5, 0.5, 0.5};
  int32_t component_count = 1;        // last component moves, the rest are static
  uint64_t seed = 1234;
};

struct SynthesizedScene {
  TrajectorySet trajectories;
  SpatPrior ground_truth;
};

/// Samples `points` positions uniformly in the box and moves them by an
/// exactly rigid motion, returning both the trajectories and the true
/// per-step transform sequence they obey. With C > 1 components the box is
/// sliced into C slabs along its longest axis; only the last slab moves
/// (a static body plus one moving part), and each slab gets an equal share
/// of the points. Rotation spins about the moving slab's center.
SynthesizedScene synthesize_scene(const MotionSpec& spec);

}  // namespace mmt
