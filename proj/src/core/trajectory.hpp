#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace mmt {

/// 2D point tracks: K tracks over T frames with per-sample visibility.
/// Sample (k, t) lives at index k*T + t (track-major).
struct Track2DSet {
  int64_t track_count = 0;  // K
  int64_t frame_count = 0;  // T
  std::vector<double> u, v;
  std::vector<uint8_t> visible;

  int64_t at(int64_t k, int64_t t) const { return k * frame_count + t; }
  void validate() const;
};

/// Metric depth, row-major, meters.
struct DepthMap {
  int width = 0, height = 0;
  std::vector<double> depth;

  double at(int x, int y) const { return depth[size_t(y) * size_t(width) + size_t(x)]; }
  /// Bilinear sample at sub-pixel (u, v); u in [0, width-1], v in [0, height-1].
  double sample(double u, double v) const;
};

/// Binary foreground mask, row-major, 1 = foreground.
struct MaskMap {
  int width = 0, height = 0;
  std::vector<uint8_t> data;

  bool at(int x, int y) const { return data[size_t(y) * size_t(width) + size_t(x)] != 0; }
  bool inside(double u, double v) const;  // nearest-pixel lookup, false off-frame
};

using DepthMapSequence = std::vector<DepthMap>;
using MaskSequence = std::vector<MaskMap>;

/// K trajectories of T world-space positions each, with a per-trajectory
/// rigid-component label. Position (k, t) lives at index k*T + t
/// (trajectory-major, the on-disk payload order).
struct TrajectorySet {
  int64_t trajectory_count = 0;  // K
  int64_t frame_count = 0;       // T
  std::vector<Vec3> positions;   // K*T
  std::vector<int32_t> labels;   // K

  // Provenance carried into the trajectory file's manifest.
  double scale = 1.0;        // normalization factor (original = stored * scale)
  std::string source = "full";  // "full" or "masked"

  const Vec3& at(int64_t k, int64_t t) const { return positions[size_t(k * frame_count + t)]; }
  Vec3& at(int64_t k, int64_t t) { return positions[size_t(k * frame_count + t)]; }
  int32_t components() const;

  /// Sizes, finiteness, label range, T >= 2. Label density is not enforced
  /// here — masking may legitimately empty a component; prior construction
  /// rejects that case with the component attached.
  void validate() const;
};

/// Lifts 2D tracks into world-space trajectories: for every visible sample,
/// depth is sampled bilinearly at the track position and the pixel is
/// unprojected through that frame's camera. Invisible samples are filled by
/// linear interpolation between the neighboring visible frames (clamped at
/// the sequence ends). All lifted trajectories carry label 0; component
/// structure comes from the trajectory file or the synthesizer.
TrajectorySet lift_tracks(const Track2DSet& tracks, const DepthMapSequence& depths,
                          std::span<const CameraModel> cameras);

struct MaskResult {
  TrajectorySet kept;
  int64_t dropped = 0;
  std::vector<std::string> warnings;
};

/// Keeps a trajectory iff some length-`window` run of frames has its
/// projection inside the foreground mask for a strict majority of the run
/// (window 1 = any single frame). Kept trajectories are untouched — whole
/// trajectories in, whole trajectories out. Projections that fall off-frame
/// or behind the camera count as outside.
MaskResult mask_trajectories(const TrajectorySet& trajs, const MaskSequence& masks,
                             std::span<const CameraModel> cameras, int window);

/// Scales all positions so the first-frame bounding-box diagonal is 1.
/// Returns the diagonal (original = normalized * scale); records it on the set.
double normalize_trajectories(TrajectorySet& trajs);

}  // namespace mmt
