#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/cloud.hpp"
#include "core/geometry.hpp"

namespace mmt {

/// 8-bit RGB image, row-major, 3 bytes per pixel.
struct Frame {
  int width = 0, height = 0;
  std::vector<uint8_t> rgb;

  size_t offset(int x, int y) const { return (size_t(y) * size_t(width) + size_t(x)) * 3; }
};

/// Per-frame cameras sharing one set of intrinsics and one resolution.
struct CameraPath {
  std::vector<CameraModel> cameras;

  int64_t size() const { return int64_t(cameras.size()); }
  /// Validates every camera and the constant-intrinsics/resolution invariant.
  void validate() const;
};

/// A camera path of `frames` copies of one camera placed to see every frame
/// of the motion: on the -z side of the union bounding box, 2.5 diagonals
/// from its center, looking along +z.
CameraPath default_camera_path(const std::vector<std::vector<Vec3>>& positions, int width,
                               int height);

/// Rasterizes each frame's positions as filled disks (screen radius
/// fx * radius / depth) with a per-pixel depth test; nearest point wins, depth
/// ties go to the lowest point index because later points must be strictly
/// nearer to overwrite. Points behind the camera are skipped. Colors and
/// radii come from the cloud; `background` is RGB in [0,1].
std::vector<Frame> render(const std::vector<std::vector<Vec3>>& positions,
                          const TargetCloud& cloud, const CameraPath& path,
                          const Vec3& background);

}  // namespace mmt
