#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/graph.hpp"

namespace mmt {

/// Target object as a colored, labeled point set. Colors in [0,1] per channel;
/// labels dense in [0, C); radii in scene units. All arrays share size N.
struct TargetCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;
  std::vector<int32_t> labels;
  std::vector<double> radii;

  int64_t size() const { return int64_t(positions.size()); }
  int32_t components() const;

  /// Checks array sizes, finiteness, label density, positive radii.
  void validate() const;
};

struct CloudLoadResult {
  TargetCloud cloud;
  /// One entry per skipped vertex property the reader does not model.
  std::vector<std::string> warnings;
};

/// Reads a PLY point cloud, ascii or binary little-endian. Vertex properties
/// x,y,z are required; red,green,blue, label and radius are picked up when
/// present. Defaults: mid-gray color, label 0, radius = 1% of the bounding-box
/// diagonal. Unknown vertex properties are skipped with a warning.
CloudLoadResult load_cloud(const std::string& path);

/// Writes x,y,z (double), red,green,blue (uchar), label (int), radius (double)
/// so that a load of the written file reproduces the cloud exactly.
void save_cloud(const TargetCloud& cloud, const std::string& path, bool binary);

struct NormalizeResult {
  /// Denormalization: original = normalized * scale + offset.
  double scale = 1.0;
  Vec3 offset;
};

/// Centers the centroid at the origin and scales the bounding-box diagonal to
/// one, radii included. Returns the inverse mapping.
NormalizeResult normalize_cloud(TargetCloud& cloud);

/// Overwrites the per-point labels verbatim (must be dense in [0, C)).
void assign_labels(TargetCloud& cloud, std::span<const int32_t> labels);

/// A labeling seed: the component that point `index` belongs to.
struct LabelSeed {
  int64_t index = 0;
  int32_t label = 0;
};

/// Labels every point with the component of its geodesically nearest seed,
/// where distance runs along the k-NN graph edges (Euclidean edge lengths).
/// Graph distance rather than straight-line distance keeps thin adjacent
/// parts separable. Points unreachable from every seed are an error.
void assign_labels_by_seeds(TargetCloud& cloud, const NeighborGraph& graph,
                            std::span<const LabelSeed> seeds);

}  // namespace mmt
