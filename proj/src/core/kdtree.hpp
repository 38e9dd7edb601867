#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/geometry.hpp"

namespace mmt {

/// A neighbor candidate: squared distance first so ordering is (dist, index)
/// lexicographic — the tie-break every consumer relies on.
struct Neighbor {
  double dist_sq = 0.0;
  int64_t index = -1;

  bool operator<(const Neighbor& o) const {
    return dist_sq != o.dist_sq ? dist_sq < o.dist_sq : index < o.index;
  }
};

/// Static KD-tree over a point set. Exact k-nearest-neighbor queries with
/// deterministic results: candidates are ranked by (squared distance,
/// ascending index) and subtrees are pruned only when strictly farther than
/// the current worst, so equal-distance candidates are never lost.
class KdTree {
public:
  explicit KdTree(std::span<const Vec3> points);

  /// Up to k nearest points to `query`, sorted by (dist_sq, index).
  /// `exclude` (typically the query's own index) is skipped; pass -1 to keep all.
  std::vector<Neighbor> nearest(const Vec3& query, int64_t k, int64_t exclude = -1) const;

  int64_t size() const { return int64_t(points_.size()); }

private:
  struct Node {
    int axis = -1;        // -1 marks a leaf
    double split = 0.0;   // splitting coordinate
    int32_t left = -1, right = -1;
    int32_t begin = 0, end = 0;  // index range into order_ (leaves only)
  };

  int32_t build(int32_t begin, int32_t end);
  void search(int32_t node, const Vec3& query, int64_t k, int64_t exclude,
              std::vector<Neighbor>& heap) const;

  std::vector<Vec3> points_;
  std::vector<int64_t> order_;
  std::vector<Node> nodes_;
  int32_t root_ = -1;
};

}  // namespace mmt
