#include "core/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace mmt {

namespace {
constexpr int32_t kLeafSize = 16;
}

KdTree::KdTree(std::span<const Vec3> points)
    : points_(points.begin(), points.end()), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), int64_t(0));
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, int32_t(points_.size()));
  }
}

int32_t KdTree::build(int32_t begin, int32_t end) {
  int32_t id = int32_t(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  // Split on the widest axis at the median. Comparator falls back to the
  // point index, so the partition is unique regardless of duplicates.
  Vec3 lo = points_[size_t(order_[size_t(begin)])];
  Vec3 hi = lo;
  for (int32_t i = begin + 1; i < end; ++i) {
    const Vec3& p = points_[size_t(order_[size_t(i)])];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  Vec3 extent = hi - lo;
  int axis = 0;
  if (extent.y > extent[axis]) axis = 1;
  if (extent.z > extent[axis]) axis = 2;

  int32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int64_t a, int64_t b) {
                     double ca = points_[size_t(a)][axis], cb = points_[size_t(b)][axis];
                     return ca != cb ? ca < cb : a < b;
                   });

  Node n;
  n.axis = axis;
  n.split = points_[size_t(order_[size_t(mid)])][axis];
  int32_t left = build(begin, mid);
  int32_t right = build(mid, end);
  n.left = left;
  n.right = right;
  nodes_[id] = n;
  return id;
}

void KdTree::search(int32_t node, const Vec3& query, int64_t k, int64_t exclude,
                    std::vector<Neighbor>& heap) const {
  const Node& n = nodes_[size_t(node)];
  if (n.axis < 0) {
    for (int32_t i = n.begin; i < n.end; ++i) {
      int64_t idx = order_[size_t(i)];
      if (idx == exclude) continue;
      Neighbor cand{norm_sq(points_[size_t(idx)] - query), idx};
      if (int64_t(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }

  double delta = query[n.axis] - n.split;
  int32_t near = delta < 0.0 ? n.left : n.right;
  int32_t far = delta < 0.0 ? n.right : n.left;
  search(near, query, k, exclude, heap);
  // Equal plane distance may still hide an equal-distance, lower-index
  // candidate, so only a strictly greater bound prunes.
  if (int64_t(heap.size()) < k || delta * delta <= heap.front().dist_sq) {
    search(far, query, k, exclude, heap);
  }
}

std::vector<Neighbor> KdTree::nearest(const Vec3& query, int64_t k, int64_t exclude) const {
  std::vector<Neighbor> heap;
  if (k <= 0 || root_ < 0) return heap;
  heap.reserve(size_t(std::min<int64_t>(k, size())));
  search(root_, query, k, exclude, heap);
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

}  // namespace mmt
