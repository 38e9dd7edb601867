#include "core/graph.hpp"

#include <algorithm>
#include <queue>

#include "core/error.hpp"
#include "core/kdtree.hpp"
#include "core/parallel.hpp"

namespace mmt {

NeighborGraph build_graph(std::span<const Vec3> points, int64_t k) {
  const int64_t n = int64_t(points.size());
  if (n == 0) throw Error(ErrorCode::EmptyCloud, "cannot build a neighbor graph on zero points");
  if (n < 2) throw Error(ErrorCode::TooFewPoints, "neighbor graph needs at least 2 points");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "neighbor cap k must be >= 1");

  KdTree tree(points);

  // Per-point candidate lists, sorted ascending by index for the mutuality
  // lookups below.
  std::vector<std::vector<int64_t>> knn(static_cast<size_t>(n));
  parallel_for(n, [&](int64_t begin, int64_t end) {
    for (int64_t i = begin; i < end; ++i) {
      auto found = tree.nearest(points[size_t(i)], k, i);
      auto& list = knn[size_t(i)];
      list.reserve(found.size());
      for (const auto& nb : found) list.push_back(nb.index);
      std::sort(list.begin(), list.end());
    }
  });

  NeighborGraph g;
  g.cap = k;
  g.count = n;
  g.offsets.assign(size_t(n) + 1, 0);

  auto mutual = [&](int64_t i, int64_t j) {
    const auto& lj = knn[size_t(j)];
    return std::binary_search(lj.begin(), lj.end(), i);
  };

  for (int64_t i = 0; i < n; ++i) {
    int64_t deg = 0;
    for (int64_t j : knn[size_t(i)])
      if (mutual(i, j)) ++deg;
    g.offsets[size_t(i) + 1] = g.offsets[size_t(i)] + deg;
  }
  g.neighbors.resize(size_t(g.offsets[size_t(n)]));
  parallel_for(n, [&](int64_t begin, int64_t end) {
    for (int64_t i = begin; i < end; ++i) {
      int64_t at = g.offsets[size_t(i)];
      for (int64_t j : knn[size_t(i)])
        if (mutual(i, j)) g.neighbors[size_t(at++)] = j;
    }
  });
  return g;
}

bool BoundarySet::contains(int64_t i) const {
  return std::binary_search(indices.begin(), indices.end(), i);
}

BoundarySet flood_fill_boundary(const NeighborGraph& graph, std::span<const int32_t> labels,
                                std::span<const int64_t> seeds, int hops) {
  const int64_t n = graph.count;
  if (int64_t(labels.size()) != n)
    throw Error(ErrorCode::DimensionMismatch,
                "label count " + std::to_string(labels.size()) + " does not match graph size " +
                    std::to_string(n));
  if (hops < 1) throw Error(ErrorCode::InvalidArgument, "flood fill needs hops >= 1");
  for (int64_t s : seeds)
    if (s < 0 || s >= n)
      throw Error(ErrorCode::InvalidSeed, "seed index " + std::to_string(s) + " out of range");

  // Multi-source BFS; depth[i] = hops from the nearest seed.
  std::vector<int> depth(size_t(n), -1);
  std::queue<int64_t> frontier;
  for (int64_t s : seeds) {
    if (depth[size_t(s)] == 0) continue;  // duplicate seed
    depth[size_t(s)] = 0;
    frontier.push(s);
  }
  std::vector<int64_t> visited;
  while (!frontier.empty()) {
    int64_t i = frontier.front();
    frontier.pop();
    visited.push_back(i);
    if (depth[size_t(i)] >= hops) continue;
    for (int64_t j : graph.of(i)) {
      if (depth[size_t(j)] >= 0) continue;
      depth[size_t(j)] = depth[size_t(i)] + 1;
      frontier.push(j);
    }
  }

  BoundarySet out;
  out.seeds.assign(seeds.begin(), seeds.end());
  for (int64_t i : visited) {
    for (int64_t j : graph.of(i)) {
      if (labels[size_t(j)] != labels[size_t(i)]) {
        out.indices.push_back(i);
        break;
      }
    }
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

}  // namespace mmt
