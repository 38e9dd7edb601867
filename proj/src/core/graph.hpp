#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/geometry.hpp"

namespace mmt {

/// Symmetric k-nearest-neighbor adjacency in CSR layout. Neighbor lists are
/// sorted ascending and self-loop free; the symmetry invariant is
/// j in N(i) <=> i in N(j), and |N(i)| never exceeds the build cap k.
struct NeighborGraph {
  std::vector<int64_t> offsets;    // size N+1
  std::vector<int64_t> neighbors;  // size offsets[N]
  int64_t cap = 0;                 // the k the graph was built with
  int64_t count = 0;               // N

  int64_t degree(int64_t i) const { return offsets[size_t(i) + 1] - offsets[size_t(i)]; }
  std::span<const int64_t> of(int64_t i) const {
    return {neighbors.data() + offsets[size_t(i)], size_t(degree(i))};
  }
  int64_t edge_count() const { return int64_t(neighbors.size()) / 2; }
};

/// Exact k-NN on the given positions, symmetrized by mutual selection:
/// the edge (i, j) survives only when each point ranks among the other's k
/// nearest. Mutuality is what keeps |N(i)| <= k after symmetrization — taking
/// the union instead could push high-degree hubs past the cap. Candidate
/// ranking ties break by ascending point index.
NeighborGraph build_graph(std::span<const Vec3> points, int64_t k);

/// Boundary points discovered by flood fill: indices sorted ascending plus
/// the seeds that were expanded.
struct BoundarySet {
  std::vector<int64_t> indices;
  std::vector<int64_t> seeds;

  int64_t size() const { return int64_t(indices.size()); }
  bool contains(int64_t i) const;
};

/// Breadth-first expansion from the seeds, up to `hops` edges deep, keeping
/// every visited point that has at least one neighbor carrying a different
/// component label. Seeds count as visited at depth zero.
BoundarySet flood_fill_boundary(const NeighborGraph& graph, std::span<const int32_t> labels,
                                std::span<const int64_t> seeds, int hops);

}  // namespace mmt
