#include "core/refine.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace mmt {

void RefinementConfig::validate() const {
  if (lambda_topo < 0.0 || lambda_kin < 0.0)
    throw Error(ErrorCode::InvalidArgument, "loss weights must be non-negative");
  if (sweeps < 0) throw Error(ErrorCode::InvalidArgument, "sweep count must be non-negative");
  if (!(omega > 0.0 && omega <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "damping must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
}

namespace {

void check_step(const VelocityField& field, int64_t s) {
  if (s < 0 || s >= field.steps)
    throw Error(ErrorCode::IndexOutOfRange, "step " + std::to_string(s) +
                                                " outside [0, " + std::to_string(field.steps) +
                                                ")");
}

void check_graph(const VelocityField& field, const NeighborGraph& graph) {
  if (graph.count != field.point_count)
    throw Error(ErrorCode::DimensionMismatch,
                "graph covers " + std::to_string(graph.count) + " points, field has " +
                    std::to_string(field.point_count));
}

}  // namespace

double kinematic_loss(const VelocityField& field, const NeighborGraph& graph, int64_t s) {
  check_step(field, s);
  check_graph(field, graph);
  const bool with_accel = s + 1 < field.steps;
  return parallel_sum(field.point_count, [&](int64_t begin, int64_t end) {
    double acc = 0.0;
    for (int64_t i = begin; i < end; ++i) {
      const Vec3 vi = field.at(s, i);
      const Vec3 ai = with_accel ? field.at(s + 1, i) - vi : Vec3{};
      for (int64_t j : graph.of(i)) {
        acc += norm_sq(vi - field.at(s, j));
        if (with_accel) acc += norm_sq(ai - (field.at(s + 1, j) - field.at(s, j)));
      }
    }
    return acc;
  });
}

double topological_loss(const VelocityField& field, const BoundarySet& boundary,
                        const NeighborGraph& graph, int64_t s) {
  check_step(field, s);
  check_graph(field, graph);
  const int64_t m = boundary.size();
  if (m == 0) return 0.0;
  double acc = parallel_sum(m, [&](int64_t begin, int64_t end) {
    double part = 0.0;
    for (int64_t b = begin; b < end; ++b) {
      int64_t i = boundary.indices[size_t(b)];
      if (i < 0 || i >= field.point_count)
        throw Error(ErrorCode::IndexOutOfRange,
                    "boundary index " + std::to_string(i) + " out of range");
      auto nbrs = graph.of(i);
      if (nbrs.empty()) continue;
      Vec3 mean;
      for (int64_t j : nbrs) mean += field.at(s, j);
      mean *= 1.0 / double(nbrs.size());
      part += norm_sq(field.at(s, i) - mean);
    }
    return part;
  });
  return acc / double(m);
}

std::vector<double> sweep_totals(const std::vector<LossTraceRow>& trace) {
  std::vector<double> totals;
  for (const auto& row : trace) {
    if (size_t(row.sweep) >= totals.size()) totals.resize(size_t(row.sweep) + 1, 0.0);
    totals[size_t(row.sweep)] += row.total;
  }
  return totals;
}

RefineResult refine(const VelocityField& field, const NeighborGraph& graph,
                    const BoundarySet& boundary, const RefinementConfig& config) {
  field.validate();
  check_graph(field, graph);
  config.validate();
  for (int64_t i : boundary.indices)
    if (i < 0 || i >= field.point_count)
      throw Error(ErrorCode::DimensionMismatch,
                  "boundary index " + std::to_string(i) + " does not fit the field");

  const int64_t n = field.point_count;
  const int64_t steps = field.steps;
  const int64_t m = boundary.size();
  // In the per-coordinate gradient every kinematic edge term appears twice
  // (once from each endpoint's neighbor list) while a boundary term appears
  // once, so the boundary weight is halved relative to the loss definition.
  const double topo_w = m > 0 ? config.lambda_topo / (2.0 * double(m)) : 0.0;

  std::vector<char> on_boundary(size_t(n), 0);
  for (int64_t i : boundary.indices) on_boundary[size_t(i)] = 1;

  RefineResult result;
  result.field = field;

  auto record = [&](int64_t sweep) {
    for (int64_t s = 0; s < steps; ++s) {
      LossTraceRow row;
      row.sweep = sweep;
      row.step = s;
      row.kinematic = kinematic_loss(result.field, graph, s);
      row.topological = topological_loss(result.field, boundary, graph, s);
      row.total = config.lambda_kin * row.kinematic + config.lambda_topo * row.topological;
      result.trace.push_back(row);
    }
  };
  record(0);

  if (config.sweeps == 0 || (config.lambda_kin == 0.0 && config.lambda_topo == 0.0))
    return result;

  // Per-sweep scratch: neighbor sums NS(s, i) = sum of v(s, j) over j in N(i),
  // which make each point's closed-form target O(1).
  std::vector<Vec3> nsum(size_t(steps * n));
  VelocityField next = result.field;

  // Neighbor velocities are summed in value order, not index order: relabeling
  // the points permutes each neighbor list, and index-order summation would
  // round differently. Sorting the summands keeps the refined field exactly
  // permutation-equivariant (equal values commute exactly, so ties are safe).
  auto lex_less = [](const Vec3& a, const Vec3& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
  };

  // v(s,i) also sits inside the neighbor means of adjacent boundary points;
  // that quadratic coupling contributes sum(1/deg(j)^2) over boundary
  // neighbors j to the point's diagonal. Field-independent, so built once
  // (in sorted order, same equivariance argument as above).
  std::vector<double> topo_diag(size_t(n), 0.0);
  if (topo_w > 0.0) {
    parallel_for(n, [&](int64_t begin, int64_t end) {
      std::vector<double> terms;
      for (int64_t i = begin; i < end; ++i) {
        terms.clear();
        for (int64_t j : graph.of(i))
          if (on_boundary[size_t(j)]) {
            double kj = double(graph.degree(j));
            terms.push_back(1.0 / (kj * kj));
          }
        std::sort(terms.begin(), terms.end());
        double acc = 0.0;
        for (double t : terms) acc += t;
        topo_diag[size_t(i)] = acc;
      }
    });
  }

  for (int64_t sweep = 1; sweep <= config.sweeps; ++sweep) {
    const VelocityField& cur = result.field;

    parallel_for(steps * n, [&](int64_t begin, int64_t end) {
      std::vector<Vec3> vals;
      for (int64_t x = begin; x < end; ++x) {
        int64_t s = x / n, i = x % n;
        auto nbrs = graph.of(i);
        vals.assign(nbrs.size(), Vec3{});
        for (size_t a = 0; a < nbrs.size(); ++a) vals[a] = cur.at(s, nbrs[a]);
        std::sort(vals.begin(), vals.end(), lex_less);
        Vec3 sum;
        for (const Vec3& v : vals) sum += v;
        nsum[size_t(x)] = sum;
      }
    });

    parallel_for(steps * n, [&](int64_t begin, int64_t end) {
      std::vector<Vec3> tvals;
      for (int64_t x = begin; x < end; ++x) {
        int64_t s = x / n, i = x % n;
        const double k = double(graph.degree(i));
        if (k == 0.0) {  // no neighbors: no energy terms, nothing to move toward
          next.at(s, i) = cur.at(s, i);
          continue;
        }
        const bool fwd = s + 1 < steps;  // a(s) exists
        const bool bwd = s > 0;          // a(s-1) exists
        const Vec3& ns = nsum[size_t(s * n + i)];

        // Exact minimizer of the energy over v(s,i) with everything else held
        // at the previous sweep. The velocity term pulls toward the neighbor
        // mean; each acceleration term pulls toward the value matching this
        // point's temporal difference to the neighbors' accelerations; the
        // boundary terms pull via the point's own neighbor mean and via the
        // means of adjacent boundary points it participates in. Exactness
        // matters: it is what makes every damped sweep a descent step.
        Vec3 numer = ns;
        double denom = k;
        if (fwd) {
          numer += cur.at(s + 1, i) * k - nsum[size_t((s + 1) * n + i)] + ns;
          denom += k;
        }
        if (bwd) {
          numer += cur.at(s - 1, i) * k + ns - nsum[size_t((s - 1) * n + i)];
          denom += k;
        }
        numer *= config.lambda_kin;
        denom *= config.lambda_kin;
        if (topo_w > 0.0) {
          if (on_boundary[size_t(i)]) {
            numer += ns * (topo_w / k);
            denom += topo_w;
          }
          if (topo_diag[size_t(i)] > 0.0) {
            tvals.clear();
            for (int64_t j : graph.of(i)) {
              if (!on_boundary[size_t(j)]) continue;
              double kj = double(graph.degree(j));
              Vec3 rest = cur.at(s, j) - (nsum[size_t(s * n + j)] - cur.at(s, i)) / kj;
              tvals.push_back(rest / kj);
            }
            std::sort(tvals.begin(), tvals.end(), lex_less);
            Vec3 tsum;
            for (const Vec3& t : tvals) tsum += t;
            numer += tsum * topo_w;
            denom += topo_w * topo_diag[size_t(i)];
          }
        }
        if (denom <= 0.0) {  // both weights zero for this point
          next.at(s, i) = cur.at(s, i);
          continue;
        }
        Vec3 target = numer / denom;
        next.at(s, i) = cur.at(s, i) * (1.0 - config.omega) + target * config.omega;
      }
    });

    std::swap(result.field.v, next.v);
    record(sweep);
  }
  return result;
}

VelocityField propagate_static(const VelocityField& field, const TargetCloud& cloud,
                               const NeighborGraph& graph, double epsilon, PropagateMode mode) {
  field.validate();
  check_graph(field, graph);
  if (cloud.size() != field.point_count)
    throw Error(ErrorCode::DimensionMismatch,
                "cloud has " + std::to_string(cloud.size()) + " points, field has " +
                    std::to_string(field.point_count));
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");

  const int64_t n = field.point_count;
  VelocityField out = field;
  std::vector<char> dynamic(static_cast<size_t>(n));

  for (int64_t s = 0; s < field.steps; ++s) {
    Vec3 mean;
    int64_t dynamic_count = 0;
    for (int64_t i = 0; i < n; ++i) {
      bool dyn = norm(field.at(s, i)) >= epsilon;
      dynamic[size_t(i)] = dyn ? 1 : 0;
      if (dyn) {
        mean += field.at(s, i);
        ++dynamic_count;
      }
    }
    if (dynamic_count == 0) continue;  // nothing to propagate from

    if (mode == PropagateMode::Global) {
      mean *= 1.0 / double(dynamic_count);
      for (int64_t i = 0; i < n; ++i)
        if (!dynamic[size_t(i)]) out.at(s, i) = mean;
    } else {
      parallel_for(n, [&](int64_t begin, int64_t end) {
        for (int64_t i = begin; i < end; ++i) {
          if (dynamic[size_t(i)]) continue;
          Vec3 sum;
          int64_t cnt = 0;
          for (int64_t j : graph.of(i)) {
            if (!dynamic[size_t(j)]) continue;
            sum += field.at(s, j);
            ++cnt;
          }
          if (cnt > 0) out.at(s, i) = sum / double(cnt);
        }
      });
    }
  }
  return out;
}

}  // namespace mmt
