#pragma once

#include <cstdint>
#include <vector>

#include "core/cloud.hpp"
#include "core/graph.hpp"
#include "core/velocity_field.hpp"

namespace mmt {

struct RefinementConfig {
  double lambda_topo = 1.0;
  double lambda_kin = 1.0;
  int64_t sweeps = 5;
  double omega = 0.5;      // damping in (0, 1]
  double epsilon = 1e-5;   // static-speed threshold, scene units per frame

  void validate() const;
};

/// Spatial-smoothness energy of step `s`: summed over ordered neighbor pairs
/// (each undirected edge counted from both endpoints),
///   |v(s,i) - v(s,j)|^2  +  |a(s,i) - a(s,j)|^2
/// with a(s,i) = v(s+1,i) - v(s,i); the acceleration term exists only while
/// s+1 is a valid step and is dropped at the last one.
double kinematic_loss(const VelocityField& field, const NeighborGraph& graph, int64_t s);

/// Boundary Laplacian energy of step `s`: the mean over boundary points of
/// |v(s,i) - mean of v(s,j) over j in N(i)|^2. Zero for an empty boundary;
/// isolated boundary points (no neighbors) contribute zero.
double topological_loss(const VelocityField& field, const BoundarySet& boundary,
                        const NeighborGraph& graph, int64_t s);

struct LossTraceRow {
  int64_t sweep = 0;  // 0 = before any sweep
  int64_t step = 0;   // t
  double kinematic = 0.0;
  double topological = 0.0;
  double total = 0.0;  // lambda_kin * kinematic + lambda_topo * topological
};

struct RefineResult {
  VelocityField field;
  std::vector<LossTraceRow> trace;  // (sweeps+1) * steps rows, sweep-major
};

/// Per-sweep totals of a trace (summed over steps); entry 0 is pre-refinement.
std::vector<double> sweep_totals(const std::vector<LossTraceRow>& trace);

/// Damped Jacobi relaxation of the combined loss. Every sweep recomputes all
/// velocities simultaneously from the previous sweep's field: each v(s,i)
/// moves toward the closed-form minimizer of its own terms in the energy
/// (spatial neighbors at step s plus the temporal coupling through the
/// accelerations a(s-1) and a(s)), blended by `omega`. The kinematic pull
/// applies everywhere; the boundary-Laplacian pull only on boundary points.
/// Points with no neighbors have no energy terms and stay untouched.
///
/// The returned trace has one row per (sweep, step), starting with the
/// unrefined field as sweep 0.
RefineResult refine(const VelocityField& field, const NeighborGraph& graph,
                    const BoundarySet& boundary, const RefinementConfig& config);

enum class PropagateMode {
  Global,        // every static point takes the mean velocity of all dynamic points
  Neighborhood,  // each static point takes the mean of its dynamic graph-neighbors
};

/// Fills near-zero velocities ("static" points, speed < epsilon) from the
/// dynamic ones, independently per step, reading only the input field (all
/// updates simultaneous). Global mode moves every static point — faithful to
/// the mean rule but wrong for intentionally static components; neighborhood
/// mode leaves static points with no dynamic neighbor untouched, so isolated
/// static parts stay put. Steps with no dynamic point at all are unchanged.
VelocityField propagate_static(const VelocityField& field, const TargetCloud& cloud,
                               const NeighborGraph& graph, double epsilon, PropagateMode mode);

}  // namespace mmt
