#pragma once

#include <string>
#include <vector>

#include "core/cloud.hpp"
#include "core/refine.hpp"
#include "core/spat_prior.hpp"
#include "core/trajectory.hpp"
#include "core/velocity_field.hpp"

namespace mmt {

// Pipeline file formats. Each is a short text manifest terminated by an
// `end_header` line, followed (where noted) by a little-endian float32 binary
// payload. Text payloads are one record per line.

/// Trajectory file "MMTJ": keys version, K, T, scale, source,
/// component_labels; payload K*T*3 floats, trajectory-major.
void save_trajectories(const TrajectorySet& trajs, const std::string& path);
TrajectorySet load_trajectories(const std::string& path);

/// Prior file "MMSP": keys version, T, components, one `anchor x y z` line per
/// component; payload (T-1)*C*12 floats, step-major, rotation row-major then
/// translation per (step, component).
void save_prior(const SpatPrior& prior, const std::string& path);
SpatPrior load_prior(const std::string& path);

/// Velocity-field file "MMVF": keys version, N, T; payload (T-1)*N*3 floats,
/// step-major.
void save_field(const VelocityField& field, const std::string& path);
VelocityField load_field(const std::string& path);

/// 2D track file "MMTK" (text): keys K, T; then K*T lines of `u v visible`,
/// track-major.
void save_tracks(const Track2DSet& tracks, const std::string& path);
Track2DSet load_tracks(const std::string& path);

/// Camera file: one line per frame — fx fy cx cy followed by the 3x4
/// camera-to-world matrix row-major (16 numbers). Resolution is not part of
/// the file; callers attach it from the imagery they pair the cameras with.
void save_cameras(std::span<const CameraModel> cameras, const std::string& path);
std::vector<CameraModel> load_cameras(const std::string& path, int width, int height);

/// Index file (boundary/flood-fill seeds): one point index per line.
std::vector<int64_t> load_indices(const std::string& path);
void save_indices(std::span<const int64_t> indices, const std::string& path);

/// Label file: one label per line, N lines.
std::vector<int32_t> load_labels(const std::string& path);
void save_labels(std::span<const int32_t> labels, const std::string& path);

/// Label-seed file: one `point_index component_label` pair per line.
std::vector<LabelSeed> load_label_seeds(const std::string& path);

/// Loss trace as CSV: sweep,t,L_kin,L_topo,L_total.
void write_loss_trace_csv(const std::vector<LossTraceRow>& trace, const std::string& path);

struct MetricsRow {
  int64_t frame = 0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// Metric report as CSV: frame,psnr_db,ssim.
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);

}  // namespace mmt
