#include "core/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace mmt {

void Track2DSet::validate() const {
  const size_t n = size_t(track_count * frame_count);
  if (u.size() != n || v.size() != n || visible.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "track arrays do not match K*T");
  if (frame_count < 2) throw Error(ErrorCode::InvalidArgument, "tracks need at least 2 frames");
}

double DepthMap::sample(double u, double v) const {
  if (u < 0.0 || v < 0.0 || u > double(width - 1) || v > double(height - 1))
    throw Error(ErrorCode::InvalidArgument,
                "depth sample (" + std::to_string(u) + ", " + std::to_string(v) +
                    ") outside the " + std::to_string(width) + "x" + std::to_string(height) +
                    " map");
  int x0 = std::min(int(u), width - 2 >= 0 ? width - 2 : 0);
  int y0 = std::min(int(v), height - 2 >= 0 ? height - 2 : 0);
  int x1 = std::min(x0 + 1, width - 1);
  int y1 = std::min(y0 + 1, height - 1);
  double fx = u - double(x0), fy = v - double(y0);
  double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
  double bot = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
  return top * (1.0 - fy) + bot * fy;
}

bool MaskMap::inside(double u, double v) const {
  int x = int(std::lround(u)), y = int(std::lround(v));
  if (x < 0 || y < 0 || x >= width || y >= height) return false;
  return at(x, y);
}

int32_t TrajectorySet::components() const {
  int32_t c = 0;
  for (int32_t l : labels) c = std::max(c, l + 1);
  return c;
}

void TrajectorySet::validate() const {
  if (frame_count < 2)
    throw Error(ErrorCode::InvalidArgument,
                "trajectory set needs T >= 2, got " + std::to_string(frame_count));
  if (int64_t(positions.size()) != trajectory_count * frame_count)
    throw Error(ErrorCode::DimensionMismatch, "position array does not match K*T");
  if (int64_t(labels.size()) != trajectory_count)
    throw Error(ErrorCode::DimensionMismatch, "label array does not match K");
  for (size_t i = 0; i < positions.size(); ++i)
    if (!all_finite(positions[i]))
      throw Error(ErrorCode::InvalidArgument,
                  "non-finite position at flat index " + std::to_string(i));
  for (size_t k = 0; k < labels.size(); ++k)
    if (labels[k] < 0)
      throw Error(ErrorCode::LabelOutOfRange, "negative label on trajectory " + std::to_string(k));
}

TrajectorySet lift_tracks(const Track2DSet& tracks, const DepthMapSequence& depths,
                          std::span<const CameraModel> cameras) {
  tracks.validate();
  const int64_t T = tracks.frame_count;
  const int64_t K = tracks.track_count;
  if (int64_t(depths.size()) != T)
    throw Error(ErrorCode::DimensionMismatch,
                "depth sequence has " + std::to_string(depths.size()) + " maps for " +
                    std::to_string(T) + " frames");
  if (int64_t(cameras.size()) != T)
    throw Error(ErrorCode::DimensionMismatch,
                "camera list has " + std::to_string(cameras.size()) + " entries for " +
                    std::to_string(T) + " frames");
  for (int64_t t = 0; t < T; ++t) {
    cameras[size_t(t)].validate();
    if (depths[size_t(t)].width != cameras[size_t(t)].width ||
        depths[size_t(t)].height != cameras[size_t(t)].height)
      throw Error(ErrorCode::ResolutionMismatch,
                  "frame " + std::to_string(t) + ": depth map is " +
                      std::to_string(depths[size_t(t)].width) + "x" +
                      std::to_string(depths[size_t(t)].height) + " but camera expects " +
                      std::to_string(cameras[size_t(t)].width) + "x" +
                      std::to_string(cameras[size_t(t)].height));
  }

  TrajectorySet out;
  out.trajectory_count = K;
  out.frame_count = T;
  out.positions.resize(size_t(K * T));
  out.labels.assign(size_t(K), 0);

  parallel_for(K, [&](int64_t begin, int64_t end) {
    std::vector<int64_t> seen;  // visible frame indices for this track
    for (int64_t k = begin; k < end; ++k) {
      seen.clear();
      for (int64_t t = 0; t < T; ++t) {
        if (!tracks.visible[size_t(tracks.at(k, t))]) continue;
        double uu = tracks.u[size_t(tracks.at(k, t))];
        double vv = tracks.v[size_t(tracks.at(k, t))];
        double d = depths[size_t(t)].sample(uu, vv);
        if (!(d > 0.0) || !std::isfinite(d))
          throw Error(ErrorCode::NonPositiveDepth, "track " + std::to_string(k) + " frame " +
                                                       std::to_string(t) +
                                                       ": sampled depth not positive");
        out.at(k, t) = unproject(cameras[size_t(t)], uu, vv, d);
        seen.push_back(t);
      }
      if (seen.empty())
        throw Error(ErrorCode::NoVisibleSample,
                    "track " + std::to_string(k) + " is never visible");

      // Fill gaps: linear blend between bracketing visible frames, clamped
      // before the first and after the last sighting.
      for (int64_t t = 0; t < seen.front(); ++t) out.at(k, t) = out.at(k, seen.front());
      for (int64_t t = seen.back() + 1; t < T; ++t) out.at(k, t) = out.at(k, seen.back());
      for (size_t s = 0; s + 1 < seen.size(); ++s) {
        int64_t a = seen[s], b = seen[s + 1];
        for (int64_t t = a + 1; t < b; ++t) {
          double w = double(t - a) / double(b - a);
          out.at(k, t) = out.at(k, a) * (1.0 - w) + out.at(k, b) * w;
        }
      }
    }
  });

  out.validate();
  return out;
}

MaskResult mask_trajectories(const TrajectorySet& trajs, const MaskSequence& masks,
                             std::span<const CameraModel> cameras, int window) {
  trajs.validate();
  const int64_t T = trajs.frame_count;
  const int64_t K = trajs.trajectory_count;
  if (window < 1 || window % 2 == 0)
    throw Error(ErrorCode::InvalidArgument,
                "mask window must be odd and >= 1, got " + std::to_string(window));
  if (int64_t(masks.size()) != T)
    throw Error(ErrorCode::DimensionMismatch,
                "mask sequence has " + std::to_string(masks.size()) + " maps for " +
                    std::to_string(T) + " frames");
  if (int64_t(cameras.size()) != T)
    throw Error(ErrorCode::DimensionMismatch, "camera list length does not match frame count");
  for (int64_t t = 0; t < T; ++t)
    if (masks[size_t(t)].width != cameras[size_t(t)].width ||
        masks[size_t(t)].height != cameras[size_t(t)].height)
      throw Error(ErrorCode::ResolutionMismatch,
                  "frame " + std::to_string(t) + ": mask resolution does not match camera");

  const int64_t win = std::min<int64_t>(window, T);
  std::vector<uint8_t> keep(size_t(K), 0);
  parallel_for(K, [&](int64_t begin, int64_t end) {
    std::vector<int> in_mask(static_cast<size_t>(T));
    for (int64_t k = begin; k < end; ++k) {
      for (int64_t t = 0; t < T; ++t) {
        bool in = false;
        const CameraModel& cam = cameras[size_t(t)];
        Vec3 pc = cam.world_to_camera(trajs.at(k, t));
        if (pc.z > 0.0) {
          double uu = cam.fx * pc.x / pc.z + cam.cx;
          double vv = cam.fy * pc.y / pc.z + cam.cy;
          in = masks[size_t(t)].inside(uu, vv);
        }
        in_mask[size_t(t)] = in ? 1 : 0;
      }
      // Sliding majority: keep when any run of `win` frames is inside for
      // more than win/2 of them.
      int64_t run = 0;
      for (int64_t t = 0; t < win; ++t) run += in_mask[size_t(t)];
      for (int64_t start = 0;; ++start) {
        if (2 * run > win) {
          keep[size_t(k)] = 1;
          break;
        }
        if (start + win >= T) break;
        run += in_mask[size_t(start + win)] - in_mask[size_t(start)];
      }
    }
  });

  MaskResult result;
  result.kept.frame_count = T;
  result.kept.scale = trajs.scale;
  result.kept.source = "masked";
  for (int64_t k = 0; k < K; ++k) {
    if (!keep[size_t(k)]) {
      ++result.dropped;
      continue;
    }
    result.kept.labels.push_back(trajs.labels[size_t(k)]);
    for (int64_t t = 0; t < T; ++t) result.kept.positions.push_back(trajs.at(k, t));
  }
  result.kept.trajectory_count = int64_t(result.kept.labels.size());
  if (result.kept.trajectory_count == 0)
    result.warnings.push_back("all trajectories fell outside the masks");
  return result;
}

double normalize_trajectories(TrajectorySet& trajs) {
  trajs.validate();
  std::vector<Vec3> first;
  first.reserve(size_t(trajs.trajectory_count));
  for (int64_t k = 0; k < trajs.trajectory_count; ++k) first.push_back(trajs.at(k, 0));
  if (first.empty()) throw Error(ErrorCode::EmptyForeground, "no trajectories to normalize");
  double diag = compute_aabb(first).diagonal();
  if (!(diag > 0.0))
    throw Error(ErrorCode::DegenerateCloud, "first-frame bounding-box diagonal is zero");
  for (Vec3& p : trajs.positions) p = p / diag;
  trajs.scale *= diag;
  return diag;
}

}  // namespace mmt
