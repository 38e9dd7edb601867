#include "core/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace mmt {

void CameraPath::validate() const {
  if (cameras.empty()) throw Error(ErrorCode::EmptySequence, "camera path is empty");
  const CameraModel& first = cameras.front();
  first.validate();
  for (size_t i = 1; i < cameras.size(); ++i) {
    const CameraModel& cam = cameras[i];
    cam.validate();
    if (cam.fx != first.fx || cam.fy != first.fy || cam.cx != first.cx || cam.cy != first.cy ||
        cam.width != first.width || cam.height != first.height)
      throw Error(ErrorCode::InvalidArgument,
                  "camera " + std::to_string(i) + " changes intrinsics or resolution mid-path");
  }
}

CameraPath default_camera_path(const std::vector<std::vector<Vec3>>& positions, int width,
                               int height) {
  if (positions.empty()) throw Error(ErrorCode::EmptySequence, "no frames to derive a camera for");
  if (width < 1 || height < 1)
    throw Error(ErrorCode::InvalidArgument, "resolution must be positive");

  // Union bounding box over the whole motion, so nothing drifts off-frame.
  bool any = false;
  Aabb box{};
  for (const auto& frame : positions) {
    if (frame.empty()) continue;
    Aabb b = compute_aabb(frame);
    if (!any) {
      box = b;
      any = true;
    } else {
      for (int a = 0; a < 3; ++a) {
        box.lo[a] = std::min(box.lo[a], b.lo[a]);
        box.hi[a] = std::max(box.hi[a], b.hi[a]);
      }
    }
  }

  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.cx = double(width) / 2.0;
  cam.cy = double(height) / 2.0;
  double diag = any ? box.diagonal() : 0.0;
  if (diag <= 0.0) diag = 1.0;  // empty or degenerate content: arbitrary sane framing
  // 2.5 diagonals away, focal length chosen so the whole box projects inside
  // the frame with margin (worst-case offset diag/2 at depth 2*diag).
  cam.fx = cam.fy = 1.8 * double(std::min(width, height));
  Vec3 center = any ? box.center() : Vec3{};
  cam.pose = {Mat3::identity(), center - Vec3{0.0, 0.0, 2.5 * diag}};

  CameraPath path;
  path.cameras.assign(positions.size(), cam);
  return path;
}

std::vector<Frame> render(const std::vector<std::vector<Vec3>>& positions,
                          const TargetCloud& cloud, const CameraPath& path,
                          const Vec3& background) {
  if (positions.empty()) throw Error(ErrorCode::EmptySequence, "no frames to render");
  path.validate();
  if (path.size() != int64_t(positions.size()))
    throw Error(ErrorCode::DimensionMismatch,
                "camera path has " + std::to_string(path.size()) + " poses for " +
                    std::to_string(positions.size()) + " frames");
  cloud.validate();
  for (size_t t = 0; t < positions.size(); ++t)
    if (int64_t(positions[t].size()) != cloud.size())
      throw Error(ErrorCode::DimensionMismatch,
                  "frame " + std::to_string(t) + " has " + std::to_string(positions[t].size()) +
                      " positions for a cloud of " + std::to_string(cloud.size()));

  auto quantize = [](double c) {
    return uint8_t(std::clamp<long>(std::lround(c * 255.0), 0, 255));
  };
  const uint8_t bg[3] = {quantize(background.x), quantize(background.y), quantize(background.z)};
  std::vector<std::array<uint8_t, 3>> point_color(size_t(cloud.size()));
  for (int64_t i = 0; i < cloud.size(); ++i)
    point_color[size_t(i)] = {quantize(cloud.colors[size_t(i)].x),
                              quantize(cloud.colors[size_t(i)].y),
                              quantize(cloud.colors[size_t(i)].z)};

  const int64_t frame_count = int64_t(positions.size());
  std::vector<Frame> frames(static_cast<size_t>(frame_count));

  // Frames are independent; each one rasterizes sequentially in point order,
  // so the output never depends on the worker count.
  parallel_for(frame_count, [&](int64_t begin, int64_t end) {
    for (int64_t t = begin; t < end; ++t) {
      const CameraModel& cam = path.cameras[size_t(t)];
      const int w = cam.width, h = cam.height;
      Frame& frame = frames[size_t(t)];
      frame.width = w;
      frame.height = h;
      frame.rgb.resize(size_t(w) * size_t(h) * 3);
      for (size_t p = 0; p < size_t(w) * size_t(h); ++p) {
        frame.rgb[p * 3 + 0] = bg[0];
        frame.rgb[p * 3 + 1] = bg[1];
        frame.rgb[p * 3 + 2] = bg[2];
      }
      std::vector<double> zbuf(size_t(w) * size_t(h),
                               std::numeric_limits<double>::infinity());

      const RigidTransform world_to_cam = cam.pose.inverse();
      const auto& pts = positions[size_t(t)];
      for (int64_t i = 0; i < int64_t(pts.size()); ++i) {
        Vec3 pc = world_to_cam.apply(pts[size_t(i)]);
        if (pc.z <= 0.0) continue;  // behind the camera
        double u = cam.fx * pc.x / pc.z + cam.cx;
        double v = cam.fy * pc.y / pc.z + cam.cy;
        double r = cam.fx * cloud.radii[size_t(i)] / pc.z;

        int x0 = std::max(0, int(std::ceil(u - r)));
        int x1 = std::min(w - 1, int(std::floor(u + r)));
        int y0 = std::max(0, int(std::ceil(v - r)));
        int y1 = std::min(h - 1, int(std::floor(v + r)));
        double r_sq = r * r;
        for (int y = y0; y <= y1; ++y) {
          double dy = double(y) - v;
          for (int x = x0; x <= x1; ++x) {
            double dx = double(x) - u;
            if (dx * dx + dy * dy > r_sq) continue;
            size_t pix = size_t(y) * size_t(w) + size_t(x);
            if (pc.z < zbuf[pix]) {
              zbuf[pix] = pc.z;
              frame.rgb[pix * 3 + 0] = point_color[size_t(i)][0];
              frame.rgb[pix * 3 + 1] = point_color[size_t(i)][1];
              frame.rgb[pix * 3 + 2] = point_color[size_t(i)][2];
            }
          }
        }
      }
    }
  }, 1);

  return frames;
}

}  // namespace mmt
