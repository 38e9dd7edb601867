#include "core/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mmt {

Mat3 axis_angle_rotation(const Vec3& axis, double angle) {
  Vec3 n = normalized(axis);
  double c = std::cos(angle), s = std::sin(angle);
  Mat3 k = {{0, -n.z, n.y, n.z, 0, -n.x, -n.y, n.x, 0}};
  return Mat3::identity() + k * s + (k * k) * (1.0 - c);
}

double rotation_angle(const Mat3& r) {
  // atan2 of the skew part against the trace: acos((tr-1)/2) alone loses
  // resolution like sqrt(eps) near 0 and pi, which matters when the angle is
  // itself the error metric.
  double c = (r(0, 0) + r(1, 1) + r(2, 2) - 1.0) * 0.5;
  Vec3 skew{(r(2, 1) - r(1, 2)) * 0.5, (r(0, 2) - r(2, 0)) * 0.5, (r(1, 0) - r(0, 1)) * 0.5};
  return std::atan2(norm(skew), c);
}

namespace {

// One Jacobi rotation zeroing a(p,q); accumulates into vecs.
void jacobi_rotate(Mat3& a, Mat3& vecs, int p, int q) {
  double apq = a(p, q);
  if (apq == 0.0) return;
  double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  double c = 1.0 / std::sqrt(t * t + 1.0);
  double s = t * c;

  double app = a(p, p), aqq = a(q, q);
  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  int r = 3 - p - q;  // the remaining index
  double arp = a(r, p), arq = a(r, q);
  a(r, p) = a(p, r) = c * arp - s * arq;
  a(r, q) = a(q, r) = s * arp + c * arq;

  for (int i = 0; i < 3; ++i) {
    double vip = vecs(i, p), viq = vecs(i, q);
    vecs(i, p) = c * vip - s * viq;
    vecs(i, q) = s * vip + c * viq;
  }
}

double off_diagonal_sq(const Mat3& a) {
  return a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
}

}  // namespace

void eig_sym3(const Mat3& a_in, Mat3& vecs, Vec3& vals) {
  Mat3 a = a_in;
  vecs = Mat3::identity();
  double scale = max_abs(a);
  double stop = (scale > 0.0 ? scale * scale * 1e-30 : 0.0);
  for (int sweep = 0; sweep < 32 && off_diagonal_sq(a) > stop; ++sweep) {
    jacobi_rotate(a, vecs, 0, 1);
    jacobi_rotate(a, vecs, 0, 2);
    jacobi_rotate(a, vecs, 1, 2);
  }

  int order[3] = {0, 1, 2};
  double d[3] = {a(0, 0), a(1, 1), a(2, 2)};
  std::sort(order, order + 3, [&](int i, int j) { return d[i] > d[j]; });
  Mat3 sorted;
  for (int c = 0; c < 3; ++c) sorted.set_col(c, vecs.col(order[c]));
  vecs = sorted;
  vals = {d[order[0]], d[order[1]], d[order[2]]};
}

void svd3(const Mat3& h, Mat3& u, Vec3& s, Mat3& v) {
  Vec3 lam;
  eig_sym3(transpose(h) * h, v, lam);
  s = {std::sqrt(std::max(lam.x, 0.0)), std::sqrt(std::max(lam.y, 0.0)),
       std::sqrt(std::max(lam.z, 0.0))};

  // Right-handed V; any mirror ends up in the sign of s.z via the U construction.
  if (det(v) < 0.0) v.set_col(2, -v.col(2));

  if (s.x <= 0.0) {
    u = Mat3::identity();
    return;
  }
  Vec3 u0 = (h * v.col(0)) / s.x;
  u0 = normalized(u0);
  Vec3 u1;
  if (s.y > s.x * 1e-14) {
    u1 = (h * v.col(1)) / s.y;
    u1 -= u0 * dot(u1, u0);
    u1 = normalized(u1);
  } else {
    // Rank-1 input: complete the basis against the least-aligned axis.
    int axis = std::abs(u0.x) <= std::abs(u0.y)
                   ? (std::abs(u0.x) <= std::abs(u0.z) ? 0 : 2)
                   : (std::abs(u0.y) <= std::abs(u0.z) ? 1 : 2);
    Vec3 e;
    e[axis] = 1.0;
    u1 = normalized(cross(u0, e));
  }
  Vec3 u2 = cross(u0, u1);
  u.set_col(0, u0);
  u.set_col(1, u1);
  u.set_col(2, u2);
  // u2 was chosen for handedness, not to match h * v2; when they point in
  // opposite directions the mirror shows up here and s.z absorbs it.
  if (dot(u2, h * v.col(2)) < 0.0) s.z = -s.z;
}

Mat3 orthonormalize(const Mat3& m) {
  Mat3 u, v;
  Vec3 s;
  svd3(m, u, s, v);
  return u * transpose(v);
}

double rotation_drift(const Mat3& r) {
  return max_abs(transpose(r) * r - Mat3::identity());
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  if (rotation_drift(out.rotation) > 1e-12) out.rotation = orthonormalize(out.rotation);
  return out;
}

UmeyamaResult umeyama_align(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size())
    throw Error(ErrorCode::InvalidArgument, "point sets must have equal size");
  const size_t n = src.size();
  if (n < 3)
    throw Error(ErrorCode::TooFewPoints,
                "rigid alignment needs at least 3 correspondences, got " + std::to_string(n));

  Vec3 src_mean, dst_mean;
  for (size_t i = 0; i < n; ++i) {
    src_mean += src[i];
    dst_mean += dst[i];
  }
  src_mean *= 1.0 / double(n);
  dst_mean *= 1.0 / double(n);

  Mat3 cov = Mat3::zero();
  for (size_t i = 0; i < n; ++i)
    cov = cov + outer(src[i] - src_mean, dst[i] - dst_mean);

  Mat3 u, v;
  Vec3 s;
  svd3(cov, u, s, v);
  if (std::abs(s.y) < 1e-12 && std::abs(s.z) < 1e-12)
    throw Error(ErrorCode::DegenerateConfiguration,
                "collinear points: rotation about the line is unobservable");

  // svd3 keeps u and v right-handed, so v * u^T already carries the
  // determinant correction that excludes reflections.
  UmeyamaResult out;
  out.transform.rotation = v * transpose(u);
  out.transform.translation = dst_mean - out.transform.rotation * src_mean;

  double err = 0.0;
  for (size_t i = 0; i < n; ++i)
    err += norm_sq(dst[i] - out.transform.apply(src[i]));
  out.rmse = std::sqrt(err / double(n));
  return out;
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw Error(ErrorCode::InvalidArgument, "camera focal lengths must be positive");
  if (width > 0 && height > 0 && !(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
    throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
}

PixelDepth project(const CameraModel& camera, const Vec3& point) {
  Vec3 pc = camera.world_to_camera(point);
  if (pc.z <= 0.0)
    throw Error(ErrorCode::BehindCamera, "point has non-positive camera depth");
  return {camera.fx * pc.x / pc.z + camera.cx, camera.fy * pc.y / pc.z + camera.cy, pc.z};
}

Vec3 unproject(const CameraModel& camera, double u, double v, double depth) {
  if (depth <= 0.0)
    throw Error(ErrorCode::NonPositiveDepth, "depth must be positive");
  Vec3 pc = {(u - camera.cx) * depth / camera.fx, (v - camera.cy) * depth / camera.fy, depth};
  return camera.camera_to_world(pc);
}

}  // namespace mmt
