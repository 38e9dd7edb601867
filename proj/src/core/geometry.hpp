#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "core/error.hpp"

namespace mmt {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm_sq(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm_sq(v)); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }
inline bool all_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Row-major 3x3 matrix.
struct Mat3 {
  double m[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};

  static Mat3 identity() { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
  static Mat3 zero() { return {}; }

  double operator()(int r, int c) const { return m[3 * r + c]; }
  double& operator()(int r, int c) { return m[3 * r + c]; }

  Vec3 row(int r) const { return {m[3 * r], m[3 * r + 1], m[3 * r + 2]}; }
  Vec3 col(int c) const { return {m[c], m[c + 3], m[c + 6]}; }
  void set_col(int c, const Vec3& v) { m[c] = v.x; m[c + 3] = v.y; m[c + 6] = v.z; }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
    return r;
  }
  Mat3 operator-(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
    return r;
  }
  Mat3 operator*(double s) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] * s;
    return r;
  }
};

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {dot(a.row(0), v), dot(a.row(1), v), dot(a.row(2), v)};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
  return r;
}

inline Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
  return r;
}

inline double det(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

inline Mat3 outer(const Vec3& a, const Vec3& b) {
  return {{a.x * b.x, a.x * b.y, a.x * b.z,
           a.y * b.x, a.y * b.y, a.y * b.z,
           a.z * b.x, a.z * b.y, a.z * b.z}};
}

inline double max_abs(const Mat3& a) {
  double r = 0.0;
  for (double v : a.m) r = std::max(r, std::abs(v));
  return r;
}

/// Axis-aligned bounding box.
struct Aabb {
  Vec3 lo, hi;
  Vec3 center() const { return (lo + hi) * 0.5; }
  double diagonal() const { return norm(hi - lo); }
};

inline Aabb compute_aabb(std::span<const Vec3> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyCloud, "bounding box of an empty point set");
  Aabb box{points[0], points[0]};
  for (const Vec3& p : points) {
    for (int a = 0; a < 3; ++a) {
      box.lo[a] = std::min(box.lo[a], p[a]);
      box.hi[a] = std::max(box.hi[a], p[a]);
    }
  }
  return box;
}

/// Rotation about an arbitrary unit axis (Rodrigues), angle in radians.
Mat3 axis_angle_rotation(const Vec3& axis, double angle);
inline Mat3 rotation_z(double angle) { return axis_angle_rotation({0, 0, 1}, angle); }

/// Angle in radians of the rotation taking identity onto `r`.
double rotation_angle(const Mat3& r);

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Eigenvalues descending in `vals`; matching eigenvectors are the columns of `vecs`.
void eig_sym3(const Mat3& a, Mat3& vecs, Vec3& vals);

/// Signed SVD of a general 3x3 matrix: h = u * diag(s) * v^T where u and v are
/// right-handed orthonormal and s.x >= s.y >= |s.z|. When det(h) < 0 the sign
/// of the mirror is carried by s.z < 0 rather than by a left-handed factor.
void svd3(const Mat3& h, Mat3& u, Vec3& s, Mat3& v);

/// Nearest rotation (Frobenius) to an arbitrary matrix.
Mat3 orthonormalize(const Mat3& m);

/// SE(3) transform p -> rotation * p + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::identity();
  Vec3 translation;

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const {
    Mat3 rt = transpose(rotation);
    return {rt, -(rt * translation)};
  }
};

/// Largest deviation of rotation^T * rotation from the identity.
double rotation_drift(const Mat3& r);

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
  return rotation_drift(r) <= tol && std::abs(det(r) - 1.0) <= tol;
}

/// Applies b then a. Re-orthonormalizes when accumulated drift exceeds 1e-12.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

struct UmeyamaResult {
  RigidTransform transform;
  double rmse = 0.0;
};

/// Least-squares rigid alignment: finds (R, t) minimizing sum |dst_i - (R src_i + t)|^2
/// over index-corresponded point sets. Cross-covariance SVD with determinant
/// correction, translation from the centroids. No scale term.
///
/// Throws TooFewPoints for fewer than 3 pairs and DegenerateConfiguration when
/// the two smaller singular values of the cross-covariance fall below 1e-12
/// (collinear input: the rotation about the line is unobservable).
UmeyamaResult umeyama_align(std::span<const Vec3> src, std::span<const Vec3> dst);

/// Pinhole camera: intrinsics in pixels, pose maps camera coordinates to world.
struct CameraModel {
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
  RigidTransform pose;  // camera-to-world
  int width = 0, height = 0;

  Mat3 intrinsics() const { return {{fx, 0, cx, 0, fy, cy, 0, 0, 1}}; }
  Vec3 world_to_camera(const Vec3& p) const { return pose.inverse().apply(p); }
  Vec3 camera_to_world(const Vec3& p) const { return pose.apply(p); }

  void validate() const;
};

struct PixelDepth {
  double u = 0.0, v = 0.0;
  double depth = 0.0;
};

/// Projects a world point through the camera. Throws BehindCamera when the
/// point has non-positive depth in the camera frame.
PixelDepth project(const CameraModel& camera, const Vec3& point);

/// Lifts a pixel at the given depth back to a world point. Inverse of project
/// under the same camera. Throws NonPositiveDepth.
Vec3 unproject(const CameraModel& camera, double u, double v, double depth);

}  // namespace mmt
