#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/geometry.hpp"
#include "core/rng.hpp"

using namespace mmt;

namespace {

constexpr double kPi = 3.14159265358979323846;

double frobenius_dist(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 9; ++i) s += (a.m[i] - b.m[i]) * (a.m[i] - b.m[i]);
  return std::sqrt(s);
}

// RMSE of dst against R*src + t with the translation chosen optimally for
// the given rotation (centroid matching). Lets us score arbitrary candidate
// rotations against the solver's answer.
double rmse_for_rotation(const Mat3& r, const std::vector<Vec3>& src,
                         const std::vector<Vec3>& dst) {
  Vec3 sm, dm;
  for (size_t i = 0; i < src.size(); ++i) {
    sm += src[i];
    dm += dst[i];
  }
  sm *= 1.0 / double(src.size());
  dm *= 1.0 / double(src.size());
  Vec3 t = dm - r * sm;
  double acc = 0.0;
  for (size_t i = 0; i < src.size(); ++i) acc += norm_sq(dst[i] - (r * src[i] + t));
  return std::sqrt(acc / double(src.size()));
}

}  // namespace

TEST_CASE("mat3 determinant and transpose on hand values") {
  Mat3 a{{2, 0, 1, 0, 3, 0, 0, 0, 4}};
  CHECK(det(a) == doctest::Approx(24.0).epsilon(1e-15));
  Mat3 at = transpose(a);
  CHECK(at(2, 0) == 1.0);
  CHECK(at(0, 2) == 0.0);
  CHECK(det(Mat3::identity()) == doctest::Approx(1.0));
}

TEST_CASE("axis-angle rotation maps basis vectors as expected") {
  Mat3 rz = rotation_z(kPi / 2.0);
  Vec3 v = rz * Vec3{1, 0, 0};
  CHECK(norm(v - Vec3{0, 1, 0}) < 1e-15);
  CHECK(is_rotation(rz, 1e-14));

  Mat3 rx = axis_angle_rotation({1, 0, 0}, kPi);
  CHECK(norm(rx * Vec3{0, 1, 0} - Vec3{0, -1, 0}) < 1e-14);
}

TEST_CASE("rotation_angle inverts axis-angle construction") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    double angle = rng.uniform(0.0, kPi);  // rotation_angle reports in [0, pi]
    Vec3 axis = normalized(rng.gaussian3(1.0));
    Mat3 r = axis_angle_rotation(axis, angle);
    CHECK(rotation_angle(r) == doctest::Approx(angle).epsilon(1e-9));
  }
}

TEST_CASE("compose chains rotations in application order") {
  RigidTransform a{rotation_z(kPi / 6.0), {1, 2, 3}};
  RigidTransform b{rotation_z(kPi / 3.0), {-4, 0, 5}};
  RigidTransform c = compose(a, b);
  // compose(a, b) applies b first: check on a probe point.
  Vec3 p{0.3, -0.7, 1.1};
  CHECK(norm(c.apply(p) - a.apply(b.apply(p))) < 1e-14);
  // Pure rotations about the same axis add their angles.
  RigidTransform r90 = compose(RigidTransform{rotation_z(kPi / 6.0), {}},
                               RigidTransform{rotation_z(kPi / 3.0), {}});
  CHECK(frobenius_dist(r90.rotation, rotation_z(kPi / 2.0)) < 1e-12);
}

TEST_CASE("rigid transform inverse round-trips points") {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    RigidTransform t{rng.rotation(), rng.gaussian3(5.0)};
    Vec3 p = rng.gaussian3(3.0);
    CHECK(norm(t.inverse().apply(t.apply(p)) - p) < 1e-12);
  }
}

TEST_CASE("symmetric eigendecomposition satisfies A v = lambda v") {
  Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    Mat3 g;
    for (int j = 0; j < 9; ++j) g.m[j] = rng.uniform(-2.0, 2.0);
    Mat3 a = g * transpose(g);  // symmetric PSD
    Mat3 vecs;
    Vec3 vals;
    eig_sym3(a, vecs, vals);
    CHECK(vals.x >= vals.y);
    CHECK(vals.y >= vals.z);
    for (int c = 0; c < 3; ++c) {
      Vec3 v = vecs.col(c);
      CHECK(norm(a * v - v * vals[c]) < 1e-9 * std::max(1.0, std::abs(vals.x)));
      CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("svd3 reconstructs the input with right-handed factors") {
  Rng rng(14);
  for (int i = 0; i < 300; ++i) {
    Mat3 h;
    for (int j = 0; j < 9; ++j) h.m[j] = rng.uniform(-3.0, 3.0);
    Mat3 u, v;
    Vec3 s;
    svd3(h, u, s, v);

    CHECK(rotation_drift(u) < 1e-10);
    CHECK(rotation_drift(v) < 1e-10);
    CHECK(det(u) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(det(v) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.x >= s.y);
    CHECK(s.y >= std::abs(s.z));
    // Mirror sign lives in s.z: det(h) = s.x * s.y * s.z since both factors
    // are proper rotations.
    double dh = det(h);
    if (std::abs(dh) > 1e-9) CHECK((s.z < 0) == (dh < 0));
    CHECK(s.x * s.y * s.z == doctest::Approx(dh).epsilon(1e-7).scale(std::max(1.0, std::abs(dh))));

    Mat3 recon = Mat3::zero();
    for (int c = 0; c < 3; ++c) {
      Mat3 term = outer(u.col(c), v.col(c)) * s[c];
      recon = recon + term;
    }
    CHECK(frobenius_dist(recon, h) < 1e-9 * std::max(1.0, s.x));
  }
}

TEST_CASE("svd3 handles rank-deficient and tiny inputs") {
  // Rank 1.
  Mat3 h = outer({1, 2, 3}, {4, 5, 6});
  Mat3 u, v;
  Vec3 s;
  svd3(h, u, s, v);
  CHECK(s.x > 0.0);
  CHECK(std::abs(s.y) < 1e-9);
  CHECK(rotation_drift(u) < 1e-9);
  CHECK(rotation_drift(v) < 1e-9);
  Mat3 recon = outer(u.col(0), v.col(0)) * s.x;
  CHECK(frobenius_dist(recon, h) < 1e-9 * s.x);

  // Zero matrix should not blow up.
  svd3(Mat3::zero(), u, s, v);
  CHECK(norm(s) == 0.0);
  CHECK(rotation_drift(u) < 1e-12);
}

TEST_CASE("orthonormalize projects a perturbed rotation back to SO(3)") {
  Rng rng(15);
  for (int i = 0; i < 100; ++i) {
    Mat3 r = rng.rotation();
    Mat3 noisy = r;
    for (int j = 0; j < 9; ++j) noisy.m[j] += rng.uniform(-1e-4, 1e-4);
    Mat3 fixed = orthonormalize(noisy);
    CHECK(is_rotation(fixed, 1e-12));
    CHECK(frobenius_dist(fixed, r) < 1e-3);
    // Polar factor is the Frobenius-nearest rotation: no random rotation of
    // comparable distance may sit closer to the noisy matrix.
    for (int k = 0; k < 20; ++k) {
      Vec3 axis = normalized(rng.gaussian3(1.0));
      Mat3 other = axis_angle_rotation(axis, 1e-3) * fixed;
      CHECK(frobenius_dist(other, noisy) >= frobenius_dist(fixed, noisy) - 1e-12);
    }
  }
}

TEST_CASE("alignment recovers a pure translation") {
  std::vector<Vec3> src{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<Vec3> dst;
  Vec3 shift{2.5, -1.0, 0.75};
  for (const auto& p : src) dst.push_back(p + shift);
  auto res = umeyama_align(src, dst);
  CHECK(frobenius_dist(res.transform.rotation, Mat3::identity()) < 1e-12);
  CHECK(norm(res.transform.translation - shift) < 1e-12);
  CHECK(res.rmse < 1e-12);
}

TEST_CASE("alignment recovers a known rigid transform to 1e-9") {
  Rng rng(16);
  for (int i = 0; i < 200; ++i) {
    int n = 3 + int(rng.below(60));
    RigidTransform truth{rng.rotation(), rng.gaussian3(4.0)};
    std::vector<Vec3> src, dst;
    for (int j = 0; j < n; ++j) {
      Vec3 p = rng.in_box({-1, -1, -1}, {1, 1, 1});
      src.push_back(p);
      dst.push_back(truth.apply(p));
    }
    auto res = umeyama_align(src, dst);
    CHECK(res.rmse < 1e-9);
    CHECK(frobenius_dist(res.transform.rotation, truth.rotation) < 1e-8);
    CHECK(norm(res.transform.translation - truth.translation) < 1e-8);
    CHECK(is_rotation(res.transform.rotation, 1e-9));
  }
}

TEST_CASE("alignment is invariant to translating both point sets") {
  Rng rng(17);
  std::vector<Vec3> src, dst;
  RigidTransform truth{rng.rotation(), {0.5, 0.25, -1.0}};
  for (int j = 0; j < 40; ++j) {
    Vec3 p = rng.gaussian3(1.0);
    src.push_back(p);
    dst.push_back(truth.apply(p) + rng.gaussian3(0.01));
  }
  auto base = umeyama_align(src, dst);
  Vec3 shift{100.0, -50.0, 25.0};
  std::vector<Vec3> src2 = src;
  for (auto& p : src2) p += shift;
  auto moved = umeyama_align(src2, dst);
  // Same rotation; translation absorbs the shift.
  CHECK(frobenius_dist(moved.transform.rotation, base.transform.rotation) < 1e-9);
  CHECK(norm(moved.transform.translation -
             (base.transform.translation - base.transform.rotation * shift)) < 1e-7);
  CHECK(moved.rmse == doctest::Approx(base.rmse).epsilon(1e-9));
}

TEST_CASE("alignment never returns a reflection even for mirrored data") {
  // dst is src mirrored through the yz-plane: the best *rigid* fit is some
  // proper rotation, never the reflection itself. Verify the solver's answer
  // beats a dense sample of candidate rotations and stays in SO(3).
  Rng rng(18);
  std::vector<Vec3> src, dst;
  for (int j = 0; j < 25; ++j) {
    Vec3 p = rng.in_box({-1, -1, -1}, {1, 1, 1});
    src.push_back(p);
    dst.push_back({-p.x, p.y, p.z});
  }
  auto res = umeyama_align(src, dst);
  CHECK(det(res.transform.rotation) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(is_rotation(res.transform.rotation, 1e-9));

  double best_sampled = 1e300;
  Rng sampler(19);
  for (int k = 0; k < 4000; ++k) {
    best_sampled = std::min(best_sampled, rmse_for_rotation(sampler.rotation(), src, dst));
  }
  CHECK(res.rmse <= best_sampled + 1e-12);

  // First-order optimality: nudging the answer can only hurt.
  for (int k = 0; k < 200; ++k) {
    Vec3 axis = normalized(sampler.gaussian3(1.0));
    Mat3 nudged = axis_angle_rotation(axis, 1e-4) * res.transform.rotation;
    CHECK(rmse_for_rotation(nudged, src, dst) >= res.rmse - 1e-12);
  }
}

TEST_CASE("alignment rejects undersized and collinear input") {
  std::vector<Vec3> two{{0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(umeyama_align(two, two), Error);
  try {
    umeyama_align(two, two);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewPoints);
  }

  std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  try {
    umeyama_align(line, line);
    FAIL("collinear input must throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateConfiguration);
  }

  std::vector<Vec3> mismatched{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  std::vector<Vec3> four{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  try {
    umeyama_align(mismatched, four);
    FAIL("size mismatch must throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("planar point sets still align exactly") {
  // Points in a plane leave one singular value at zero; the fit must still
  // recover the transform (rotation about the plane normal is observable).
  Rng rng(20);
  for (int i = 0; i < 50; ++i) {
    RigidTransform truth{rng.rotation(), rng.gaussian3(2.0)};
    std::vector<Vec3> src, dst;
    for (int j = 0; j < 30; ++j) {
      Vec3 p{rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0};
      src.push_back(p);
      dst.push_back(truth.apply(p));
    }
    auto res = umeyama_align(src, dst);
    CHECK(res.rmse < 1e-9);
    CHECK(frobenius_dist(res.transform.rotation, truth.rotation) < 1e-8);
  }
}

TEST_CASE("pinhole projection matches hand-computed pixels") {
  CameraModel cam;
  cam.fx = 100.0;
  cam.fy = 120.0;
  cam.cx = 50.0;
  cam.cy = 40.0;
  cam.width = 100;
  cam.height = 80;
  // Identity pose: camera at origin looking down +z.
  auto pd = project(cam, {1.0, 0.0, 2.0});
  CHECK(pd.u == doctest::Approx(100.0));
  CHECK(pd.v == doctest::Approx(40.0));
  CHECK(pd.depth == doctest::Approx(2.0));

  auto pd2 = project(cam, {0.0, -1.0, 4.0});
  CHECK(pd2.u == doctest::Approx(50.0));
  CHECK(pd2.v == doctest::Approx(10.0));
}

TEST_CASE("project and unproject are mutually inverse") {
  Rng rng(21);
  CameraModel cam;
  cam.fx = 320.0;
  cam.fy = 320.0;
  cam.cx = 160.0;
  cam.cy = 120.0;
  cam.width = 320;
  cam.height = 240;
  cam.pose = {rng.rotation(), rng.gaussian3(1.0)};
  for (int i = 0; i < 200; ++i) {
    Vec3 cam_pt{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 6.0)};
    Vec3 world = cam.camera_to_world(cam_pt);
    auto pd = project(cam, world);
    Vec3 back = unproject(cam, pd.u, pd.v, pd.depth);
    CHECK(norm(back - world) < 1e-10);
  }
}

TEST_CASE("points behind the camera are rejected") {
  CameraModel cam;
  cam.fx = cam.fy = 100.0;
  cam.cx = cam.cy = 50.0;
  cam.width = cam.height = 100;
  try {
    project(cam, {0, 0, -1.0});
    FAIL("must throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BehindCamera);
  }
  try {
    unproject(cam, 10.0, 10.0, 0.0);
    FAIL("must throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveDepth);
  }
}
