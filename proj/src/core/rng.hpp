#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "core/geometry.hpp"

namespace mmt {

/// Seeded generator with fixed scaling rules, so streams are identical across
/// platforms and standard libraries (std distributions give no such promise).
class Rng {
public:
  explicit Rng(uint64_t seed) : engine_(static_cast<std::mt19937_64::result_type>(seed)) {}

  /// Uniform in [0, 1).
  double uniform() {
    return double(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n ? engine_() % n : 0; }

  Vec3 in_box(const Vec3& lo, const Vec3& hi) {
    return {uniform(lo.x, hi.x), uniform(lo.y, hi.y), uniform(lo.z, hi.z)};
  }

  Vec3 gaussian3(double sigma) { return {normal(0, sigma), normal(0, sigma), normal(0, sigma)}; }

  /// Uniform random rotation (axis uniform on the sphere, angle uniform).
  Mat3 rotation() {
    double z = uniform(-1.0, 1.0);
    double phi = uniform(0.0, 2.0 * 3.14159265358979323846);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vec3 axis{r * std::cos(phi), r * std::sin(phi), z};
    return axis_angle_rotation(axis, uniform(0.0, 2.0 * 3.14159265358979323846));
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mmt
