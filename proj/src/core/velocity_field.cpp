#include "core/velocity_field.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace mmt {

void VelocityField::validate() const {
  if (point_count < 0 || steps < 1)
    throw Error(ErrorCode::InvalidArgument, "velocity field needs at least 1 step");
  if (int64_t(v.size()) != steps * point_count)
    throw Error(ErrorCode::DimensionMismatch, "velocity storage does not match steps * N");
  for (size_t i = 0; i < v.size(); ++i)
    if (!all_finite(v[i]))
      throw Error(ErrorCode::InvalidArgument,
                  "non-finite velocity at flat index " + std::to_string(i));
}

VelocityField compute_field(const SpatPrior& prior, const TargetCloud& cloud) {
  auto frames = apply_prior(prior, cloud.positions, cloud.labels, Alignment::Anchored);
  VelocityField field;
  field.point_count = cloud.size();
  field.steps = prior.step_count();
  field.v.resize(size_t(field.steps * field.point_count));
  parallel_for(field.steps * field.point_count, [&](int64_t begin, int64_t end) {
    for (int64_t x = begin; x < end; ++x) {
      int64_t s = x / field.point_count, i = x % field.point_count;
      field.v[size_t(x)] = frames[size_t(s + 1)][size_t(i)] - frames[size_t(s)][size_t(i)];
    }
  });
  return field;
}

std::vector<std::vector<Vec3>> integrate(std::span<const Vec3> positions,
                                         const VelocityField& field) {
  field.validate();
  if (int64_t(positions.size()) != field.point_count)
    throw Error(ErrorCode::DimensionMismatch,
                "field was built for " + std::to_string(field.point_count) + " points, got " +
                    std::to_string(positions.size()));

  std::vector<std::vector<Vec3>> frames(size_t(field.frame_count()));
  frames[0].assign(positions.begin(), positions.end());
  for (int64_t s = 0; s < field.steps; ++s) {
    frames[size_t(s + 1)].resize(positions.size());
    const auto& cur = frames[size_t(s)];
    auto& nxt = frames[size_t(s + 1)];
    parallel_for(field.point_count, [&](int64_t begin, int64_t end) {
      for (int64_t i = begin; i < end; ++i)
        nxt[size_t(i)] = cur[size_t(i)] + field.at(s, i);
    });
  }
  return frames;
}

VelocityField scale_field(const VelocityField& field, double factor) {
  if (!std::isfinite(factor))
    throw Error(ErrorCode::InvalidArgument, "scale factor must be finite");
  VelocityField out = field;
  parallel_for(int64_t(out.v.size()), [&](int64_t begin, int64_t end) {
    for (int64_t i = begin; i < end; ++i) out.v[size_t(i)] *= factor;
  });
  return out;
}

VelocityField extend_field(const VelocityField& field, int64_t repeats, ExtendMode mode) {
  field.validate();
  if (repeats < 1)
    throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1, got " +
                                                std::to_string(repeats));

  const int64_t n = field.point_count, s = field.steps;
  VelocityField out;
  out.point_count = n;
  out.steps = mode == ExtendMode::Loop ? s * repeats : 2 * s * repeats;
  out.v.resize(size_t(out.steps * n));

  for (int64_t rep = 0; rep < repeats; ++rep) {
    if (mode == ExtendMode::Loop) {
      std::copy(field.v.begin(), field.v.end(), out.v.begin() + rep * s * n);
    } else {
      int64_t base = 2 * rep * s;
      std::copy(field.v.begin(), field.v.end(), out.v.begin() + base * n);
      for (int64_t t = 0; t < s; ++t)
        for (int64_t i = 0; i < n; ++i)
          out.at(base + s + t, i) = -field.at(s - 1 - t, i);
    }
  }
  return out;
}

}  // namespace mmt
