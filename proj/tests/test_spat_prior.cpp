#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/spat_prior.hpp"
#include "core/synth.hpp"

using namespace mmt;

namespace {

std::vector<Vec3> first_frame(const TrajectorySet& trajs) {
  std::vector<Vec3> pts;
  for (int64_t k = 0; k < trajs.trajectory_count; ++k) pts.push_back(trajs.at(k, 0));
  return pts;
}

double max_replay_deviation(const SpatPrior& prior, const TrajectorySet& trajs) {
  auto frames = apply_prior(prior, first_frame(trajs), trajs.labels, Alignment::Anchored);
  double worst = 0.0;
  for (int64_t t = 0; t < trajs.frame_count; ++t)
    for (int64_t k = 0; k < trajs.trajectory_count; ++k)
      worst = std::max(worst, norm(frames[size_t(t)][size_t(k)] - trajs.at(k, t)));
  return worst;
}

}  // namespace

TEST_CASE("synthesized scenes obey their own ground truth exactly") {
  for (MotionType type : {MotionType::Translation, MotionType::Rotation, MotionType::Oscillation}) {
    MotionSpec spec;
    spec.type = type;
    spec.frames = 8;
    spec.points = 60;
    spec.radians_per_frame = 0.1;
    SynthesizedScene scene = synthesize_scene(spec);

    scene.trajectories.validate();
    scene.ground_truth.validate();
    CHECK(scene.trajectories.frame_count == 8);
    CHECK(scene.trajectories.trajectory_count == 60);
    CHECK(max_replay_deviation(scene.ground_truth, scene.trajectories) < 1e-12);
  }
}

TEST_CASE("translation prior fits to the exact per-step displacement") {
  MotionSpec spec;
  spec.type = MotionType::Translation;
  spec.velocity = {0.02, -0.01, 0.005};
  spec.frames = 6;
  spec.points = 40;
  SynthesizedScene scene = synthesize_scene(spec);

  SpatPrior prior = build_prior(scene.trajectories);
  REQUIRE(prior.component_count() == 1);
  REQUIRE(prior.step_count() == 5);
  for (const RigidTransform& step : prior.components[0]) {
    CHECK(rotation_angle(step.rotation) < 1e-9);
    CHECK(norm(step.translation - spec.velocity) < 1e-9);
  }
}

TEST_CASE("rotation prior recovers the per-step rotation to machine precision") {
  MotionSpec spec;
  spec.type = MotionType::Rotation;
  spec.axis = {0, 0, 1};
  spec.radians_per_frame = 5.0 * std::numbers::pi / 180.0;
  spec.frames = 10;
  spec.points = 300;
  SynthesizedScene scene = synthesize_scene(spec);

  SpatPrior prior = build_prior(scene.trajectories);
  Mat3 want = axis_angle_rotation({0, 0, 1}, spec.radians_per_frame);
  for (const RigidTransform& step : prior.components[0]) {
    // Angle of R_fit * R_true^-1 measures the rotational error directly.
    Mat3 err = step.rotation * transpose(want);
    CHECK(rotation_angle(err) < 1e-9);
  }
  CHECK(max_replay_deviation(prior, scene.trajectories) < 1e-9);
}

TEST_CASE("oscillation prior reproduces the sinusoidal steps") {
  MotionSpec spec;
  spec.type = MotionType::Oscillation;
  spec.amplitude = {0.1, 0.05, 0};
  spec.frequency = 0.13;
  spec.frames = 9;
  spec.points = 50;
  SynthesizedScene scene = synthesize_scene(spec);

  SpatPrior prior = build_prior(scene.trajectories);
  for (int64_t t = 0; t < prior.step_count(); ++t) {
    double phase_next = std::sin(2.0 * std::numbers::pi * spec.frequency * double(t + 1));
    double phase_cur = std::sin(2.0 * std::numbers::pi * spec.frequency * double(t));
    Vec3 want = spec.amplitude * (phase_next - phase_cur);
    const RigidTransform& step = prior.components[0][size_t(t)];
    CHECK(rotation_angle(step.rotation) < 1e-9);
    CHECK(norm(step.translation - want) < 1e-9);
  }
}

TEST_CASE("multi-component scenes give static components identity steps") {
  MotionSpec spec;
  spec.type = MotionType::Rotation;
  spec.axis = {0, 1, 0};
  spec.radians_per_frame = 0.05;
  spec.frames = 6;
  spec.points = 90;
  spec.component_count = 3;
  SynthesizedScene scene = synthesize_scene(spec);
  CHECK(scene.trajectories.components() == 3);

  SpatPrior prior = build_prior(scene.trajectories);
  REQUIRE(prior.component_count() == 3);
  for (int c = 0; c < 2; ++c)  // all but the last are static
    for (const RigidTransform& step : prior.components[size_t(c)]) {
      CHECK(rotation_angle(step.rotation) < 1e-10);
      CHECK(norm(step.translation) < 1e-10);
    }
  for (const RigidTransform& step : prior.components[2])
    CHECK(rotation_angle(step.rotation) == doctest::Approx(0.05).epsilon(1e-7));

  CHECK(max_replay_deviation(prior, scene.trajectories) < 1e-9);
}

TEST_CASE("self-transfer reproduces the source trajectories") {
  // The core promise: feeding the prior its own first frame reproduces the
  // entire trajectory set.
  for (MotionType type : {MotionType::Translation, MotionType::Rotation, MotionType::Oscillation}) {
    MotionSpec spec;
    spec.type = type;
    spec.frames = 10;
    spec.points = 300;
    spec.radians_per_frame = 0.087;
    SynthesizedScene scene = synthesize_scene(spec);
    SpatPrior prior = build_prior(scene.trajectories);
    CHECK(max_replay_deviation(prior, scene.trajectories) < 1e-9);
  }
}

TEST_CASE("anchored application is independent of target position") {
  MotionSpec spec;
  spec.type = MotionType::Rotation;
  spec.radians_per_frame = 0.12;
  spec.frames = 7;
  spec.points = 80;
  SynthesizedScene scene = synthesize_scene(spec);
  SpatPrior prior = build_prior(scene.trajectories);

  std::vector<Vec3> pts = first_frame(scene.trajectories);
  const Vec3 shift{13.0, -4.0, 7.5};
  std::vector<Vec3> shifted = pts;
  for (Vec3& p : shifted) p += shift;

  auto base = apply_prior(prior, pts, scene.trajectories.labels, Alignment::Anchored);
  auto moved = apply_prior(prior, shifted, scene.trajectories.labels, Alignment::Anchored);
  for (size_t t = 0; t < base.size(); ++t)
    for (size_t i = 0; i < base[t].size(); ++i)
      CHECK(norm(moved[t][i] - (base[t][i] + shift)) < 1e-9);

  // Raw application is position-dependent for rotations: the shifted copy
  // orbits the original pivot instead of its own.
  auto raw_base = apply_prior(prior, pts, scene.trajectories.labels, Alignment::Raw);
  auto raw_moved = apply_prior(prior, shifted, scene.trajectories.labels, Alignment::Raw);
  double worst = 0.0;
  for (size_t t = 0; t < raw_base.size(); ++t)
    for (size_t i = 0; i < raw_base[t].size(); ++i)
      worst = std::max(worst, norm(raw_moved[t][i] - (raw_base[t][i] + shift)));
  CHECK(worst > 0.1);
}

TEST_CASE("rigid components preserve pairwise distances across the replay") {
  MotionSpec spec;
  spec.type = MotionType::Rotation;
  spec.radians_per_frame = 0.2;
  spec.frames = 8;
  spec.points = 30;
  SynthesizedScene scene = synthesize_scene(spec);
  SpatPrior prior = build_prior(scene.trajectories);

  auto pts = first_frame(scene.trajectories);
  auto frames = apply_prior(prior, pts, scene.trajectories.labels, Alignment::Anchored);
  for (size_t t = 1; t < frames.size(); ++t)
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); j += 7) {
        double d0 = norm(frames[0][i] - frames[0][j]);
        double dt = norm(frames[t][i] - frames[t][j]);
        CHECK(std::abs(dt - d0) < 1e-9);
      }
}

TEST_CASE("noisy rotation scenes still recover the step angle within a tenth of a degree") {
  MotionSpec spec;
  spec.type = MotionType::Rotation;
  spec.axis = {0, 0, 1};
  spec.radians_per_frame = 5.0 * std::numbers::pi / 180.0;
  spec.frames = 10;
  spec.points = 300;
  SynthesizedScene scene = synthesize_scene(spec);

  Rng rng(777);
  TrajectorySet noisy = scene.trajectories;
  for (Vec3& p : noisy.positions) p += rng.gaussian3(1e-3);

  SpatPrior prior = build_prior(noisy);
  Mat3 want = axis_angle_rotation({0, 0, 1}, spec.radians_per_frame);
  const double tenth_degree = 0.1 * std::numbers::pi / 180.0;
  for (const RigidTransform& step : prior.components[0]) {
    Mat3 err = step.rotation * transpose(want);
    CHECK(rotation_angle(err) < tenth_degree);
  }
}

TEST_CASE("prior construction reports which component and frame pair failed") {
  // Component 1 collapses to a single repeated point: degenerate for the
  // alignment. The error must say so and name the culprit.
  TrajectorySet trajs;
  trajs.trajectory_count = 6;
  trajs.frame_count = 3;
  trajs.labels = {0, 0, 0, 1, 1, 1};
  Rng rng(3);
  for (int64_t k = 0; k < 3; ++k)
    for (int64_t t = 0; t < 3; ++t) trajs.positions.push_back(rng.in_box({-1, -1, -1}, {1, 1, 1}));
  for (int64_t k = 0; k < 3; ++k)
    for (int64_t t = 0; t < 3; ++t) trajs.positions.push_back({1, 1, 1});

  try {
    build_prior(trajs);
    FAIL_CHECK("expected degenerate component to throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateConfiguration);
    CHECK(std::string(e.what()).find("component 1") != std::string::npos);
  }
}

TEST_CASE("prior construction rejects thin or empty inputs") {
  TrajectorySet empty;
  empty.frame_count = 2;
  CHECK_THROWS_AS(build_prior(empty), Error);

  TrajectorySet two;
  two.trajectory_count = 2;
  two.frame_count = 2;
  two.labels = {0, 0};
  two.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  try {
    build_prior(two);
    FAIL_CHECK("expected too-few-points failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewPoints);
  }
}

TEST_CASE("application rejects labels outside the prior's component range") {
  MotionSpec spec;
  spec.frames = 4;
  spec.points = 12;
  SynthesizedScene scene = synthesize_scene(spec);
  SpatPrior prior = build_prior(scene.trajectories);

  std::vector<Vec3> pts = {{0, 0, 0}};
  std::vector<int32_t> bad = {5};
  try {
    apply_prior(prior, pts, bad, Alignment::Anchored);
    FAIL_CHECK("expected label-range failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LabelOutOfRange);
  }

  std::vector<int32_t> short_labels = {};
  CHECK_THROWS_AS(apply_prior(prior, pts, short_labels, Alignment::Anchored), Error);
}

TEST_CASE("prior validation spots corrupted rotations") {
  MotionSpec spec;
  spec.frames = 4;
  spec.points = 12;
  SynthesizedScene scene = synthesize_scene(spec);
  SpatPrior prior = build_prior(scene.trajectories);
  CHECK_NOTHROW(prior.validate());

  prior.components[0][1].rotation.m[0] = 2.0;
  CHECK_THROWS_AS(prior.validate(), Error);
}

TEST_CASE("synthesis specs are validated") {
  MotionSpec bad;
  bad.frames = 1;
  CHECK_THROWS_AS(synthesize_scene(bad), Error);

  MotionSpec few;
  few.points = 5;
  few.component_count = 2;  // needs at least 3 per component
  CHECK_THROWS_AS(synthesize_scene(few), Error);

  MotionSpec zero_axis;
  zero_axis.type = MotionType::Rotation;
  zero_axis.axis = {0, 0, 0};
  CHECK_THROWS_AS(synthesize_scene(zero_axis), Error);

  MotionSpec flat_box;
  flat_box.box_lo = {0, 0, 0};
  flat_box.box_hi = {0, 1, 1};
  CHECK_THROWS_AS(synthesize_scene(flat_box), Error);
}
