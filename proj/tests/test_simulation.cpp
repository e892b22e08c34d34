// Copyright 2026 The mvtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <array>

#include "mvtrack/simulation.hpp"

namespace mvtrack {
namespace {

// One tomato at the origin seen from 0.5 m along -X.
Scene single_tomato() {
  Scene s;
  s.tomatoes.push_back({1, Vec3::Zero(), 0.03, 0});
  FeatureVector f = FeatureVector::Zero(kDefaultFeatureDim);
  f(0) = 1.0;
  s.latent_features.push_back(f);
  s.roi = AABB::centered(Vec3::Zero(), Vec3::Constant(0.3));
  return s;
}

CameraPose eye_at(const Vec3& p) {
  CameraPose pose;
  pose.position = p;
  return pose;
}

const CameraModel kCam{};

bool same(const Viewpoint& a, const Viewpoint& b) {
  if (a.detections.size() != b.detections.size() || a.gt.size() != b.gt.size()) return false;
  for (std::size_t i = 0; i < a.detections.size(); ++i) {
    if (a.detections[i].position != b.detections[i].position) return false;
    if (*a.detections[i].feature != *b.detections[i].feature) return false;
    if (a.detections[i].confidence != b.detections[i].confidence) return false;
  }
  return true;
}

TEST(Scene, DeterministicAndCounted) {
  SceneSpec spec;
  spec.seed = 17;
  const Scene a = generate_scene(spec), b = generate_scene(spec);
  ASSERT_EQ(a.tomatoes.size(), b.tomatoes.size());
  for (std::size_t i = 0; i < a.tomatoes.size(); ++i) EXPECT_EQ(a.tomatoes[i].center, b.tomatoes[i].center);
  EXPECT_GE(a.tomatoes.size(), 24u);
  EXPECT_LE(a.tomatoes.size(), 36u);
  for (std::size_t i = 0; i < a.tomatoes.size(); ++i) {
    EXPECT_EQ(a.tomatoes[i].object_id, static_cast<int>(i + 1));
    EXPECT_NEAR(a.latent_features[i].norm(), 1.0, 1e-12);
    for (std::size_t j = 0; j < i; ++j) {
      EXPECT_GE((a.tomatoes[i].center - a.tomatoes[j].center).norm(), 2 * spec.tomato_radius - 1e-12);
    }
  }
}

TEST(Scene, NoTrusses) {
  SceneSpec spec;
  spec.n_trusses = 0;
  EXPECT_TRUE(generate_scene(spec).tomatoes.empty());
}

TEST(Scene, TooSmallWorkspaceFails) {
  SceneSpec spec;
  spec.workspace = {Vec3(-0.01, -0.01, 0.4), Vec3(0.01, 0.01, 0.41)};
  EXPECT_THROW(generate_scene(spec), GenerationError);
}

TEST(Scene, ValidateRejectsBadSpec) {
  SceneSpec spec;
  spec.tomato_radius = 0.0;
  EXPECT_THROW(generate_scene(spec), ConfigError);
  spec = SceneSpec{};
  spec.tomatoes_per_truss_min = 5;
  spec.tomatoes_per_truss_max = 4;
  EXPECT_THROW(generate_scene(spec), ConfigError);
}

TEST(Visibility, BehindCameraAndUnobstructed) {
  const Scene s = single_tomato();
  EXPECT_EQ(visible_fraction(s, eye_at(Vec3(0.5, 0, 0)), kCam, 1), 0.0);
  EXPECT_EQ(visible_fraction(s, eye_at(Vec3(-0.5, 0, 0)), kCam, 1), 1.0);
  EXPECT_EQ(visible_fraction(s, eye_at(Vec3(-2.0, 0, 0)), kCam, 1), 0.0);  // beyond range
}

TEST(Visibility, CoveringLeafHidesAll) {
  Scene s = single_tomato();
  s.leaves.push_back({Vec3(-0.2, 0, 0), Vec3(-1, 0, 0), 0.1});
  EXPECT_EQ(visible_fraction(s, eye_at(Vec3(-0.5, 0, 0)), kCam, 1), 0.0);
}

TEST(Visibility, RayDiscOracle) {
  // Each of the nine sample rays is tested against the disc directly.
  Scene s = single_tomato();
  const LeafDisc leaf{Vec3(-0.2, 0.012, 0.0), Vec3(-1, 0, 0), 0.012};
  s.leaves.push_back(leaf);
  const Vec3 eye(-0.5, 0, 0);
  int hidden = 0;
  for (const Vec3& p : visibility_samples(eye, Vec3::Zero(), 0.03)) {
    // The segment eye -> p crosses x = -0.2 at fraction 0.3 / (p.x + 0.5).
    const double s_hit = 0.3 / (p.x() + 0.5);
    const Vec3 q = eye + s_hit * (p - eye);
    if ((q - leaf.center).norm() <= leaf.radius) ++hidden;
  }
  ASSERT_GT(hidden, 0);
  ASSERT_LT(hidden, 9);
  EXPECT_DOUBLE_EQ(visible_fraction(s, eye_at(eye), kCam, 1), (9 - hidden) / 9.0);
}

TEST(Visibility, ImageBorderTruncates) {
  const Scene s = single_tomato();
  // Tomato centre just inside the horizontal frustum edge.
  const double tan_h = std::tan(0.5 * kCam.horizontal_fov);
  const double y = 0.5 * tan_h - 0.005;
  const double v = visible_fraction(s, eye_at(Vec3(-0.5, -y, 0)), kCam, 1);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
}

TEST(Visibility, MonotoneInOccluders) {
  SceneSpec spec;
  spec.seed = 3;
  spec.n_leaves = 30;
  const Scene full = generate_scene(spec);
  Scene partial = full;
  partial.leaves.resize(10);
  Scene bare = full;
  bare.leaves.clear();
  const CameraPose pose = eye_at(Vec3(-0.5, 0.05, 0.5));
  for (const Tomato& t : full.tomatoes) {
    const double a = visible_fraction(bare, pose, kCam, t.object_id);
    const double b = visible_fraction(partial, pose, kCam, t.object_id);
    const double c = visible_fraction(full, pose, kCam, t.object_id);
    EXPECT_GE(a, b);
    EXPECT_GE(b, c);
  }
}

TEST(Detections, ZeroNoiseEqualsGroundTruth) {
  SceneSpec spec;
  spec.n_leaves = 0;
  const Scene s = generate_scene(spec);
  Rng rng(5);
  const Viewpoint vp =
      simulate_detections(s, eye_at(Vec3(-0.6, 0, 0.5)), kCam, NoiseModel::zero(), rng);
  ASSERT_FALSE(vp.gt.empty());
  ASSERT_EQ(vp.detections.size(), vp.gt.size());
  for (std::size_t i = 0; i < vp.gt.size(); ++i) {
    EXPECT_EQ(vp.detections[i].position, vp.gt[i].position);
    const FeatureVector& latent = s.latent_feature(vp.gt[i].object_id);
    EXPECT_LT((*vp.detections[i].feature - latent).norm(), 1e-12);  // renormalised
  }
}

TEST(Detections, AllMissed) {
  const Scene s = single_tomato();
  NoiseModel n = NoiseModel::zero();
  n.base_miss_rate = 1.0;
  Rng rng(1);
  const Viewpoint vp = simulate_detections(s, eye_at(Vec3(-0.5, 0, 0)), kCam, n, rng);
  EXPECT_TRUE(vp.detections.empty());
  EXPECT_EQ(vp.gt.size(), 1u);
}

TEST(Detections, DetectionRateFollowsVisibility) {
  Scene s = single_tomato();
  s.leaves.push_back({Vec3(-0.2, 0.012, 0.0), Vec3(-1, 0, 0), 0.012});
  const CameraPose pose = eye_at(Vec3(-0.5, 0, 0));
  const double v = visible_fraction(s, pose, kCam, 1);
  ASSERT_GT(v, 0.0);
  ASSERT_LT(v, 1.0);
  NoiseModel n = NoiseModel::zero();
  n.base_miss_rate = 0.05;
  n.occlusion_miss_gain = 1.0;
  const double expected = std::clamp(0.95 - (1.0 - v), 0.0, 1.0);
  int hits = 0;
  const int trials = 10000;
  for (int k = 0; k < trials; ++k) {
    Rng rng(derive_seed(99, static_cast<std::uint64_t>(k)));
    hits += static_cast<int>(simulate_detections(s, pose, kCam, n, rng).detections.size());
  }
  EXPECT_NEAR(static_cast<double>(hits) / trials, expected, 0.02);
}

TEST(Detections, InsideFrustumAndDeterministic) {
  SceneSpec spec;
  spec.seed = 8;
  const Scene s = generate_scene(spec);
  NoiseModel n;
  n.false_positive_rate = 2.0;
  n.surface_bias = 0.01;
  n.occlusion_shift_gain = 1.0;
  for (int k = 0; k < 50; ++k) {
    const CameraPose pose = eye_at(Vec3(-0.5, 0.01 * k - 0.25, 0.02 * k));
    Rng a(derive_seed(4, static_cast<std::uint64_t>(k))), b(derive_seed(4, static_cast<std::uint64_t>(k)));
    const Viewpoint va = simulate_detections(s, pose, kCam, n, a);
    const Viewpoint vb = simulate_detections(s, pose, kCam, n, b);
    EXPECT_TRUE(same(va, vb));
    for (const auto& d : va.detections) {
      EXPECT_TRUE(kCam.in_frustum(pose, d.position));
      EXPECT_NEAR(d.feature->norm(), 1.0, 1e-9);
      EXPECT_GE(d.confidence, 0.0);
      EXPECT_LE(d.confidence, 1.0);
    }
    for (const auto& g : va.gt) EXPECT_GT(g.visible_fraction, 0.0);
  }
}

TEST(ViewpointGrid, Layout) {
  const std::array<double, 1> one{0.4};
  const auto single = build_viewpoint_grid(Vec3(0, 0, 0.5), one, 1, 1, Eigen::Vector2d(0.6, 0.8));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_TRUE(single[0].position.isApprox(Vec3(-0.4, 0, 0.5)));
  EXPECT_EQ(single[0].to_camera(Vec3(0, 0, 0.5)).normalized(), Vec3::UnitX());

  const std::array<double, 2> two{0.4, 0.6};
  const auto pool = build_viewpoint_grid(Vec3(0, 0, 0.5), two, 20, 30, Eigen::Vector2d(0.6, 0.8));
  ASSERT_EQ(pool.size(), 1200u);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double d = i < 600 ? 0.4 : 0.6;
    EXPECT_NEAR(pool[i].position.x(), -d, 1e-9);
  }
  EXPECT_LT(pool[0].position.y(), pool[1].position.y());
  EXPECT_LT(pool[0].position.z(), pool[30].position.z());
}

TEST(Seeds, DeriveSeedSeparatesStreams) {
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
}

}  // namespace
}  // namespace mvtrack
