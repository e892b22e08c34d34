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

#include <map>
#include <random>

#include "mvtrack/tracking.hpp"

namespace mvtrack {
namespace {

FeatureVector unit(std::size_t k, std::size_t dim = 8) {
  FeatureVector v = FeatureVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(k)) = 1.0;
  return v;
}

Detection det(const Vec3& p, std::optional<FeatureVector> f = std::nullopt, double conf = 0.9) {
  Detection d;
  d.position = p;
  d.bbox = {0, 0, 10, 10};
  d.confidence = conf;
  d.feature = std::move(f);
  return d;
}

Viewpoint view(int index, std::vector<Detection> dets) {
  Viewpoint vp;
  vp.index = index;
  vp.detections = std::move(dets);
  return vp;
}

TrackerConfig config(TrackerVariant v) {
  TrackerConfig c;
  c.variant = v;
  return c;
}

TEST(Tracker, NewState) {
  const Tracker t(config(TrackerVariant::FeatureBased));
  EXPECT_TRUE(t.tracks().empty());
  EXPECT_EQ(t.next_id(), 1);
  EXPECT_EQ(t.config().variant, TrackerVariant::FeatureBased);
}

TEST(Tracker, RejectsInvalidConfig) {
  TrackerConfig c = config(TrackerVariant::PositionOnly);
  c.mahalanobis_gate = 0.0;
  EXPECT_THROW(Tracker{c}, ConfigError);
  c = config(TrackerVariant::FeatureBased);
  c.feature_momentum = 1.5;
  EXPECT_THROW(Tracker{c}, ConfigError);
}

TEST(Tracker, AllBirths) {
  Tracker t(config(TrackerVariant::PositionOnly));
  const auto out = t.step(view(0, {det(Vec3(0, 0, 0)), det(Vec3(0.5, 0, 0))}));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].track_id, 1);
  EXPECT_EQ(out[1].track_id, 2);
  EXPECT_EQ(t.next_id(), 3);
}

TEST(Tracker, PositionMatchWithinGate) {
  Tracker t(config(TrackerVariant::PositionOnly));
  t.step(view(0, {det(Vec3::Zero())}));
  const auto out = t.step(view(1, {det(Vec3(0, 0, 0.001))}));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].track_id, 1);
  EXPECT_EQ(t.tracks().front().hit_count, 2);
}

TEST(Tracker, PositionBeyondGateBirths) {
  Tracker t(config(TrackerVariant::PositionOnly));
  t.step(view(0, {det(Vec3::Zero())}));
  const auto out = t.step(view(1, {det(Vec3(1.0, 0, 0))}));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].track_id, 2);
  EXPECT_EQ(t.tracks().size(), 2u);
}

TEST(Tracker, FeatureMatchAndMomentum) {
  TrackerConfig c = config(TrackerVariant::FeatureBased);
  c.feature_momentum = 0.5;
  Tracker t(c);
  t.step(view(0, {det(Vec3::Zero(), unit(0))}));
  FeatureVector g = (unit(0) + 0.2 * unit(1)).normalized();
  const auto out = t.step(view(1, {det(Vec3(0.3, 0, 0), g)}));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].track_id, 1);
  const TrackRecord& r = t.tracks().front();
  const FeatureVector expected = (0.5 * unit(0) + 0.5 * g).normalized();
  EXPECT_NEAR((*r.feature - expected).norm(), 0.0, 1e-12);
  EXPECT_EQ(r.position, Vec3(0.3, 0, 0));
}

TEST(Tracker, FeatureRequiresFeature) {
  Tracker t(config(TrackerVariant::FeatureBased));
  try {
    t.step(view(7, {det(Vec3::Zero())}));
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find('7'), std::string::npos);
  }
}

TEST(Tracker, LowConfidenceDropped) {
  Tracker t(config(TrackerVariant::PositionOnly));
  const auto out = t.step(view(0, {det(Vec3::Zero(), std::nullopt, 0.1), det(Vec3::Ones())}));
  EXPECT_EQ(out.size(), 1u);
}

TEST(Tracker, PersistenceAcrossGaps) {
  for (TrackerVariant v : {TrackerVariant::PositionOnly, TrackerVariant::FeatureBased}) {
    Tracker t(config(v));
    t.step(view(0, {det(Vec3::Zero(), unit(0))}));
    for (int k = 1; k <= 10; ++k) t.step(view(k, {det(Vec3(1, 1, 1), unit(1))}));
    const auto out = t.step(view(11, {det(Vec3::Zero(), unit(0))}));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].track_id, 1);
  }
}

TEST(TrackerRun, EmptyAndSingle) {
  const TrackerConfig c = config(TrackerVariant::PositionOnly);
  EXPECT_TRUE(tracker_run(c, {}).empty());
  const std::vector<Viewpoint> one{view(0, {det(Vec3::Zero()), det(Vec3(1, 0, 0)), det(Vec3(2, 0, 0))})};
  const auto out = tracker_run(c, one);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_NE(out[0].track_id, out[1].track_id);
  EXPECT_NE(out[1].track_id, out[2].track_id);
}

TEST(TrackerRun, StaticObjectKeepsId) {
  std::vector<Viewpoint> seq;
  for (int k = 0; k < 3; ++k) seq.push_back(view(k, {det(Vec3(0.1, 0.2, 0.3), unit(2))}));
  for (TrackerVariant v : {TrackerVariant::PositionOnly, TrackerVariant::FeatureBased}) {
    const auto out = tracker_run(config(v), seq);
    ASSERT_EQ(out.size(), 3u);
    for (const auto& o : out) EXPECT_EQ(o.track_id, 1);
  }
}

TEST(TrackerRun, RejectsNonMonotoneIndices) {
  const std::vector<Viewpoint> seq{view(1, {}), view(1, {})};
  EXPECT_THROW(tracker_run(config(TrackerVariant::PositionOnly), seq), SequenceError);
}

TEST(TrackerRun, IdsIncreaseAndOutputsCoverDetections) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::uniform_int_distribution<int> count(0, 5);
  for (TrackerVariant v : {TrackerVariant::PositionOnly, TrackerVariant::FeatureBased}) {
    std::vector<Viewpoint> seq;
    for (int k = 0; k < 30; ++k) {
      std::vector<Detection> dets;
      const int n = count(rng);
      for (int i = 0; i < n; ++i) {
        FeatureVector f(8);
        for (int j = 0; j < 8; ++j) f(j) = u(rng);
        dets.push_back(det(Vec3(u(rng), u(rng), u(rng)), FeatureVector(f.normalized())));
      }
      seq.push_back(view(2 * k, dets));
    }
    Tracker t(config(v));
    int max_id = 0;
    for (const auto& vp : seq) {
      const auto out = t.step(vp);
      EXPECT_EQ(out.size(), vp.detections.size());
      std::map<int, int> seen;
      for (const auto& o : out) {
        EXPECT_EQ(++seen[o.track_id], 1);
        EXPECT_LE(o.track_id, t.next_id() - 1);
      }
      // Births take the next ids in order.
      for (const auto& r : t.tracks()) max_id = std::max(max_id, r.track_id);
      EXPECT_EQ(max_id, t.next_id() - 1);
      EXPECT_EQ(static_cast<int>(t.tracks().size()), max_id);
    }
  }
}

}  // namespace
}  // namespace mvtrack
