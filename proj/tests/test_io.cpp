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

#include <filesystem>
#include <sstream>

#include "mvtrack/io.hpp"

namespace mvtrack {
namespace {

namespace fs = std::filesystem;

std::vector<Viewpoint> sample_sequence() {
  SceneSpec spec;
  spec.seed = 21;
  const Scene scene = generate_scene(spec);
  NoiseModel noise;
  noise.false_positive_rate = 1.0;
  std::vector<Viewpoint> seq;
  for (int k = 0; k < 6; ++k) {
    CameraPose pose;
    pose.position = Vec3(-0.5, 0.1 * k - 0.3, 0.1 + 0.15 * k);
    pose.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(0.01 * k, Vec3::UnitZ()));
    Rng rng(derive_seed(1, static_cast<std::uint64_t>(k)));
    Viewpoint vp = simulate_detections(scene, pose, CameraModel{}, noise, rng);
    vp.index = 3 * k;
    seq.push_back(std::move(vp));
  }
  return seq;
}

void expect_equal(const std::vector<Viewpoint>& a, const std::vector<Viewpoint>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].index, b[i].index);
    EXPECT_EQ(a[i].pose.position, b[i].pose.position);
    EXPECT_EQ(a[i].pose.orientation.coeffs(), b[i].pose.orientation.coeffs());
    ASSERT_EQ(a[i].detections.size(), b[i].detections.size());
    for (std::size_t j = 0; j < a[i].detections.size(); ++j) {
      const Detection& x = a[i].detections[j];
      const Detection& y = b[i].detections[j];
      EXPECT_EQ(x.position, y.position);
      EXPECT_EQ(x.confidence, y.confidence);
      EXPECT_EQ(x.class_id, y.class_id);
      EXPECT_EQ(x.bbox.x_min, y.bbox.x_min);
      EXPECT_EQ(x.bbox.y_max, y.bbox.y_max);
      ASSERT_EQ(x.feature.has_value(), y.feature.has_value());
      if (x.feature) {
        EXPECT_EQ(*x.feature, *y.feature);
      }
    }
    ASSERT_EQ(a[i].gt.size(), b[i].gt.size());
    for (std::size_t j = 0; j < a[i].gt.size(); ++j) {
      EXPECT_EQ(a[i].gt[j].object_id, b[i].gt[j].object_id);
      EXPECT_EQ(a[i].gt[j].position, b[i].gt[j].position);
      EXPECT_EQ(a[i].gt[j].visible_fraction, b[i].gt[j].visible_fraction);
      EXPECT_EQ(a[i].gt[j].bbox.x_max, b[i].gt[j].bbox.x_max);
    }
  }
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mvtrack_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(Sequence, RoundTripIsLossless) {
  const auto seq = sample_sequence();
  std::stringstream buf;
  write_sequence(buf, seq);
  const auto back = read_sequence(buf);
  expect_equal(seq, back);

  std::stringstream again;
  write_sequence(again, back);
  std::stringstream first;
  write_sequence(first, seq);
  EXPECT_EQ(first.str(), again.str());
}

TEST(Sequence, EmptyHasHeaderOnly) {
  std::stringstream buf;
  write_sequence(buf, std::vector<Viewpoint>{});
  const std::string text = buf.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_NE(text.find("mvtrack-sequence"), std::string::npos);
  EXPECT_TRUE(read_sequence(buf).empty());
}

TEST(Sequence, TruncatedLineNamesLine) {
  std::stringstream buf;
  write_sequence(buf, sample_sequence());
  std::string text = buf.str();
  text.resize(text.size() - 20);
  std::stringstream in(text);
  try {
    read_sequence(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
  }
}

TEST(Sequence, MissingHeader) {
  std::stringstream in("");
  EXPECT_THROW(read_sequence(in), ParseError);
}

TEST(Sequence, FeatureWidthMismatch) {
  std::stringstream buf;
  write_sequence(buf, sample_sequence());
  std::string text = buf.str();
  const std::string from = "\"feature_dim\":32";
  const auto pos = text.find(from);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, from.size(), "\"feature_dim\":16");
  std::stringstream in(text);
  EXPECT_THROW(read_sequence(in), SchemaError);

  std::stringstream out;
  EXPECT_THROW(write_sequence(out, sample_sequence(), 16), SchemaError);
}

TEST_F(TempDir, TrackOutputsAndOrders) {
  const std::vector<TrackOutput> outs{{0, 1, Vec3(0.1, 0.2, 0.3), {1, 2, 3, 4}},
                                      {2, 5, Vec3(-1e-17, 1.0 / 3.0, 7.0), {0, 0, 0, 0}}};
  write_track_outputs(dir_ / "t.csv", outs);
  const auto back = read_track_outputs(dir_ / "t.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].track_id, 5);
  EXPECT_EQ(back[1].position, outs[1].position);
  EXPECT_EQ(back[0].bbox.y_max, 4.0);

  write_text(dir_ / "bad.csv", "viewpoint_index,track_id,x,y,z,x_min,y_min,x_max,y_max\n1,2,3\n");
  try {
    read_track_outputs(dir_ / "bad.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }

  const std::vector<std::size_t> order{4, 0, 1199};
  write_order(dir_ / "o.txt", order);
  EXPECT_EQ(read_order(dir_ / "o.txt"), order);
  write_text(dir_ / "bad.txt", "1\nx\n");
  EXPECT_THROW(read_order(dir_ / "bad.txt"), ParseError);
  EXPECT_THROW(read_text(dir_ / "missing.txt"), IoError);
}

TEST(Config, DefaultRoundTrip) {
  const ExperimentConfig a;
  const std::string text = dump_config(a);
  EXPECT_EQ(dump_config(parse_config(text)), text);
}

TEST(Config, CheckedInDefaultMatchesBuiltIn) {
  const fs::path p = fs::path(MVTRACK_SOURCE_DIR) / "configs" / "default.json";
  EXPECT_EQ(dump_config(read_config(p)), dump_config(ExperimentConfig{}));
}

TEST(Config, PartialOverrides) {
  const ExperimentConfig c = parse_config(R"({"repeats": 2, "noise": {"position_sigma": 0.02}})");
  EXPECT_EQ(c.repeats, 2);
  EXPECT_EQ(c.noise.position_sigma, 0.02);
  EXPECT_EQ(c.noise.feature_sigma, ExperimentConfig{}.noise.feature_sigma);
  EXPECT_EQ(c.position_tracker.variant, TrackerVariant::PositionOnly);
  EXPECT_EQ(c.feature_tracker.variant, TrackerVariant::FeatureBased);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(R"({"repeat": 2})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"scene": {"n_tomatoes": 3}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"repeats": 0})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"trackers": {"feature": {"cosine_gate": 3.0}}})"), ConfigError);
  EXPECT_THROW(parse_config("{"), ConfigError);
}

TEST(SceneIo, RoundTrip) {
  SceneSpec spec;
  spec.seed = 5;
  const Scene s = generate_scene(spec);
  const Scene back = parse_scene(dump_scene(s));
  ASSERT_EQ(back.tomatoes.size(), s.tomatoes.size());
  ASSERT_EQ(back.leaves.size(), s.leaves.size());
  for (std::size_t i = 0; i < s.tomatoes.size(); ++i) {
    EXPECT_EQ(back.tomatoes[i].center, s.tomatoes[i].center);
    EXPECT_EQ(back.latent_features[i], s.latent_features[i]);
  }
  EXPECT_EQ(back.roi.min, s.roi.min);
  EXPECT_EQ(dump_scene(back), dump_scene(s));

  NoiseModel n;
  n.surface_bias = 0.013;
  EXPECT_EQ(dump_noise_model(parse_noise_model(dump_noise_model(n))), dump_noise_model(n));
}

}  // namespace
}  // namespace mvtrack
