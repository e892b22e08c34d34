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

#include <random>

#include "mvtrack/metrics.hpp"
#include "oracles.hpp"

namespace mvtrack {
namespace {

const SimilarityConfig kCfg{};

EvalObject obj(int id, const Vec3& p) { return {id, p, {}}; }

std::vector<EvalFrame> perfect(int objects, int frames) {
  std::vector<EvalFrame> out;
  for (int t = 0; t < frames; ++t) {
    EvalFrame f;
    f.viewpoint_index = t;
    for (int o = 1; o <= objects; ++o) {
      f.gt.push_back(obj(o, Vec3(0.2 * o, 0, 0)));
      f.pred.push_back(obj(100 + o, Vec3(0.2 * o, 0, 0)));
    }
    out.push_back(f);
  }
  return out;
}

TEST(Similarity, Distance3D) {
  EXPECT_DOUBLE_EQ(similarity(Vec3::Zero(), Vec3::Zero(), kCfg), 1.0);
  EXPECT_DOUBLE_EQ(similarity(Vec3::Zero(), Vec3(0.1, 0, 0), kCfg), 0.0);
  EXPECT_NEAR(similarity(Vec3::Zero(), Vec3(0.025, 0, 0), kCfg), 0.75, 1e-12);
  EXPECT_THROW(similarity(Vec3::Zero(), BBox2D{0, 0, 1, 1}, kCfg), InputError);
}

TEST(Similarity, IoU2D) {
  SimilarityConfig c;
  c.mode = SimilarityMode::IoU2D;
  EXPECT_NEAR(similarity(BBox2D{0, 0, 2, 2}, BBox2D{1, 0, 3, 2}, c), 1.0 / 3.0, 1e-12);
  EXPECT_THROW(similarity(Vec3::Zero(), Vec3::Zero(), c), InputError);
}

TEST(Hota, PerfectIsHundred) {
  const auto h = evaluate_hota(perfect(3, 4), kCfg);
  EXPECT_NEAR(h.hota, 100.0, 1e-9);
  EXPECT_NEAR(h.det_a, 100.0, 1e-9);
  EXPECT_NEAR(h.ass_a, 100.0, 1e-9);
  EXPECT_NEAR(h.loc_a, 100.0, 1e-9);
  EXPECT_FALSE(h.vacuous);
}

TEST(Hota, VacuousAndOneSided) {
  const std::vector<EvalFrame> none{EvalFrame{}};
  const auto v = evaluate_hota(none, kCfg);
  EXPECT_TRUE(v.vacuous);
  EXPECT_EQ(v.hota, 100.0);

  std::vector<EvalFrame> only_pred(1);
  only_pred[0].pred.push_back(obj(1, Vec3::Zero()));
  const auto p = evaluate_hota(only_pred, kCfg);
  EXPECT_FALSE(p.vacuous);
  EXPECT_EQ(p.det_a, 0.0);
  EXPECT_EQ(p.hota, 0.0);
}

TEST(Hota, AllBeyondAlphaIsZero) {
  auto frames = perfect(2, 3);
  for (auto& f : frames) {
    for (auto& p : f.pred) p.position += Vec3(1.0, 0, 0);
  }
  EXPECT_EQ(evaluate_hota(frames, kCfg).hota, 0.0);
}

TEST(Hota, SwappedIdsMatchOracle) {
  std::vector<EvalFrame> frames(2);
  for (int t = 0; t < 2; ++t) {
    frames[t].viewpoint_index = t;
    frames[t].gt = {obj(1, Vec3(0, 0, 0)), obj(2, Vec3(0.5, 0, 0))};
    frames[t].pred = {obj(t == 0 ? 1 : 2, Vec3(0, 0, 0)), obj(t == 0 ? 2 : 1, Vec3(0.5, 0, 0))};
  }
  const auto h = evaluate_hota(frames, kCfg);
  const auto o = oracle::hota_by_enumeration(frames, kCfg);
  EXPECT_NEAR(h.hota, o.hota, 1e-12);
  EXPECT_NEAR(h.ass_a, o.ass_a, 1e-12);
  EXPECT_NEAR(h.det_a, 100.0, 1e-12);
  EXPECT_NEAR(h.ass_a, 100.0 / 3.0, 1e-12);  // each pair: 1 / (2 + 2 - 1)
}

TEST(Hota, MatchesOracleOnRandomSequences) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto frames = oracle::random_small_sequence(rng);
    const auto h = evaluate_hota(frames, kCfg);
    const auto o = oracle::hota_by_enumeration(frames, kCfg);
    EXPECT_NEAR(h.hota, o.hota, 1e-9) << "trial " << trial;
    EXPECT_NEAR(h.det_a, o.det_a, 1e-9) << "trial " << trial;
    EXPECT_NEAR(h.ass_a, o.ass_a, 1e-9) << "trial " << trial;
    EXPECT_NEAR(h.loc_a, o.loc_a, 1e-9) << "trial " << trial;
  }
}

TEST(Hota, InvariantUnderPredictionRelabel) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    auto frames = oracle::random_small_sequence(rng);
    const auto a = evaluate_hota(frames, kCfg);
    for (auto& f : frames) {
      for (auto& p : f.pred) p.id = 1000 - 7 * p.id;
    }
    const auto b = evaluate_hota(frames, kCfg);
    EXPECT_NEAR(a.hota, b.hota, 1e-12);
    EXPECT_NEAR(a.ass_a, b.ass_a, 1e-12);
    EXPECT_NEAR(a.det_a, b.det_a, 1e-12);
  }
}

TEST(Hota, BracketedByDetAAndAssA) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 200; ++trial) {
    const auto h = evaluate_hota(oracle::random_small_sequence(rng), kCfg);
    for (std::size_t a = 0; a < kNumAlphas; ++a) {
      const double lo = std::min(h.det_a_alpha[a], h.ass_a_alpha[a]);
      const double hi = std::max(h.det_a_alpha[a], h.ass_a_alpha[a]);
      EXPECT_GE(h.hota_alpha[a], lo - 1e-12);
      EXPECT_LE(h.hota_alpha[a], hi + 1e-12);
    }
    EXPECT_GE(h.hota, 0.0);
    EXPECT_LE(h.hota, 100.0 + 1e-9);
  }
}

TEST(Hota, Pure) {
  std::mt19937_64 rng(79);
  const auto frames = oracle::random_small_sequence(rng);
  const auto a = evaluate_hota(frames, kCfg), b = evaluate_hota(frames, kCfg);
  EXPECT_EQ(a.hota, b.hota);
  EXPECT_EQ(a.loc_a, b.loc_a);
}

TEST(Hota, RejectsDuplicateIds) {
  std::vector<EvalFrame> frames(1);
  frames[0].gt = {obj(1, Vec3::Zero()), obj(1, Vec3::Ones())};
  EXPECT_THROW(evaluate_hota(frames, kCfg), InputError);
}

TEST(Clear, PerfectAndOneMiss) {
  const auto p = evaluate_clear(perfect(2, 5), kCfg);
  EXPECT_DOUBLE_EQ(p.mota, 100.0);
  EXPECT_EQ(p.idsw, 0);

  auto frames = perfect(1, 10);
  frames[4].pred.clear();
  const auto c = evaluate_clear(frames, kCfg);
  EXPECT_EQ(c.gt_total, 10);
  EXPECT_EQ(c.fn, 1);
  EXPECT_DOUBLE_EQ(c.mota, 90.0);
}

TEST(Clear, DoubleIdChange) {
  auto frames = perfect(1, 3);
  frames[1].pred[0].id = 7;
  frames[2].pred[0].id = 8;
  EXPECT_EQ(evaluate_clear(frames, kCfg).idsw, 2);
}

TEST(Clear, ReturningIdAfterGapCountsOnce) {
  auto frames = perfect(1, 4);
  frames[1].pred.clear();
  frames[2].pred[0].id = 9;
  const auto c = evaluate_clear(frames, kCfg);
  EXPECT_EQ(c.idsw, 2);  // 101 -> 9 -> 101
}

TEST(Clear, PersistenceKeepsPreviousPairing) {
  // Frame 1 prefers pred 2 by similarity, but pred 1 is still above threshold.
  std::vector<EvalFrame> frames(2);
  frames[0].viewpoint_index = 0;
  frames[0].gt = {obj(1, Vec3::Zero())};
  frames[0].pred = {obj(1, Vec3::Zero())};
  frames[1].viewpoint_index = 1;
  frames[1].gt = {obj(1, Vec3::Zero())};
  frames[1].pred = {obj(1, Vec3(0.03, 0, 0)), obj(2, Vec3::Zero())};
  const auto c = evaluate_clear(frames, kCfg);
  EXPECT_EQ(c.idsw, 0);
  EXPECT_EQ(c.fp, 1);
}

TEST(Clear, UndefinedWithoutGroundTruth) {
  std::vector<EvalFrame> frames(1);
  frames[0].pred = {obj(1, Vec3::Zero())};
  const auto c = evaluate_clear(frames, kCfg);
  EXPECT_FALSE(c.defined);
  EXPECT_TRUE(std::isnan(c.mota));
}

// A correct prediction carries its object's id and lies within the CLEAR
// threshold. Ids are kept consistent: with id noise, dropping a correct
// prediction between two switches (Y, X, Y) removes both switches.
TEST(Clear, RemovingCorrectPredictionNeverIncreasesMota) {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto frames = oracle::random_separated_sequence(rng);
    const auto before = evaluate_clear(frames, kCfg);
    std::vector<std::pair<std::size_t, std::size_t>> correct;
    for (std::size_t f = 0; f < frames.size(); ++f) {
      for (std::size_t j = 0; j < frames[f].pred.size(); ++j) {
        for (const auto& g : frames[f].gt) {
          if (g.id == frames[f].pred[j].id &&
              similarity(g.position, frames[f].pred[j].position, kCfg) >= kDefaultClearThreshold) {
            correct.push_back({f, j});
          }
        }
      }
    }
    if (correct.empty()) continue;
    const auto [f, j] = correct[rng() % correct.size()];
    frames[f].pred.erase(frames[f].pred.begin() + static_cast<std::ptrdiff_t>(j));
    EXPECT_LE(evaluate_clear(frames, kCfg).mota, before.mota + 1e-9) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 250);
}

TEST(Clear, RemovalBetweenSwitchesCanRaiseMota) {
  // Predictions Y, X, Y on one object: dropping X trades two switches for one miss.
  std::vector<EvalFrame> frames(3);
  for (int t = 0; t < 3; ++t) {
    frames[t].viewpoint_index = t;
    frames[t].gt = {{1, Vec3::Zero(), {}}};
    frames[t].pred = {{t == 1 ? 1 : 2, Vec3::Zero(), {}}};
  }
  const double before = evaluate_clear(frames, kCfg).mota;
  frames[1].pred.clear();
  EXPECT_NEAR(before, 100.0 * (1.0 - 2.0 / 3.0), 1e-9);
  EXPECT_NEAR(evaluate_clear(frames, kCfg).mota, 100.0 * (1.0 - 1.0 / 3.0), 1e-9);
}

TEST(EvalFrames, AlignsByIndex) {
  std::vector<Viewpoint> gt(2);
  gt[0].index = 0;
  gt[1].index = 3;
  gt[1].gt.push_back({1, Vec3::Zero(), 1.0, {}});
  const std::vector<TrackOutput> pred{{3, 5, Vec3::Zero(), {}}, {4, 6, Vec3::Ones(), {}}};
  const auto frames = make_eval_frames(gt, pred);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[1].viewpoint_index, 3);
  EXPECT_EQ(frames[1].gt.size(), 1u);
  EXPECT_EQ(frames[1].pred.size(), 1u);
  EXPECT_TRUE(frames[2].gt.empty());
}

}  // namespace
}  // namespace mvtrack
