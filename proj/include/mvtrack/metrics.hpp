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

#pragma once

#include <array>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "mvtrack/core.hpp"

namespace mvtrack {

enum class SimilarityMode { Distance3D, IoU2D };

std::string_view to_string(SimilarityMode m);
SimilarityMode parse_similarity_mode(std::string_view s);

struct SimilarityConfig {
  SimilarityMode mode = SimilarityMode::Distance3D;
  double d_max = 0.10;  // meters, Distance3D cutoff

  void validate() const;
};

using Shape = std::variant<Vec3, BBox2D>;

/// Distance3D: max(0, 1 - |gt - pred| / d_max). IoU2D: iou_2d.
/// Throws InputError when an operand does not match the mode.
double similarity(const Shape& gt, const Shape& pred, const SimilarityConfig& cfg);

/// A labelled object in one frame, either ground truth or hypothesis.
struct EvalObject {
  int id = 0;
  Vec3 position = Vec3::Zero();
  BBox2D bbox;
};

struct EvalFrame {
  int viewpoint_index = 0;
  std::vector<EvalObject> gt;
  std::vector<EvalObject> pred;
};

/// Aligns ground truth (from viewpoints) with tracker outputs by viewpoint
/// index. Frames are sorted by index; an index seen on only one side yields a
/// frame with the other side empty.
std::vector<EvalFrame> make_eval_frames(std::span<const Viewpoint> gt_sequence,
                                        std::span<const TrackOutput> predictions);

/// Localization thresholds 0.05, 0.10, ..., 0.95.
inline constexpr std::size_t kNumAlphas = 19;
std::array<double, kNumAlphas> hota_alphas();

struct HotaResult {
  // Percentages averaged over the alpha grid.
  double hota = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
  double loc_a = 0.0;
  /// Both sequences empty; scores are reported as 100.
  bool vacuous = false;
  // Per-alpha fractions in [0, 1].
  std::array<double, kNumAlphas> hota_alpha{};
  std::array<double, kNumAlphas> det_a_alpha{};
  std::array<double, kNumAlphas> ass_a_alpha{};
  std::array<int, kNumAlphas> tp{};
};

HotaResult evaluate_hota(std::span<const EvalFrame> frames, const SimilarityConfig& cfg);

struct ClearResult {
  double mota = 0.0;  // percentage; NaN when undefined
  int idsw = 0;
  int fn = 0;
  int fp = 0;
  int tp = 0;
  int gt_total = 0;
  /// False when there is no ground truth at all (MOTA undefined).
  bool defined = true;
};

inline constexpr double kDefaultClearThreshold = 0.5;

ClearResult evaluate_clear(std::span<const EvalFrame> frames, const SimilarityConfig& cfg,
                           double clear_threshold = kDefaultClearThreshold);

/// One row of the results table.
struct MetricsReport {
  double hota = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
  double loc_a = 0.0;
  double mota = 0.0;
  int idsw = 0;
  bool vacuous = false;
  bool mota_defined = true;
};

MetricsReport evaluate_all(std::span<const EvalFrame> frames, const SimilarityConfig& cfg,
                           double clear_threshold = kDefaultClearThreshold);

}  // namespace mvtrack
