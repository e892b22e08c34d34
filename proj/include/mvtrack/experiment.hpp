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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvtrack/metrics.hpp"
#include "mvtrack/planning.hpp"
#include "mvtrack/simulation.hpp"
#include "mvtrack/tracking.hpp"

namespace mvtrack {

struct PlannerParams {
  std::size_t n_select = 100;
  int grid_rows = 20;
  int grid_cols = 30;
  std::vector<double> distances{0.4, 0.6};
  Eigen::Vector2d extent{0.6, 0.8};  // horizontal, vertical (m)
  double resolution = 0.02;          // occupancy voxel side (m)

  void validate() const;
};

// Experiment defaults calibrated on the synthetic greenhouse; the module
// structs keep their generic defaults.
inline TrackerConfig tracker_defaults(TrackerVariant v) {
  TrackerConfig c;
  c.variant = v;
  if (v == TrackerVariant::PositionOnly) c.noise.process_q = 2.5e-5;
  if (v == TrackerVariant::FeatureBased) c.cosine_gate = 0.5;
  return c;
}

inline SceneSpec scene_defaults() {
  SceneSpec s;
  s.n_leaves = 40;
  s.leaf_radius = 0.06;
  s.leaf_depth = Eigen::Vector2d(-0.35, -0.1);
  return s;
}

inline NoiseModel noise_defaults() {
  NoiseModel n;
  n.feature_sigma = 0.1;
  n.surface_bias = 0.01;
  n.occlusion_shift_gain = 1.0;
  return n;
}

struct ExperimentConfig {
  SceneSpec scene = scene_defaults();
  NoiseModel noise = noise_defaults();
  CameraModel camera;
  TrackerConfig position_tracker = tracker_defaults(TrackerVariant::PositionOnly);
  TrackerConfig feature_tracker = tracker_defaults(TrackerVariant::FeatureBased);
  SimilarityConfig similarity;
  double clear_threshold = kDefaultClearThreshold;
  PlannerParams planner;
  int repeats = 5;
  std::uint64_t base_seed = 0;
  /// Worker threads for independent repeats; results do not depend on it.
  int jobs = 1;

  void validate() const;
};

/// Noise-free input with tracker gates sized for exact measurements. Default
/// gates are wide enough to let a newly seen object claim the track of an
/// unseen neighbour even when measurements are exact.
inline ExperimentConfig exact_measurement_config(ExperimentConfig c) {
  c.noise = NoiseModel::zero();
  c.position_tracker.noise = NoiseParams{1e-10, 1e-8, 1e-8};
  c.feature_tracker.cosine_gate = 0.05;
  return c;
}

inline constexpr std::array<PlanStrategy, 3> kSequenceTypes{PlanStrategy::Sort,
                                                            PlanStrategy::Random,
                                                            PlanStrategy::Active};
inline constexpr std::array<TrackerVariant, 2> kTrackerVariants{TrackerVariant::PositionOnly,
                                                                TrackerVariant::FeatureBased};

// Seed policy: each source of randomness has its own stream per repeat.
std::uint64_t scene_seed(std::uint64_t base, int repeat);
std::uint64_t sampling_seed(std::uint64_t base, int repeat);
std::uint64_t noise_seed(std::uint64_t base, int repeat);

struct ResultRow {
  PlanStrategy sequence_type = PlanStrategy::Sort;
  TrackerVariant tracker = TrackerVariant::PositionOnly;
  int repeat = 0;
  std::uint64_t seed = 0;  // scene seed of the repeat
  MetricsReport metrics;
  bool failed = false;
  std::string error;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
};

/// Candidate viewpoint pool around the plant centre of a scene.
std::vector<CameraPose> build_pool(const Scene& scene, const PlannerParams& planner);

/// Pool indices for one strategy.
std::vector<std::size_t> plan_sequence(PlanStrategy strategy, const Scene& scene,
                                       const std::vector<CameraPose>& pool,
                                       const ExperimentConfig& cfg, std::uint64_t sampling_seed);

/// Simulates detections along an ordering. Viewpoint k gets index k; its
/// noise stream is derived from (noise_seed, pool index) so a pose yields
/// the same detections in every ordering.
std::vector<Viewpoint> simulate_sequence(const Scene& scene, const std::vector<CameraPose>& pool,
                                         const std::vector<std::size_t>& order,
                                         const CameraModel& cam, const NoiseModel& noise,
                                         std::uint64_t noise_seed);

/// Full protocol: repeats x sequence types x tracker variants. A failing
/// (repeat, sequence type) cell is recorded as failed rows; the run goes on.
ResultsTable run_experiment(const ExperimentConfig& cfg);

struct AggregateRow {
  PlanStrategy sequence_type = PlanStrategy::Sort;
  TrackerVariant tracker = TrackerVariant::PositionOnly;
  double hota = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
  double loc_a = 0.0;
  double mota = 0.0;
  double idsw = 0.0;
  int completed = 0;
  int failed = 0;
};

/// Mean over repeats, one row per (sequence type, tracker), always all six.
std::vector<AggregateRow> aggregate(const ResultsTable& table);

const AggregateRow& find_cell(const std::vector<AggregateRow>& rows, PlanStrategy s,
                              TrackerVariant v);

struct ResultPaths {
  std::filesystem::path rows_csv;
  std::filesystem::path aggregate_csv;
  std::filesystem::path summary_json;

  static ResultPaths in_directory(const std::filesystem::path& dir);
};

/// Writes the per-row CSV, the aggregate table and a JSON summary.
/// Throws IoError naming the path on failure.
void emit_results(const ResultsTable& table, const ResultPaths& paths);

std::string rows_csv(const ResultsTable& table);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

}  // namespace mvtrack
