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

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mvtrack/assignment.hpp"
#include "mvtrack/core.hpp"
#include "mvtrack/estimation.hpp"

namespace mvtrack {

/// PositionOnly: Kalman-filtered 3D positions, Mahalanobis costs.
/// FeatureBased: running re-ID template per track, cosine costs.
enum class TrackerVariant { PositionOnly, FeatureBased };

std::string_view to_string(TrackerVariant v);
/// Accepts "position"/"feature" and the enum spellings.
TrackerVariant parse_tracker_variant(std::string_view s);

struct TrackerConfig {
  TrackerVariant variant = TrackerVariant::PositionOnly;
  double mahalanobis_gate = kDefaultMahalanobisGate;
  double cosine_gate = kDefaultCosineGate;
  double feature_momentum = 0.1;
  double min_confidence = 0.5;
  NoiseParams noise;

  void validate() const;
};

struct TrackRecord {
  int track_id = 0;
  KalmanState kalman;  // PositionOnly
  Vec3 position = Vec3::Zero();
  std::optional<FeatureVector> feature;  // FeatureBased
  int last_seen = 0;
  int hit_count = 1;
};

/// Single-owner tracker state. Tracks are never deleted and ids are never
/// reused: the monitored objects are static and re-enter the field of view.
class Tracker {
 public:
  /// Throws ConfigError for an invalid configuration.
  explicit Tracker(TrackerConfig config);

  /// Associates one viewpoint's detections. Returns one output per considered
  /// detection (confidence >= min_confidence), matched or newly born.
  /// Throws InputError if a FeatureBased detection lacks a feature.
  std::vector<TrackOutput> step(const Viewpoint& vp);

  const std::vector<TrackRecord>& tracks() const noexcept { return tracks_; }
  int next_id() const noexcept { return next_id_; }
  const TrackerConfig& config() const noexcept { return config_; }

 private:
  std::vector<TrackOutput> step_position(const Viewpoint& vp,
                                         std::span<const Detection* const> dets);
  std::vector<TrackOutput> step_feature(const Viewpoint& vp,
                                        std::span<const Detection* const> dets);
  TrackRecord& birth(const Detection& det, int viewpoint_index);

  TrackerConfig config_;
  std::vector<TrackRecord> tracks_;
  int next_id_ = 1;
};

/// Runs a fresh tracker over the sequence. Throws SequenceError unless
/// viewpoint indices are strictly increasing.
std::vector<TrackOutput> tracker_run(const TrackerConfig& config,
                                     std::span<const Viewpoint> sequence);

}  // namespace mvtrack
