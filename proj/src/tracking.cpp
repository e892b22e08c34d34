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

#include "mvtrack/tracking.hpp"

#include <cmath>
#include <string>

namespace mvtrack {

std::string_view to_string(TrackerVariant v) {
  return v == TrackerVariant::PositionOnly ? "position" : "feature";
}

TrackerVariant parse_tracker_variant(std::string_view s) {
  if (s == "position" || s == "PositionOnly") return TrackerVariant::PositionOnly;
  if (s == "feature" || s == "FeatureBased") return TrackerVariant::FeatureBased;
  throw ConfigError("unknown tracker variant '" + std::string(s) + "'");
}

void TrackerConfig::validate() const {
  if (!(std::isfinite(mahalanobis_gate) && mahalanobis_gate > 0.0)) {
    throw ConfigError("mahalanobis_gate must be positive");
  }
  if (!(cosine_gate > 0.0 && cosine_gate <= 2.0)) {
    throw ConfigError("cosine_gate must lie in (0, 2]");
  }
  if (!(feature_momentum >= 0.0 && feature_momentum <= 1.0)) {
    throw ConfigError("feature_momentum must lie in [0, 1]");
  }
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) {
    throw ConfigError("min_confidence must lie in [0, 1]");
  }
  noise.validate();
}

Tracker::Tracker(TrackerConfig config) : config_(std::move(config)) { config_.validate(); }

TrackRecord& Tracker::birth(const Detection& det, int viewpoint_index) {
  TrackRecord rec;
  rec.track_id = next_id_++;
  rec.position = det.position;
  rec.last_seen = viewpoint_index;
  rec.hit_count = 1;
  if (config_.variant == TrackerVariant::PositionOnly) {
    rec.kalman = kf_init(det.position, config_.noise);
  } else {
    rec.feature = det.feature;
  }
  tracks_.push_back(std::move(rec));
  return tracks_.back();
}

std::vector<TrackOutput> Tracker::step(const Viewpoint& vp) {
  std::vector<const Detection*> considered;
  for (const auto& det : vp.detections) {
    if (det.confidence < config_.min_confidence) continue;
    if (config_.variant == TrackerVariant::FeatureBased && !det.feature) {
      throw InputError("viewpoint " + std::to_string(vp.index) +
                       ": detection without re-ID feature given to the feature-based tracker");
    }
    considered.push_back(&det);
  }
  return config_.variant == TrackerVariant::PositionOnly ? step_position(vp, considered)
                                                         : step_feature(vp, considered);
}

std::vector<TrackOutput> Tracker::step_position(const Viewpoint& vp,
                                                std::span<const Detection* const> dets) {
  // Unmatched tracks are predicted too, so long-unseen tracks gate wider.
  for (auto& t : tracks_) t.kalman = kf_predict(t.kalman, config_.noise);

  std::vector<Gaussian3> beliefs;
  beliefs.reserve(tracks_.size());
  for (const auto& t : tracks_) {
    beliefs.push_back({t.kalman.mean, innovation_covariance(t.kalman, config_.noise)});
  }
  std::vector<Vec3> positions;
  positions.reserve(dets.size());
  for (const Detection* d : dets) positions.push_back(d->position);

  const Assignment assignment =
      solve_hungarian(mahalanobis_cost(beliefs, positions, config_.mahalanobis_gate));

  std::vector<int> det_track(dets.size(), -1);
  for (const auto& m : assignment.matches) {
    TrackRecord& t = tracks_[m.row];
    t.kalman = kf_update(t.kalman, positions[m.col], config_.noise);
    t.position = t.kalman.mean;
    t.last_seen = vp.index;
    ++t.hit_count;
    det_track[m.col] = static_cast<int>(m.row);
  }
  for (std::size_t j : assignment.unmatched_cols) {
    birth(*dets[j], vp.index);
    det_track[j] = static_cast<int>(tracks_.size() - 1);
  }

  std::vector<TrackOutput> out;
  out.reserve(dets.size());
  for (std::size_t j = 0; j < dets.size(); ++j) {
    const TrackRecord& t = tracks_[det_track[j]];
    out.push_back({vp.index, t.track_id, t.kalman.mean, dets[j]->bbox});
  }
  return out;
}

std::vector<TrackOutput> Tracker::step_feature(const Viewpoint& vp,
                                               std::span<const Detection* const> dets) {
  std::vector<FeatureVector> track_features;
  track_features.reserve(tracks_.size());
  for (const auto& t : tracks_) track_features.push_back(*t.feature);
  std::vector<FeatureVector> det_features;
  det_features.reserve(dets.size());
  for (const Detection* d : dets) det_features.push_back(*d->feature);

  const Assignment assignment =
      solve_hungarian(cosine_cost(track_features, det_features, config_.cosine_gate));

  const double m = config_.feature_momentum;
  std::vector<int> det_track(dets.size(), -1);
  for (const auto& match : assignment.matches) {
    TrackRecord& t = tracks_[match.row];
    const FeatureVector blended = (1.0 - m) * (*t.feature) + m * det_features[match.col];
    // Antipodal template and feature with m = 0.5 cancel; keep the old template.
    if (blended.norm() > 1e-12) t.feature = normalized(blended);
    t.position = dets[match.col]->position;
    t.last_seen = vp.index;
    ++t.hit_count;
    det_track[match.col] = static_cast<int>(match.row);
  }
  for (std::size_t j : assignment.unmatched_cols) {
    birth(*dets[j], vp.index);
    det_track[j] = static_cast<int>(tracks_.size() - 1);
  }

  std::vector<TrackOutput> out;
  out.reserve(dets.size());
  for (std::size_t j = 0; j < dets.size(); ++j) {
    const TrackRecord& t = tracks_[det_track[j]];
    out.push_back({vp.index, t.track_id, t.position, dets[j]->bbox});
  }
  return out;
}

std::vector<TrackOutput> tracker_run(const TrackerConfig& config,
                                     std::span<const Viewpoint> sequence) {
  for (std::size_t k = 1; k < sequence.size(); ++k) {
    if (sequence[k].index <= sequence[k - 1].index) {
      throw SequenceError("viewpoint indices must be strictly increasing (index " +
                          std::to_string(sequence[k].index) + " follows " +
                          std::to_string(sequence[k - 1].index) + ")");
    }
  }
  Tracker tracker(config);
  std::vector<TrackOutput> out;
  for (const auto& vp : sequence) {
    auto step = tracker.step(vp);
    out.insert(out.end(), step.begin(), step.end());
  }
  return out;
}

}  // namespace mvtrack
