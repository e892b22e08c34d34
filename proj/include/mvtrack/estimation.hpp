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

#include "mvtrack/core.hpp"

namespace mvtrack {

// Constant-position Kalman filter over a 3D point (F = I, H = I). Objects are
// static in the robot frame; only the camera moves.

struct KalmanState {
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Identity();
};

/// Per-axis variances in m^2.
struct NoiseParams {
  double process_q = 1e-6;
  double measurement_r = 1e-4;
  double initial_p = 0.0025;

  /// Throws ConfigError unless every variance is positive and finite.
  void validate() const;
};

KalmanState kf_init(const Vec3& z, const NoiseParams& noise);

KalmanState kf_predict(const KalmanState& s, const NoiseParams& noise);

/// Throws NumericError if P + R cannot be inverted.
KalmanState kf_update(const KalmanState& s, const Vec3& z, const NoiseParams& noise);

/// Innovation covariance P + R, the gate metric for association.
Mat3 innovation_covariance(const KalmanState& s, const NoiseParams& noise);

}  // namespace mvtrack
