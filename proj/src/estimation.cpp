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

#include "mvtrack/estimation.hpp"

#include <cmath>

namespace mvtrack {

void NoiseParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(process_q) || !positive(measurement_r) || !positive(initial_p)) {
    throw ConfigError("Kalman noise variances must be positive and finite");
  }
}

KalmanState kf_init(const Vec3& z, const NoiseParams& noise) {
  return {z, noise.initial_p * Mat3::Identity()};
}

KalmanState kf_predict(const KalmanState& s, const NoiseParams& noise) {
  return {s.mean, s.covariance + noise.process_q * Mat3::Identity()};
}

Mat3 innovation_covariance(const KalmanState& s, const NoiseParams& noise) {
  return s.covariance + noise.measurement_r * Mat3::Identity();
}

KalmanState kf_update(const KalmanState& s, const Vec3& z, const NoiseParams& noise) {
  const Mat3 S = innovation_covariance(s, noise);
  const Eigen::LLT<Mat3> llt(S);
  if (llt.info() != Eigen::Success) {
    throw NumericError("innovation covariance is singular");
  }
  // K = P S^-1; S and P are symmetric so K^T = S^-1 P.
  const Mat3 gain = llt.solve(s.covariance).transpose();
  KalmanState out;
  out.mean = s.mean + gain * (z - s.mean);
  const Mat3 p = (Mat3::Identity() - gain) * s.covariance;
  out.covariance = 0.5 * (p + p.transpose());
  return out;
}

}  // namespace mvtrack
