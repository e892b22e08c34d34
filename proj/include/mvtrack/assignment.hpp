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

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mvtrack/core.hpp"

namespace mvtrack {

/// Marks a gated-out pair. Never part of a match.
inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// 95% chi-square quantile with 3 degrees of freedom, as a distance.
inline const double kDefaultMahalanobisGate = std::sqrt(7.814727903251178);
inline constexpr double kDefaultCosineGate = 0.4;

/// Row-major costs, rows = existing tracks, cols = new detections.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  bool forbidden(std::size_t r, std::size_t c) const { return (*this)(r, c) == kForbidden; }

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct Match {
  std::size_t row = 0;
  std::size_t col = 0;
  double cost = 0.0;
};

struct Assignment {
  std::vector<Match> matches;  // sorted by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;

  double total_cost() const;
};

/// Optimal assignment. Among all matchings that avoid forbidden pairs, picks
/// one of maximum cardinality and, among those, minimum total cost. Remaining
/// ties resolve to the row-wise lexicographically smallest column choice.
///
/// Throws InputError for negative or NaN entries.
Assignment solve_hungarian(const CostMatrix& costs);

/// Two-level optimum: the usable pairs and the primary objective are those of
/// `primary` (same semantics as solve_hungarian); among primary-optimal
/// assignments, minimizes the total of `secondary` over the matched pairs.
/// Both matrices must have the same shape; `secondary` must be finite.
Assignment solve_hungarian_lexicographic(const CostMatrix& primary, const CostMatrix& secondary);

/// Mean and covariance of a 3D Gaussian position belief.
struct Gaussian3 {
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Identity();
};

/// Entry (i, j) is sqrt(d' S_i^-1 d) with d = detections[j] - tracks[i].mean.
/// Entries above `gate` are forbidden. Throws NumericError when a covariance
/// is not symmetric positive definite.
CostMatrix mahalanobis_cost(std::span<const Gaussian3> tracks, std::span<const Vec3> detections,
                            double gate);

/// Entry (i, j) is 1 - <f_i, g_j>; entries above `gate` are forbidden.
/// Throws InputError for zero-norm, non-unit or mismatched-width vectors.
CostMatrix cosine_cost(std::span<const FeatureVector> track_features,
                       std::span<const FeatureVector> detection_features, double gate);

}  // namespace mvtrack
