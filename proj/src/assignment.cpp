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

#include "mvtrack/assignment.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <string>

namespace mvtrack {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw InputError("cost matrix has " + std::to_string(values_.size()) +
                     " values, expected " + std::to_string(rows_ * cols_));
  }
}

double Assignment::total_cost() const {
  double total = 0.0;
  for (const auto& m : matches) total += m.cost;
  return total;
}

namespace {

// Square dense problem with finite costs. Padding and forbidden pairs carry
// the same "unmatched" cost, which exceeds the sum of all real costs.
struct SquareProblem {
  std::size_t n = 0;
  std::vector<double> cost;  // n * n
  std::vector<char> real;    // pair is a usable real match
  double at(std::size_t r, std::size_t c) const { return cost[r * n + c]; }
};

SquareProblem make_square(const CostMatrix& costs) {
  SquareProblem sq;
  sq.n = std::max(costs.rows(), costs.cols());
  double finite_sum = 0.0;
  for (double v : costs.values()) {
    if (v != kForbidden) finite_sum += v;
  }
  const double unmatched = finite_sum + 1.0;
  sq.cost.assign(sq.n * sq.n, unmatched);
  sq.real.assign(sq.n * sq.n, 0);
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    for (std::size_t c = 0; c < costs.cols(); ++c) {
      if (!costs.forbidden(r, c)) {
        sq.cost[r * sq.n + c] = costs(r, c);
        sq.real[r * sq.n + c] = 1;
      }
    }
  }
  return sq;
}

// Shortest augmenting path Hungarian method with row/column potentials.
// On return, cost(r,c) - u[r] - v[c] >= 0 everywhere and == 0 on the matching.
struct HungarianResult {
  std::vector<std::size_t> row_to_col;
  std::vector<double> u, v;
};

HungarianResult hungarian_square(const SquareProblem& sq) {
  const std::size_t n = sq.n;
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based bookkeeping; index 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = sq.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  HungarianResult res;
  res.row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) res.row_to_col[p[j] - 1] = j - 1;
  res.u.assign(u.begin() + 1, u.end());
  res.v.assign(v.begin() + 1, v.end());
  return res;
}

// Every perfect matching on zero-reduced-cost edges is optimal. Walk rows in
// order and pin each to the smallest feasible column, re-routing the rest of
// the matching along alternating paths.
std::vector<std::size_t> lexicographic_optimum(const SquareProblem& sq, const HungarianResult& h,
                                               std::size_t real_cols) {
  const std::size_t n = sq.n;
  double scale = 1.0;
  for (double c : sq.cost) scale = std::max(scale, std::abs(c));
  const double tol = 1e-9 * scale;
  auto tight = [&](std::size_t r, std::size_t c) {
    return sq.at(r, c) - h.u[r] - h.v[c] <= tol;
  };

  std::vector<std::size_t> row_to_col = h.row_to_col;
  std::vector<std::size_t> col_to_row(n);
  for (std::size_t r = 0; r < n; ++r) col_to_row[row_to_col[r]] = r;
  std::vector<char> col_fixed(n, 0);

  // Real usable columns first, then padding, then forbidden real columns.
  auto candidate_order = [&](std::size_t r) {
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t c = 0; c < n; ++c) {
      if (sq.real[r * n + c]) order.push_back(c);
    }
    for (std::size_t c = real_cols; c < n; ++c) order.push_back(c);
    for (std::size_t c = 0; c < real_cols; ++c) {
      if (!sq.real[r * n + c]) order.push_back(c);
    }
    return order;
  };

  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c : candidate_order(r)) {
      if (col_fixed[c] || !tight(r, c)) continue;
      if (row_to_col[r] == c) break;
      // Force (r, c): row r2 loses c, column c_old loses r.
      const std::size_t r2 = col_to_row[c];
      const std::size_t c_old = row_to_col[r];
      std::vector<char> seen(n, 0);
      std::deque<std::size_t> queue{r2};
      std::size_t found = n;
      std::vector<std::size_t> parent_row(n, n);
      while (!queue.empty() && found == n) {
        const std::size_t row = queue.front();
        queue.pop_front();
        for (std::size_t col = 0; col < n; ++col) {
          if (col == c || col_fixed[col] || seen[col] || !tight(row, col)) continue;
          seen[col] = 1;
          parent_row[col] = row;
          if (col == c_old) {
            found = col;
            break;
          }
          const std::size_t next = col_to_row[col];
          if (next == r) continue;
          queue.push_back(next);
        }
      }
      if (found == n) continue;
      // Augment along parent links: each row on the path takes the column
      // that discovered it.
      std::size_t col = found;
      while (true) {
        const std::size_t row = parent_row[col];
        const std::size_t freed = row_to_col[row];
        row_to_col[row] = col;
        col_to_row[col] = row;
        if (row == r2) break;
        col = freed;
      }
      row_to_col[r] = c;
      col_to_row[c] = r;
      break;
    }
    col_fixed[row_to_col[r]] = 1;
  }
  return row_to_col;
}

}  // namespace

namespace {

void check_entries(const CostMatrix& costs) {
  for (double v : costs.values()) {
    if (std::isnan(v) || v < 0.0 || (std::isinf(v) && v != kForbidden)) {
      throw InputError("cost matrix entries must be non-negative and finite or forbidden");
    }
  }
}

Assignment collect(const CostMatrix& costs, const std::vector<std::size_t>& row_to_col) {
  Assignment out;
  std::vector<char> col_used(costs.cols(), 0);
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    const std::size_t c = row_to_col.empty() ? costs.cols() : row_to_col[r];
    if (c < costs.cols() && !costs.forbidden(r, c)) {
      out.matches.push_back({r, c, costs(r, c)});
      col_used[c] = 1;
    } else {
      out.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t c = 0; c < costs.cols(); ++c) {
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

}  // namespace

Assignment solve_hungarian(const CostMatrix& costs) {
  check_entries(costs);
  if (costs.empty()) return collect(costs, {});
  const SquareProblem sq = make_square(costs);
  const HungarianResult h = hungarian_square(sq);
  return collect(costs, lexicographic_optimum(sq, h, costs.cols()));
}

Assignment solve_hungarian_lexicographic(const CostMatrix& primary, const CostMatrix& secondary) {
  check_entries(primary);
  if (secondary.rows() != primary.rows() || secondary.cols() != primary.cols()) {
    throw InputError("primary and secondary cost matrices differ in shape");
  }
  for (double v : secondary.values()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InputError("secondary costs must be finite and non-negative");
    }
  }
  if (primary.empty()) return collect(primary, {});

  const SquareProblem sq = make_square(primary);
  const HungarianResult h = hungarian_square(sq);
  double scale = 1.0;
  for (double c : sq.cost) scale = std::max(scale, std::abs(c));
  const double tol = 1e-9 * scale;

  // Restrict to primary-optimal edges and re-solve on the secondary costs.
  // Unmatched slots cost nothing; edges off the optimal face are priced out.
  const std::size_t n = sq.n;
  double secondary_sum = 0.0;
  for (double v : secondary.values()) secondary_sum += v;
  const double priced_out = secondary_sum + 1.0;
  SquareProblem sq2;
  sq2.n = n;
  sq2.real = sq.real;
  sq2.cost.assign(n * n, priced_out);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (sq.at(r, c) - h.u[r] - h.v[c] > tol) continue;
      sq2.cost[r * n + c] = sq.real[r * n + c] ? secondary(r, c) : 0.0;
    }
  }
  const HungarianResult h2 = hungarian_square(sq2);
  return collect(primary, lexicographic_optimum(sq2, h2, primary.cols()));
}

CostMatrix mahalanobis_cost(std::span<const Gaussian3> tracks, std::span<const Vec3> detections,
                            double gate) {
  if (!(gate > 0.0)) throw InputError("Mahalanobis gate must be positive");
  CostMatrix out(tracks.size(), detections.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const Mat3& cov = tracks[i].covariance;
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    if (!cov.allFinite() || asym > 1e-9 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
      throw NumericError("track " + std::to_string(i) + " covariance is not symmetric");
    }
    const Eigen::LLT<Mat3> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericError("track " + std::to_string(i) +
                         " covariance is not positive definite (corrupted filter state)");
    }
    for (std::size_t j = 0; j < detections.size(); ++j) {
      const Vec3 d = detections[j] - tracks[i].mean;
      const double d2 = d.dot(llt.solve(d));
      const double dist = std::sqrt(std::max(0.0, d2));
      out(i, j) = dist > gate ? kForbidden : dist;
    }
  }
  return out;
}

CostMatrix cosine_cost(std::span<const FeatureVector> track_features,
                       std::span<const FeatureVector> detection_features, double gate) {
  if (!(gate > 0.0 && gate <= 2.0)) throw InputError("cosine gate must lie in (0, 2]");
  auto check = [](const FeatureVector& f, const char* what, std::size_t k) {
    const double n = f.norm();
    if (!std::isfinite(n) || n == 0.0) {
      throw InputError(std::string(what) + " feature " + std::to_string(k) + " has zero norm");
    }
    if (std::abs(n - 1.0) > 1e-6) {
      throw InputError(std::string(what) + " feature " + std::to_string(k) + " is not unit norm");
    }
  };
  std::size_t dim = 0;
  bool have_dim = false;
  auto check_dim = [&](const FeatureVector& f) {
    if (!have_dim) {
      dim = static_cast<std::size_t>(f.size());
      have_dim = true;
    } else if (static_cast<std::size_t>(f.size()) != dim) {
      throw InputError("feature widths differ");
    }
  };
  for (std::size_t i = 0; i < track_features.size(); ++i) {
    check(track_features[i], "track", i);
    check_dim(track_features[i]);
  }
  for (std::size_t j = 0; j < detection_features.size(); ++j) {
    check(detection_features[j], "detection", j);
    check_dim(detection_features[j]);
  }
  CostMatrix out(track_features.size(), detection_features.size());
  for (std::size_t i = 0; i < track_features.size(); ++i) {
    for (std::size_t j = 0; j < detection_features.size(); ++j) {
      const double d = std::clamp(1.0 - track_features[i].dot(detection_features[j]), 0.0, 2.0);
      out(i, j) = d > gate ? kForbidden : d;
    }
  }
  return out;
}

}  // namespace mvtrack
