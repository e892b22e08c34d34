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

#include "mvtrack/core.hpp"

#include <algorithm>
#include <cmath>

namespace mvtrack {

bool BBox2D::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

double iou_2d(const BBox2D& a, const BBox2D& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double euclidean(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

bool is_finite(const Vec3& v) { return v.allFinite(); }

bool is_unit(const FeatureVector& v, double tol) {
  return v.allFinite() && std::abs(v.norm() - 1.0) <= tol;
}

FeatureVector normalized(const FeatureVector& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw InputError("cannot normalize a zero or non-finite feature vector");
  }
  return v / n;
}

void validate(const Detection& det) {
  if (!det.bbox.valid()) throw InputError("detection has an invalid bounding box");
  if (!is_finite(det.position)) throw InputError("detection position is not finite");
  if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
    throw InputError("detection confidence outside [0,1]");
  }
  if (det.feature && !is_unit(*det.feature)) {
    throw InputError("detection feature is not unit norm");
  }
}

}  // namespace mvtrack
