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

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvtrack {

/// Default width of re-ID feature vectors.
inline constexpr std::size_t kDefaultFeatureDim = 32;

/// Position in the robot-fixed, right-handed frame (meters). Cameras look
/// along +X toward the plant; +Z is up.
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using FeatureVector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (mode mismatch, missing feature, invalid vector).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure, e.g. a covariance that is no longer positive definite.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Viewpoint sequences whose indices are not strictly increasing.
class SequenceError : public Error {
 public:
  using Error::Error;
};

/// Scene generation could not satisfy the requested layout.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Planner request that cannot be satisfied.
class RequestError : public Error {
 public:
  using Error::Error;
};

/// File parse failure; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structurally valid file that violates the schema (e.g. feature width).
class SchemaError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types

struct CameraPose {
  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  /// Maps a world point into the camera frame (x forward, y left, z up).
  Vec3 to_camera(const Vec3& world) const {
    return orientation.conjugate() * (world - position);
  }
  Vec3 to_world_direction(const Vec3& camera_dir) const {
    return orientation * camera_dir;
  }
};

struct BBox2D {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool valid() const;
};

struct Detection {
  BBox2D bbox;
  Vec3 position = Vec3::Zero();
  double confidence = 1.0;
  std::optional<FeatureVector> feature;
  int class_id = 0;
};

struct GroundTruthEntry {
  int object_id = 0;
  Vec3 position = Vec3::Zero();
  double visible_fraction = 1.0;
  BBox2D bbox;
};

struct Viewpoint {
  int index = 0;
  CameraPose pose;
  std::vector<Detection> detections;
  std::vector<GroundTruthEntry> gt;
};

/// One per-frame tracker hypothesis, the record the metrics consume.
struct TrackOutput {
  int viewpoint_index = 0;
  int track_id = 0;
  Vec3 position = Vec3::Zero();
  BBox2D bbox;
};

/// Axis-aligned box in world coordinates.
struct AABB {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 size() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  static AABB centered(const Vec3& center, const Vec3& size) {
    return {center - 0.5 * size, center + 0.5 * size};
  }
};

// ---------------------------------------------------------------------------
// Elementary geometry

/// Intersection over union; 0 when the union has zero area.
double iou_2d(const BBox2D& a, const BBox2D& b);

double euclidean(const Vec3& a, const Vec3& b);

bool is_finite(const Vec3& v);

/// True when |v| == 1 within `tol`.
bool is_unit(const FeatureVector& v, double tol = 1e-6);

/// Returns v / |v|; throws InputError for a zero or non-finite vector.
FeatureVector normalized(const FeatureVector& v);

/// Validates Detection invariants; throws InputError describing the failure.
void validate(const Detection& det);

}  // namespace mvtrack
