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
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mvtrack/core.hpp"

namespace mvtrack {

using Rng = std::mt19937_64;

/// Mixes a base seed and a stream id into an independent seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// ---------------------------------------------------------------------------
// Scene

/// Synthetic tomato plant: a vertical stem with trusses of spherical tomatoes
/// hanging on the camera side and leaf discs in front of them.
struct SceneSpec {
  int n_trusses = 6;
  int tomatoes_per_truss_min = 4;
  int tomatoes_per_truss_max = 6;
  double tomato_radius = 0.03;
  Vec3 stem_base = Vec3(0.0, 0.0, 0.0);
  double stem_height = 1.0;
  int n_leaves = 10;
  double leaf_radius = 0.07;
  /// Depth band (x, relative to the stem) the leaf centres are drawn from.
  Eigen::Vector2d leaf_depth = Eigen::Vector2d(-0.22, -0.05);
  AABB workspace{Vec3(-0.4, -0.5, -0.1), Vec3(0.4, 0.5, 1.1)};
  Vec3 roi_size = Vec3(0.3, 0.3, 1.0);
  /// RoI centre relative to the stem mid-point; negative x is toward the camera.
  Vec3 roi_offset = Vec3(0.0, 0.0, 0.0);
  std::size_t feature_dim = kDefaultFeatureDim;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Tomato {
  int object_id = 0;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  int truss = 0;
};

struct LeafDisc {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
  double radius = 0.0;
};

struct Scene {
  std::vector<Tomato> tomatoes;  // object ids 1..N in order
  std::vector<LeafDisc> leaves;
  std::vector<FeatureVector> latent_features;  // [object_id - 1]
  AABB roi;
  Vec3 stem_base = Vec3::Zero();
  double stem_height = 0.0;

  const Tomato& tomato(int object_id) const;
  const FeatureVector& latent_feature(int object_id) const;
};

/// Throws GenerationError when the workspace cannot hold the requested layout.
Scene generate_scene(const SceneSpec& spec);

// ---------------------------------------------------------------------------
// Camera and visibility

struct CameraModel {
  double horizontal_fov = 1.2;  // radians
  double vertical_fov = 0.75;
  int image_width = 1280;
  int image_height = 720;
  double max_range = 1.0;  // meters

  void validate() const;
  bool in_frustum(const CameraPose& pose, const Vec3& world) const;
  /// Pixel coordinates of a camera-frame point in front of the camera.
  Eigen::Vector2d project(const Vec3& camera_point) const;
  /// Image box of a sphere, clipped to the image.
  BBox2D project_sphere(const CameraPose& pose, const Vec3& center, double radius) const;
};

/// Ray/disc hit parameter in (0, 1) along origin -> target, if any.
std::optional<double> segment_hits_disc(const Vec3& origin, const Vec3& target,
                                        const LeafDisc& disc);

/// Nine visibility samples of a sphere seen from `eye`: the center and eight
/// points on the silhouette circle perpendicular to the line of sight.
std::array<Vec3, 9> visibility_samples(const Vec3& eye, const Vec3& center, double radius);

struct Visibility {
  double fraction = 0.0;
  /// Mean offset of the unoccluded silhouette samples from the center.
  Vec3 visible_offset = Vec3::Zero();
};

Visibility compute_visibility(const Scene& scene, const CameraPose& pose, const CameraModel& cam,
                              int object_id);

/// 0 outside the frustum or range, else the fraction of the nine sample rays
/// not blocked by any leaf disc.
double visible_fraction(const Scene& scene, const CameraPose& pose, const CameraModel& cam,
                        int object_id);

// ---------------------------------------------------------------------------
// Detector stand-in

struct NoiseModel {
  double position_sigma = 0.01;
  double feature_sigma = 0.15;
  double base_miss_rate = 0.05;
  double occlusion_miss_gain = 0.6;
  double false_positive_rate = 0.3;  // expected clutter detections per viewpoint
  double confidence_mean = 0.8;
  double confidence_sigma = 0.1;
  /// Measured centers sit this far in front of the true center along the
  /// line of sight (a depth sensor only sees the front surface).
  double surface_bias = 0.0;
  /// Measured centers move toward the unoccluded part of the silhouette by
  /// this fraction of the mean visible-sample offset.
  double occlusion_shift_gain = 0.0;

  void validate() const;
  /// All stochastic and systematic terms off: detections equal ground truth.
  static NoiseModel zero();
};

/// Simulates one viewpoint. Ground truth lists every object with v > 0.
Viewpoint simulate_detections(const Scene& scene, const CameraPose& pose, const CameraModel& cam,
                              const NoiseModel& noise, Rng& rng);

// ---------------------------------------------------------------------------
// Viewpoint pool

/// Planar grids of poses facing +X toward the plant, one grid per distance.
/// Row r (bottom to top) and column c (right to left, i.e. increasing y) of
/// distance k land at index k*rows*cols + r*cols + c.
std::vector<CameraPose> build_viewpoint_grid(const Vec3& plant_center,
                                             std::span<const double> distances, int rows, int cols,
                                             const Eigen::Vector2d& extent);

}  // namespace mvtrack
