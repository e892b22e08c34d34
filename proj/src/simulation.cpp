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

#include "mvtrack/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mvtrack {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gaussian(Rng& rng, double sigma) {
  if (sigma == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

Vec3 gaussian3(Rng& rng, double sigma) {
  const double x = gaussian(rng, sigma);
  const double y = gaussian(rng, sigma);
  const double z = gaussian(rng, sigma);
  return {x, y, z};
}

FeatureVector random_unit(Rng& rng, std::size_t dim) {
  FeatureVector v(static_cast<Eigen::Index>(dim));
  do {
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = gaussian(rng, 1.0);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

}  // namespace

// ---------------------------------------------------------------------------
// Scene

void SceneSpec::validate() const {
  if (n_trusses < 0 || n_leaves < 0) throw ConfigError("scene counts must be non-negative");
  if (tomatoes_per_truss_min < 0 || tomatoes_per_truss_max < tomatoes_per_truss_min) {
    throw ConfigError("tomatoes_per_truss range is invalid");
  }
  if (!(tomato_radius > 0.0) || !(leaf_radius > 0.0)) throw ConfigError("radii must be positive");
  if (!(stem_height > 0.0)) throw ConfigError("stem_height must be positive");
  if (!(workspace.size().array() > 0.0).all()) throw ConfigError("workspace must have volume");
  if (!(roi_size.array() > 0.0).all()) throw ConfigError("roi_size must be positive");
  if (!(leaf_depth.x() <= leaf_depth.y())) throw ConfigError("leaf_depth must be [near, far]");
  if (feature_dim == 0) throw ConfigError("feature_dim must be positive");
}

const Tomato& Scene::tomato(int object_id) const {
  if (object_id < 1 || object_id > static_cast<int>(tomatoes.size())) {
    throw InputError("unknown object id " + std::to_string(object_id));
  }
  return tomatoes[static_cast<std::size_t>(object_id - 1)];
}

const FeatureVector& Scene::latent_feature(int object_id) const {
  tomato(object_id);
  return latent_features[static_cast<std::size_t>(object_id - 1)];
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 0x5ce7e));
  Scene scene;
  scene.stem_base = spec.stem_base;
  scene.stem_height = spec.stem_height;
  scene.roi = AABB::centered(
      spec.stem_base + Vec3(0, 0, 0.5 * spec.stem_height) + spec.roi_offset, spec.roi_size);

  const double r = spec.tomato_radius;
  constexpr int kMaxAttempts = 2000;
  int next_id = 1;
  for (int t = 0; t < spec.n_trusses; ++t) {
    const int count = std::uniform_int_distribution<int>(spec.tomatoes_per_truss_min,
                                                         spec.tomatoes_per_truss_max)(rng);
    // Trusses hang on the camera side of the stem (negative x).
    const double height = spec.stem_base.z() + uniform(rng, 0.15, 0.9) * spec.stem_height;
    const double azimuth = uniform(rng, 0.6, 1.4) * std::numbers::pi;
    const double reach = uniform(rng, 0.05, 0.09);
    const Vec3 truss_center = spec.stem_base +
                              Vec3(reach * std::cos(azimuth), reach * std::sin(azimuth), 0.0) +
                              Vec3(0, 0, height - spec.stem_base.z());
    for (int k = 0; k < count; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
        const Vec3 offset(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0),
                          uniform(rng, -1.5, 1.0));
        const Vec3 c = truss_center + 2.2 * r * offset;
        if (!spec.workspace.contains(c - Vec3::Constant(r)) ||
            !spec.workspace.contains(c + Vec3::Constant(r))) {
          continue;
        }
        const bool overlaps = std::any_of(scene.tomatoes.begin(), scene.tomatoes.end(),
                                          [&](const Tomato& o) {
                                            return (o.center - c).norm() < o.radius + r;
                                          });
        if (overlaps) continue;
        scene.tomatoes.push_back({next_id++, c, r, t});
        placed = true;
      }
      if (!placed) {
        throw GenerationError("could not place tomato " + std::to_string(k + 1) + " of truss " +
                              std::to_string(t + 1) + " inside the workspace");
      }
    }
  }

  for (int l = 0; l < spec.n_leaves; ++l) {
    LeafDisc leaf;
    leaf.radius = spec.leaf_radius;
    leaf.center = spec.stem_base + Vec3(uniform(rng, spec.leaf_depth.x(), spec.leaf_depth.y()), uniform(rng, -0.25, 0.25),
                                        uniform(rng, 0.0, 1.0) * spec.stem_height);
    leaf.normal = Vec3(-1.0, gaussian(rng, 0.6), gaussian(rng, 0.6)).normalized();
    if (!spec.workspace.contains(leaf.center)) {
      throw GenerationError("leaf " + std::to_string(l + 1) + " falls outside the workspace");
    }
    scene.leaves.push_back(leaf);
  }

  scene.latent_features.reserve(scene.tomatoes.size());
  for (std::size_t k = 0; k < scene.tomatoes.size(); ++k) {
    scene.latent_features.push_back(random_unit(rng, spec.feature_dim));
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Camera

void CameraModel::validate() const {
  const double pi = std::numbers::pi;
  if (!(horizontal_fov > 0.0 && horizontal_fov < pi) ||
      !(vertical_fov > 0.0 && vertical_fov < pi)) {
    throw ConfigError("camera fields of view must lie in (0, pi)");
  }
  if (image_width <= 0 || image_height <= 0) throw ConfigError("image size must be positive");
  if (!(max_range > 0.0)) throw ConfigError("max_range must be positive");
}

bool CameraModel::in_frustum(const CameraPose& pose, const Vec3& world) const {
  const Vec3 p = pose.to_camera(world);
  if (!(p.x() > 1e-9) || p.norm() > max_range) return false;
  return std::abs(p.y() / p.x()) <= std::tan(0.5 * horizontal_fov) &&
         std::abs(p.z() / p.x()) <= std::tan(0.5 * vertical_fov);
}

Eigen::Vector2d CameraModel::project(const Vec3& camera_point) const {
  const double fx = 0.5 * image_width / std::tan(0.5 * horizontal_fov);
  const double fy = 0.5 * image_height / std::tan(0.5 * vertical_fov);
  return {0.5 * image_width - fx * camera_point.y() / camera_point.x(),
          0.5 * image_height - fy * camera_point.z() / camera_point.x()};
}

BBox2D CameraModel::project_sphere(const CameraPose& pose, const Vec3& center,
                                   double radius) const {
  const Vec3 p = pose.to_camera(center);
  const double depth = std::max(p.x(), 1e-6);
  const Eigen::Vector2d uv = project(Vec3(depth, p.y(), p.z()));
  const double fx = 0.5 * image_width / std::tan(0.5 * horizontal_fov);
  const double fy = 0.5 * image_height / std::tan(0.5 * vertical_fov);
  const double rx = fx * radius / depth;
  const double ry = fy * radius / depth;
  const double w = image_width;
  const double h = image_height;
  BBox2D box{std::clamp(uv.x() - rx, 0.0, w), std::clamp(uv.y() - ry, 0.0, h),
             std::clamp(uv.x() + rx, 0.0, w), std::clamp(uv.y() + ry, 0.0, h)};
  return box;
}

std::optional<double> segment_hits_disc(const Vec3& origin, const Vec3& target,
                                        const LeafDisc& disc) {
  const Vec3 d = target - origin;
  const double denom = disc.normal.dot(d);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double s = disc.normal.dot(disc.center - origin) / denom;
  if (!(s > 0.0 && s < 1.0)) return std::nullopt;
  if ((origin + s * d - disc.center).norm() > disc.radius) return std::nullopt;
  return s;
}

std::array<Vec3, 9> visibility_samples(const Vec3& eye, const Vec3& center, double radius) {
  const Vec3 sight = (center - eye).normalized();
  // Basis of the plane perpendicular to the line of sight.
  const Vec3 helper = std::abs(sight.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitY();
  const Vec3 e1 = sight.cross(helper).normalized();
  const Vec3 e2 = sight.cross(e1).normalized();
  std::array<Vec3, 9> out;
  out[0] = center;
  for (int k = 0; k < 8; ++k) {
    const double phi = k * std::numbers::pi / 4.0;
    out[static_cast<std::size_t>(k + 1)] =
        center + radius * (std::cos(phi) * e1 + std::sin(phi) * e2);
  }
  return out;
}

Visibility compute_visibility(const Scene& scene, const CameraPose& pose, const CameraModel& cam,
                              int object_id) {
  const Tomato& t = scene.tomato(object_id);
  Visibility vis;
  if (!cam.in_frustum(pose, t.center)) return vis;
  const auto samples = visibility_samples(pose.position, t.center, t.radius);
  int visible = 0;
  int visible_rim = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    // Samples cut off by the image border count as hidden, like leaf hits.
    const bool blocked =
        !cam.in_frustum(pose, samples[k]) ||
        std::any_of(scene.leaves.begin(), scene.leaves.end(), [&](const LeafDisc& l) {
          return segment_hits_disc(pose.position, samples[k], l).has_value();
        });
    if (blocked) continue;
    ++visible;
    if (k > 0) {
      vis.visible_offset += samples[k] - t.center;
      ++visible_rim;
    }
  }
  vis.fraction = visible / 9.0;
  if (visible_rim > 0) vis.visible_offset /= visible_rim;
  return vis;
}

double visible_fraction(const Scene& scene, const CameraPose& pose, const CameraModel& cam,
                        int object_id) {
  return compute_visibility(scene, pose, cam, object_id).fraction;
}

// ---------------------------------------------------------------------------
// Detector stand-in

void NoiseModel::validate() const {
  auto rate = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(position_sigma >= 0.0) || !(feature_sigma >= 0.0) || !(confidence_sigma >= 0.0)) {
    throw ConfigError("noise sigmas must be non-negative");
  }
  if (!rate(base_miss_rate) || !rate(occlusion_miss_gain) || !rate(confidence_mean)) {
    throw ConfigError("noise rates must lie in [0, 1]");
  }
  if (!(false_positive_rate >= 0.0)) throw ConfigError("false_positive_rate must be >= 0");
  if (!(surface_bias >= 0.0) || !(occlusion_shift_gain >= 0.0)) {
    throw ConfigError("position bias terms must be non-negative");
  }
}

NoiseModel NoiseModel::zero() {
  NoiseModel n;
  n.position_sigma = 0.0;
  n.feature_sigma = 0.0;
  n.base_miss_rate = 0.0;
  n.occlusion_miss_gain = 0.0;
  n.false_positive_rate = 0.0;
  n.confidence_mean = 1.0;
  n.confidence_sigma = 0.0;
  n.surface_bias = 0.0;
  n.occlusion_shift_gain = 0.0;
  return n;
}

namespace {

double sample_confidence(const NoiseModel& noise, Rng& rng) {
  return std::clamp(noise.confidence_mean + gaussian(rng, noise.confidence_sigma), 0.0, 1.0);
}

}  // namespace

Viewpoint simulate_detections(const Scene& scene, const CameraPose& pose, const CameraModel& cam,
                              const NoiseModel& noise, Rng& rng) {
  Viewpoint vp;
  vp.pose = pose;
  constexpr int kFrustumRetries = 16;
  for (const Tomato& t : scene.tomatoes) {
    const Visibility vis = compute_visibility(scene, pose, cam, t.object_id);
    if (vis.fraction <= 0.0) continue;
    const BBox2D box = cam.project_sphere(pose, t.center, t.radius);
    vp.gt.push_back({t.object_id, t.center, vis.fraction, box});

    const double p_detect =
        std::clamp(1.0 - noise.base_miss_rate - noise.occlusion_miss_gain * (1.0 - vis.fraction),
                   0.0, 1.0);
    if (!(uniform(rng, 0.0, 1.0) < p_detect)) continue;

    Detection det;
    det.bbox = box;
    const Vec3 sight = (t.center - pose.position).normalized();
    const Vec3 biased =
        t.center - noise.surface_bias * sight + noise.occlusion_shift_gain * vis.visible_offset;
    det.position = t.center;
    for (int attempt = 0; attempt < kFrustumRetries; ++attempt) {
      const Vec3 candidate = biased + gaussian3(rng, noise.position_sigma);
      if (cam.in_frustum(pose, candidate)) {
        det.position = candidate;
        break;
      }
    }
    const double sigma = noise.feature_sigma * (1.0 + (1.0 - vis.fraction));
    FeatureVector f = scene.latent_feature(t.object_id);
    for (Eigen::Index k = 0; k < f.size(); ++k) f(k) += gaussian(rng, sigma);
    det.feature = f.norm() > 1e-12 ? normalized(f) : scene.latent_feature(t.object_id);
    det.confidence = sample_confidence(noise, rng);
    vp.detections.push_back(std::move(det));
  }

  const std::size_t dim =
      scene.latent_features.empty() ? kDefaultFeatureDim
                                    : static_cast<std::size_t>(scene.latent_features[0].size());
  const int clutter = noise.false_positive_rate > 0.0
                          ? std::poisson_distribution<int>(noise.false_positive_rate)(rng)
                          : 0;
  const double tan_h = std::tan(0.5 * cam.horizontal_fov);
  const double tan_v = std::tan(0.5 * cam.vertical_fov);
  for (int k = 0; k < clutter; ++k) {
    // Uniform over image-plane direction and depth, trimmed to max_range.
    Vec3 cam_point;
    do {
      const double depth = uniform(rng, 0.2, cam.max_range);
      cam_point = Vec3(depth, depth * uniform(rng, -tan_h, tan_h),
                       depth * uniform(rng, -tan_v, tan_v));
    } while (cam_point.norm() > cam.max_range);
    Detection det;
    det.position = pose.position + pose.to_world_direction(cam_point);
    const double radius = scene.tomatoes.empty() ? 0.03 : scene.tomatoes.front().radius;
    det.bbox = cam.project_sphere(pose, det.position, radius);
    det.feature = random_unit(rng, dim);
    det.confidence = sample_confidence(noise, rng);
    vp.detections.push_back(std::move(det));
  }
  return vp;
}

// ---------------------------------------------------------------------------
// Viewpoint pool

std::vector<CameraPose> build_viewpoint_grid(const Vec3& plant_center,
                                             std::span<const double> distances, int rows, int cols,
                                             const Eigen::Vector2d& extent) {
  if (rows <= 0 || cols <= 0) throw ConfigError("viewpoint grid needs positive rows and cols");
  std::vector<CameraPose> poses;
  poses.reserve(distances.size() * static_cast<std::size_t>(rows * cols));
  auto offset = [](int k, int n, double span) {
    return n == 1 ? 0.0 : -0.5 * span + span * k / (n - 1);
  };
  for (double d : distances) {
    if (!(d > 0.0)) throw ConfigError("viewpoint distances must be positive");
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        CameraPose pose;
        pose.position = plant_center + Vec3(-d, offset(c, cols, extent.x()),
                                            offset(r, rows, extent.y()));
        poses.push_back(pose);
      }
    }
  }
  return poses;
}

}  // namespace mvtrack
