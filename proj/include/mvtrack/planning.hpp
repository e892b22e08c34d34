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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "mvtrack/core.hpp"
#include "mvtrack/simulation.hpp"

namespace mvtrack {

// Viewpoint-sequence generators: Sort (sampled, then nearest-neighbour
// ordered), Random (sampled order) and Active (greedy information gain over
// an occupancy belief of the stem region).

enum class PlanStrategy { Sort, Random, Active };

std::string_view to_string(PlanStrategy s);
PlanStrategy parse_plan_strategy(std::string_view s);

enum class CellState : std::uint8_t { Unknown, Free, Occupied };

/// Voxel belief over an axis-aligned region. Voxels are cubes of side
/// `resolution`; the per-axis count is ceil(size / resolution). The mapped
/// `bounds` may be larger than the `roi` whose voxels count toward gain.
class OccupancyGrid {
 public:
  OccupancyGrid(const AABB& roi, double resolution);
  OccupancyGrid(const AABB& bounds, double resolution, const AABB& roi);

  const AABB& bounds() const noexcept { return bounds_; }
  const AABB& roi() const noexcept { return roi_; }
  double resolution() const noexcept { return resolution_; }
  const Eigen::Vector3i& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return cells_.size(); }

  std::size_t index(const Eigen::Vector3i& v) const {
    return static_cast<std::size_t>((v.z() * dims_.y() + v.y()) * dims_.x() + v.x());
  }
  bool in_bounds(const Eigen::Vector3i& v) const {
    return (v.array() >= 0).all() && (v.array() < dims_.array()).all();
  }
  /// Voxel containing a point, or nullopt outside the mapped bounds.
  std::optional<Eigen::Vector3i> voxel_of(const Vec3& p) const;
  Vec3 voxel_center(const Eigen::Vector3i& v) const;
  /// Whether the voxel's centre lies in the RoI.
  bool in_roi(std::size_t i) const { return roi_mask_[i] != 0; }

  CellState at(const Eigen::Vector3i& v) const { return cells_[index(v)]; }
  CellState at(std::size_t i) const { return cells_[i]; }
  void set(const Eigen::Vector3i& v, CellState s) { cells_[index(v)] = s; }
  std::size_t count(CellState s) const;
  std::size_t count_in_roi(CellState s) const;

 private:
  AABB bounds_;
  AABB roi_;
  double resolution_;
  Eigen::Vector3i dims_;
  std::vector<CellState> cells_;
  std::vector<char> roi_mask_;
};

/// Visits the voxels a ray crosses inside the grid, in order, with the ray
/// parameter at which each voxel is entered. `direction` must be unit length.
/// Stops when `visit(voxel, t)` returns false, the ray leaves the grid or
/// passes t_max.
template <typename Visit>
void traverse_voxels(const OccupancyGrid& grid, const Vec3& origin, const Vec3& direction,
                     double t_max, Visit&& visit) {
  const double res = grid.resolution();
  const Vec3 lo = grid.bounds().min;
  const Vec3 hi = lo + res * grid.dims().cast<double>();
  double t_enter = 0.0;
  double t_exit = t_max;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(direction[a]) < 1e-15) {
      if (origin[a] < lo[a] || origin[a] > hi[a]) return;
      continue;
    }
    double t0 = (lo[a] - origin[a]) / direction[a];
    double t1 = (hi[a] - origin[a]) / direction[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit) return;

  const Vec3 start = origin + t_enter * direction;
  Eigen::Vector3i voxel;
  Eigen::Vector3i step;
  Vec3 t_next, t_delta;
  for (int a = 0; a < 3; ++a) {
    int v = static_cast<int>(std::floor((start[a] - lo[a]) / res));
    voxel[a] = std::clamp(v, 0, grid.dims()[a] - 1);
    if (direction[a] > 0.0) {
      step[a] = 1;
      t_next[a] = (lo[a] + (voxel[a] + 1) * res - origin[a]) / direction[a];
      t_delta[a] = res / direction[a];
    } else if (direction[a] < 0.0) {
      step[a] = -1;
      t_next[a] = (lo[a] + voxel[a] * res - origin[a]) / direction[a];
      t_delta[a] = -res / direction[a];
    } else {
      step[a] = 0;
      t_next[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }
  double t = t_enter;
  while (true) {
    if (!visit(static_cast<const Eigen::Vector3i&>(voxel), t)) return;
    int axis = 0;
    if (t_next[1] < t_next[axis]) axis = 1;
    if (t_next[2] < t_next[axis]) axis = 2;
    t = t_next[axis];
    if (t > t_exit) return;
    voxel[axis] += step[axis];
    if (voxel[axis] < 0 || voxel[axis] >= grid.dims()[axis]) return;
    t_next[axis] += t_delta[axis];
  }
}

/// Camera-frame unit ray directions on a regular image-plane lattice. The
/// lattice step (in tangent units) is `stride`.
std::vector<Vec3> make_ray_bundle(const CameraModel& cam, double stride);

/// Lattice step such that neighbouring rays are closer than one voxel at
/// max_range, so every voxel within range is crossed by some ray.
double ray_stride(const CameraModel& cam, double resolution);

/// Number of distinct Unknown RoI voxels the ray bundle reaches before
/// leaving the grid or meeting an Occupied voxel.
std::size_t info_gain(const OccupancyGrid& grid, const CameraPose& pose, const CameraModel& cam);
std::size_t info_gain(const OccupancyGrid& grid, const CameraPose& pose, const CameraModel& cam,
                      const std::vector<Vec3>& bundle);

/// Range to the first tomato or leaf along a ray, if within max_range.
std::optional<double> first_hit(const Scene& scene, const Vec3& origin, const Vec3& direction,
                                double max_range);

/// Ground-truth voxelization: 1 where a voxel intersects a tomato or leaf.
std::vector<char> voxelize(const Scene& scene, const OccupancyGrid& grid);

/// Integrates one simulated depth scan along the same voxel walk info_gain
/// uses: voxels before the first truly occupied one become Free, that one
/// becomes Occupied. Occupied is never cleared. Because Free is only ever
/// assigned to truly empty voxels, any voxel counted by info_gain is
/// resolved by the scan from the same pose.
void integrate_scan(OccupancyGrid& grid, const std::vector<char>& truth, const CameraPose& pose,
                    const CameraModel& cam, const std::vector<Vec3>& bundle);
void integrate_scan(OccupancyGrid& grid, const Scene& scene, const CameraPose& pose,
                    const CameraModel& cam, const std::vector<Vec3>& bundle);

/// Region mapped by the active planner: the RoI grown (on its own voxel
/// lattice) to enclose every candidate camera, so occluders between the
/// cameras and the RoI are part of the belief.
AABB planning_bounds(const AABB& roi, const std::vector<CameraPose>& candidates, double resolution);

struct PlanRequest {
  std::vector<CameraPose> candidates;
  std::size_t n_select = 100;
  std::uint64_t seed = 0;
};

/// Seeded uniform sample without replacement, in sampled order. Shared by
/// the Sort and Random strategies. Throws RequestError if n_select exceeds
/// the pool.
std::vector<std::size_t> sample_candidates(const PlanRequest& req);

std::vector<std::size_t> plan_sort(const PlanRequest& req);
std::vector<std::size_t> plan_random(const PlanRequest& req);

struct ActivePlanTrace {
  std::vector<std::size_t> gains;              // gain of each selected pose
  std::vector<std::size_t> unknown_after;      // mapped Unknown voxels after each update
  std::vector<std::size_t> unknown_roi_after;  // RoI Unknown voxels after each update
  std::size_t unknown_initial = 0;
};

std::vector<std::size_t> plan_active(const Scene& scene, const PlanRequest& req, const AABB& roi,
                                     const CameraModel& cam, double resolution,
                                     ActivePlanTrace* trace = nullptr);

/// Total camera travel along an ordering of poses.
double path_length(const std::vector<CameraPose>& poses, const std::vector<std::size_t>& order);

}  // namespace mvtrack
