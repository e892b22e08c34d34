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

#include "mvtrack/planning.hpp"

#include <numeric>
#include <queue>
#include <string>
#include <tuple>

namespace mvtrack {

std::string_view to_string(PlanStrategy s) {
  switch (s) {
    case PlanStrategy::Sort: return "sort";
    case PlanStrategy::Random: return "random";
    case PlanStrategy::Active: return "ap";
  }
  return "unknown";
}

PlanStrategy parse_plan_strategy(std::string_view s) {
  if (s == "sort") return PlanStrategy::Sort;
  if (s == "random") return PlanStrategy::Random;
  if (s == "ap" || s == "active") return PlanStrategy::Active;
  throw ConfigError("unknown plan strategy '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Occupancy grid

OccupancyGrid::OccupancyGrid(const AABB& roi, double resolution)
    : OccupancyGrid(roi, resolution, roi) {}

OccupancyGrid::OccupancyGrid(const AABB& bounds, double resolution, const AABB& roi)
    : bounds_(bounds), roi_(roi), resolution_(resolution) {
  if (!(resolution > 0.0)) throw ConfigError("grid resolution must be positive");
  const Vec3 size = bounds.size();
  if (!(size.array() > 0.0).all()) throw ConfigError("grid region must have volume");
  if (!(roi.size().array() > 0.0).all()) throw ConfigError("region of interest must have volume");
  for (int a = 0; a < 3; ++a) {
    dims_[a] = std::max(1, static_cast<int>(std::ceil(size[a] / resolution - 1e-9)));
  }
  cells_.assign(static_cast<std::size_t>(dims_.prod()), CellState::Unknown);
  roi_mask_.assign(cells_.size(), 0);
  for (int z = 0; z < dims_.z(); ++z) {
    for (int y = 0; y < dims_.y(); ++y) {
      for (int x = 0; x < dims_.x(); ++x) {
        const Eigen::Vector3i v(x, y, z);
        roi_mask_[index(v)] = roi_.contains(voxel_center(v)) ? 1 : 0;
      }
    }
  }
}

std::optional<Eigen::Vector3i> OccupancyGrid::voxel_of(const Vec3& p) const {
  const Vec3 hi = bounds_.min + resolution_ * dims_.cast<double>();
  if ((p.array() < bounds_.min.array()).any() || (p.array() > hi.array()).any()) {
    return std::nullopt;
  }
  Eigen::Vector3i v;
  for (int a = 0; a < 3; ++a) {
    v[a] = std::clamp(static_cast<int>(std::floor((p[a] - bounds_.min[a]) / resolution_)), 0,
                      dims_[a] - 1);
  }
  return v;
}

Vec3 OccupancyGrid::voxel_center(const Eigen::Vector3i& v) const {
  return bounds_.min + resolution_ * (v.cast<double>() + Vec3::Constant(0.5));
}

std::size_t OccupancyGrid::count(CellState s) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

std::size_t OccupancyGrid::count_in_roi(CellState s) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < cells_.size(); ++i) n += (roi_mask_[i] && cells_[i] == s) ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------------------
// Ray casting

double ray_stride(const CameraModel& cam, double resolution) {
  return 0.75 * resolution / cam.max_range;
}

std::vector<Vec3> make_ray_bundle(const CameraModel& cam, double stride) {
  if (!(stride > 0.0)) throw ConfigError("ray stride must be positive");
  const double tan_h = std::tan(0.5 * cam.horizontal_fov);
  const double tan_v = std::tan(0.5 * cam.vertical_fov);
  const int nu = static_cast<int>(std::ceil(2.0 * tan_h / stride)) + 1;
  const int nv = static_cast<int>(std::ceil(2.0 * tan_v / stride)) + 1;
  std::vector<Vec3> rays;
  rays.reserve(static_cast<std::size_t>(nu * nv));
  for (int j = 0; j < nv; ++j) {
    const double b = -tan_v + 2.0 * tan_v * j / (nv - 1);
    for (int i = 0; i < nu; ++i) {
      const double a = -tan_h + 2.0 * tan_h * i / (nu - 1);
      rays.push_back(Vec3(1.0, a, b).normalized());
    }
  }
  return rays;
}

std::size_t info_gain(const OccupancyGrid& grid, const CameraPose& pose, const CameraModel& cam) {
  return info_gain(grid, pose, cam, make_ray_bundle(cam, ray_stride(cam, grid.resolution())));
}

std::size_t info_gain(const OccupancyGrid& grid, const CameraPose& pose, const CameraModel& cam,
                      const std::vector<Vec3>& bundle) {
  std::vector<char> counted(grid.size(), 0);
  std::size_t gain = 0;
  const AABB& roi = grid.roi();
  for (const Vec3& ray : bundle) {
    const Vec3 dir = pose.to_world_direction(ray);
    // Nothing past the RoI exit can count, and rays missing it count nothing.
    double t_lo = 0.0;
    double t_hi = cam.max_range;
    for (int a = 0; a < 3 && t_lo <= t_hi; ++a) {
      if (std::abs(dir[a]) < 1e-15) {
        if (pose.position[a] < roi.min[a] || pose.position[a] > roi.max[a]) t_hi = -1.0;
        continue;
      }
      double t0 = (roi.min[a] - pose.position[a]) / dir[a];
      double t1 = (roi.max[a] - pose.position[a]) / dir[a];
      if (t0 > t1) std::swap(t0, t1);
      t_lo = std::max(t_lo, t0);
      t_hi = std::min(t_hi, t1);
    }
    if (t_lo > t_hi) continue;
    traverse_voxels(grid, pose.position, dir, t_hi + grid.resolution(),
                    [&](const Eigen::Vector3i& v, double) {
                      const std::size_t i = grid.index(v);
                      const CellState s = grid.at(i);
                      if (s == CellState::Occupied) return false;
                      if (s == CellState::Unknown && grid.in_roi(i) && !counted[i]) {
                        counted[i] = 1;
                        ++gain;
                      }
                      return true;
                    });
  }
  return gain;
}

std::optional<double> first_hit(const Scene& scene, const Vec3& origin, const Vec3& direction,
                                double max_range) {
  double best = max_range;
  bool found = false;
  for (const Tomato& t : scene.tomatoes) {
    const Vec3 oc = origin - t.center;
    const double b = direction.dot(oc);
    const double c = oc.squaredNorm() - t.radius * t.radius;
    const double disc = b * b - c;
    if (disc < 0.0) continue;
    const double root = std::sqrt(disc);
    double hit = -b - root;
    if (hit < 0.0) hit = -b + root;
    if (hit >= 0.0 && hit <= best) {
      best = hit;
      found = true;
    }
  }
  for (const LeafDisc& l : scene.leaves) {
    const double denom = l.normal.dot(direction);
    if (std::abs(denom) < 1e-15) continue;
    const double hit = l.normal.dot(l.center - origin) / denom;
    if (hit < 0.0 || hit > best) continue;
    if ((origin + hit * direction - l.center).norm() > l.radius) continue;
    best = hit;
    found = true;
  }
  if (!found) return std::nullopt;
  return best;
}

std::vector<char> voxelize(const Scene& scene, const OccupancyGrid& grid) {
  std::vector<char> truth(grid.size(), 0);
  const double half = 0.5 * grid.resolution();
  const double half_diag = std::sqrt(3.0) * half;
  for (int z = 0; z < grid.dims().z(); ++z) {
    for (int y = 0; y < grid.dims().y(); ++y) {
      for (int x = 0; x < grid.dims().x(); ++x) {
        const Eigen::Vector3i v(x, y, z);
        const Vec3 c = grid.voxel_center(v);
        bool hit = false;
        for (const Tomato& t : scene.tomatoes) {
          // Squared distance from the sphere centre to the voxel box.
          const Vec3 d = ((t.center - c).cwiseAbs().array() - half).cwiseMax(0.0).matrix();
          if (d.squaredNorm() <= t.radius * t.radius) {
            hit = true;
            break;
          }
        }
        for (std::size_t k = 0; !hit && k < scene.leaves.size(); ++k) {
          const LeafDisc& l = scene.leaves[k];
          const double off = l.normal.dot(c - l.center);
          const double reach = half * l.normal.cwiseAbs().sum();
          if (std::abs(off) > reach) continue;
          const Vec3 in_plane = (c - l.center) - off * l.normal;
          hit = in_plane.norm() <= l.radius + half_diag;
        }
        truth[grid.index(v)] = hit ? 1 : 0;
      }
    }
  }
  return truth;
}

void integrate_scan(OccupancyGrid& grid, const std::vector<char>& truth, const CameraPose& pose,
                    const CameraModel& cam, const std::vector<Vec3>& bundle) {
  if (truth.size() != grid.size()) throw InputError("truth grid does not match the belief grid");
  for (const Vec3& ray : bundle) {
    const Vec3 dir = pose.to_world_direction(ray);
    traverse_voxels(grid, pose.position, dir, cam.max_range, [&](const Eigen::Vector3i& v, double) {
      const std::size_t i = grid.index(v);
      if (truth[i]) {
        grid.set(v, CellState::Occupied);
        return false;
      }
      if (grid.at(i) == CellState::Unknown) grid.set(v, CellState::Free);
      return true;
    });
  }
}

void integrate_scan(OccupancyGrid& grid, const Scene& scene, const CameraPose& pose,
                    const CameraModel& cam, const std::vector<Vec3>& bundle) {
  integrate_scan(grid, voxelize(scene, grid), pose, cam, bundle);
}

AABB planning_bounds(const AABB& roi, const std::vector<CameraPose>& candidates,
                     double resolution) {
  Vec3 lo = roi.min;
  Vec3 hi = roi.max;
  for (const CameraPose& p : candidates) {
    lo = lo.cwiseMin(p.position);
    hi = hi.cwiseMax(p.position);
  }
  // Grow by whole voxels so the RoI stays aligned with the lattice.
  for (int a = 0; a < 3; ++a) {
    lo[a] = roi.min[a] - resolution * std::ceil((roi.min[a] - lo[a]) / resolution - 1e-9);
  }
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Planners

std::vector<std::size_t> sample_candidates(const PlanRequest& req) {
  const std::size_t pool = req.candidates.size();
  if (req.n_select > pool) {
    throw RequestError("cannot select " + std::to_string(req.n_select) + " viewpoints from a pool of " +
                       std::to_string(pool));
  }
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(req.seed, 0x5a3b1e));
  // Partial Fisher-Yates: the first n_select slots are the sample, in draw order.
  for (std::size_t k = 0; k < req.n_select; ++k) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(k, pool - 1)(rng);
    std::swap(idx[k], idx[j]);
  }
  idx.resize(req.n_select);
  return idx;
}

std::vector<std::size_t> plan_random(const PlanRequest& req) { return sample_candidates(req); }

std::vector<std::size_t> plan_sort(const PlanRequest& req) {
  std::vector<std::size_t> pending = sample_candidates(req);
  if (pending.empty()) return {};
  std::sort(pending.begin(), pending.end());
  auto position = [&](std::size_t i) -> const Vec3& { return req.candidates[i].position; };

  auto lex_less = [&](std::size_t a, std::size_t b) {
    const Vec3& pa = position(a);
    const Vec3& pb = position(b);
    return std::tie(pa.x(), pa.y(), pa.z(), a) < std::tie(pb.x(), pb.y(), pb.z(), b);
  };
  auto start = std::min_element(pending.begin(), pending.end(), lex_less);
  std::vector<std::size_t> order{*start};
  pending.erase(start);
  while (!pending.empty()) {
    const Vec3& here = position(order.back());
    // pending is index-sorted, so the first strict minimum is the lowest index.
    auto best = pending.begin();
    double best_d = euclidean(here, position(*best));
    for (auto it = std::next(pending.begin()); it != pending.end(); ++it) {
      const double d = euclidean(here, position(*it));
      if (d < best_d) {
        best_d = d;
        best = it;
      }
    }
    order.push_back(*best);
    pending.erase(best);
  }
  return order;
}

std::vector<std::size_t> plan_active(const Scene& scene, const PlanRequest& req, const AABB& roi,
                                     const CameraModel& cam, double resolution,
                                     ActivePlanTrace* trace) {
  const std::size_t pool = req.candidates.size();
  if (req.n_select > pool) {
    throw RequestError("cannot select " + std::to_string(req.n_select) + " viewpoints from a pool of " +
                       std::to_string(pool));
  }
  OccupancyGrid grid(planning_bounds(roi, req.candidates, resolution), resolution, roi);
  const std::vector<char> truth = voxelize(scene, grid);
  const std::vector<Vec3> bundle = make_ray_bundle(cam, ray_stride(cam, resolution));
  if (trace) {
    *trace = {};
    trace->unknown_initial = grid.count(CellState::Unknown);
  }

  // Gains never increase as the belief fills in, so stale gains are upper
  // bounds (lazy greedy). Heap order: larger gain first, then lower index.
  struct Entry {
    std::size_t gain;
    std::size_t index;
    std::size_t round;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.index > b.index;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t i = 0; i < pool; ++i) {
    heap.push({info_gain(grid, req.candidates[i], cam, bundle), i, 0});
  }

  std::vector<std::size_t> order;
  order.reserve(req.n_select);
  for (std::size_t round = 0; round < req.n_select; ++round) {
    while (true) {
      Entry top = heap.top();
      heap.pop();
      if (top.round == round) {
        order.push_back(top.index);
        if (trace) trace->gains.push_back(top.gain);
        break;
      }
      top.gain = info_gain(grid, req.candidates[top.index], cam, bundle);
      top.round = round;
      heap.push(top);
    }
    integrate_scan(grid, truth, req.candidates[order.back()], cam, bundle);
    if (trace) {
      trace->unknown_after.push_back(grid.count(CellState::Unknown));
      trace->unknown_roi_after.push_back(grid.count_in_roi(CellState::Unknown));
    }
  }
  return order;
}

double path_length(const std::vector<CameraPose>& poses, const std::vector<std::size_t>& order) {
  double total = 0.0;
  for (std::size_t k = 1; k < order.size(); ++k) {
    total += euclidean(poses[order[k - 1]].position, poses[order[k]].position);
  }
  return total;
}

}  // namespace mvtrack
