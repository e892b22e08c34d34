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

#include "mvtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

#include "mvtrack/assignment.hpp"

namespace mvtrack {

std::string_view to_string(SimilarityMode m) {
  return m == SimilarityMode::Distance3D ? "distance3d" : "iou2d";
}

SimilarityMode parse_similarity_mode(std::string_view s) {
  if (s == "distance3d" || s == "Distance3D") return SimilarityMode::Distance3D;
  if (s == "iou2d" || s == "IoU2D") return SimilarityMode::IoU2D;
  throw ConfigError("unknown similarity mode '" + std::string(s) + "'");
}

void SimilarityConfig::validate() const {
  if (!(std::isfinite(d_max) && d_max > 0.0)) throw ConfigError("d_max must be positive");
}

double similarity(const Shape& gt, const Shape& pred, const SimilarityConfig& cfg) {
  if (cfg.mode == SimilarityMode::Distance3D) {
    const auto* a = std::get_if<Vec3>(&gt);
    const auto* b = std::get_if<Vec3>(&pred);
    if (!a || !b) throw InputError("Distance3D similarity needs two 3D positions");
    return std::max(0.0, 1.0 - euclidean(*a, *b) / cfg.d_max);
  }
  const auto* a = std::get_if<BBox2D>(&gt);
  const auto* b = std::get_if<BBox2D>(&pred);
  if (!a || !b) throw InputError("IoU2D similarity needs two 2D boxes");
  return iou_2d(*a, *b);
}

std::vector<EvalFrame> make_eval_frames(std::span<const Viewpoint> gt_sequence,
                                        std::span<const TrackOutput> predictions) {
  std::map<int, EvalFrame> frames;
  for (const auto& vp : gt_sequence) {
    EvalFrame& f = frames[vp.index];
    f.viewpoint_index = vp.index;
    for (const auto& g : vp.gt) f.gt.push_back({g.object_id, g.position, g.bbox});
  }
  for (const auto& p : predictions) {
    EvalFrame& f = frames[p.viewpoint_index];
    f.viewpoint_index = p.viewpoint_index;
    f.pred.push_back({p.track_id, p.position, p.bbox});
  }
  std::vector<EvalFrame> out;
  out.reserve(frames.size());
  for (auto& [index, f] : frames) out.push_back(std::move(f));
  return out;
}

std::array<double, kNumAlphas> hota_alphas() {
  std::array<double, kNumAlphas> a{};
  for (std::size_t k = 0; k < kNumAlphas; ++k) a[k] = static_cast<double>(k + 1) / 20.0;
  return a;
}

namespace {

constexpr double kAlphaSlack = 1e-12;

// Frames with ids mapped to dense indices and the similarity matrix cached.
struct DenseFrame {
  std::vector<int> gt;    // dense gt ids
  std::vector<int> pred;  // dense pred ids
  Eigen::MatrixXd sim;    // gt x pred
};

struct DenseSequence {
  std::vector<DenseFrame> frames;
  int num_gt_ids = 0;
  int num_pred_ids = 0;
  long total_gt = 0;
  long total_pred = 0;
};

Shape shape_of(const EvalObject& o, SimilarityMode mode) {
  if (mode == SimilarityMode::Distance3D) return o.position;
  return o.bbox;
}

DenseSequence densify(std::span<const EvalFrame> frames, const SimilarityConfig& cfg) {
  cfg.validate();
  DenseSequence seq;
  std::unordered_map<int, int> gt_ids, pred_ids;
  auto dense = [](std::unordered_map<int, int>& ids, int id, int& counter) {
    auto [it, inserted] = ids.emplace(id, counter);
    if (inserted) ++counter;
    return it->second;
  };
  std::set<int> seen_index;
  for (const auto& f : frames) {
    if (!seen_index.insert(f.viewpoint_index).second) {
      throw InputError("duplicate frame for viewpoint " + std::to_string(f.viewpoint_index));
    }
    DenseFrame d;
    std::set<int> seen_gt, seen_pred;
    for (const auto& g : f.gt) {
      if (!seen_gt.insert(g.id).second) {
        throw InputError("viewpoint " + std::to_string(f.viewpoint_index) +
                         ": duplicate ground-truth id " + std::to_string(g.id));
      }
      d.gt.push_back(dense(gt_ids, g.id, seq.num_gt_ids));
    }
    for (const auto& p : f.pred) {
      if (!seen_pred.insert(p.id).second) {
        throw InputError("viewpoint " + std::to_string(f.viewpoint_index) +
                         ": duplicate track id " + std::to_string(p.id));
      }
      d.pred.push_back(dense(pred_ids, p.id, seq.num_pred_ids));
    }
    d.sim.resize(static_cast<Eigen::Index>(f.gt.size()), static_cast<Eigen::Index>(f.pred.size()));
    for (std::size_t i = 0; i < f.gt.size(); ++i) {
      for (std::size_t j = 0; j < f.pred.size(); ++j) {
        d.sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            similarity(shape_of(f.gt[i], cfg.mode), shape_of(f.pred[j], cfg.mode), cfg);
      }
    }
    seq.total_gt += static_cast<long>(f.gt.size());
    seq.total_pred += static_cast<long>(f.pred.size());
    seq.frames.push_back(std::move(d));
  }
  return seq;
}

// Global alignment score between every gt id and pred id, from the soft
// per-frame overlap of their similarity rows and columns.
Eigen::MatrixXd global_alignment(const DenseSequence& seq) {
  Eigen::MatrixXd potential = Eigen::MatrixXd::Zero(seq.num_gt_ids, seq.num_pred_ids);
  Eigen::VectorXd gt_count = Eigen::VectorXd::Zero(seq.num_gt_ids);
  Eigen::VectorXd pred_count = Eigen::VectorXd::Zero(seq.num_pred_ids);
  for (const auto& f : seq.frames) {
    const Eigen::VectorXd row_sum = f.sim.rowwise().sum();
    const Eigen::VectorXd col_sum = f.sim.colwise().sum().transpose();
    for (Eigen::Index i = 0; i < f.sim.rows(); ++i) {
      for (Eigen::Index j = 0; j < f.sim.cols(); ++j) {
        const double s = f.sim(i, j);
        const double denom = row_sum(i) + col_sum(j) - s;
        if (denom > std::numeric_limits<double>::epsilon()) {
          potential(f.gt[i], f.pred[j]) += s / denom;
        }
      }
    }
    for (int g : f.gt) gt_count(g) += 1.0;
    for (int p : f.pred) pred_count(p) += 1.0;
  }
  Eigen::MatrixXd gas = Eigen::MatrixXd::Zero(seq.num_gt_ids, seq.num_pred_ids);
  for (Eigen::Index g = 0; g < gas.rows(); ++g) {
    for (Eigen::Index p = 0; p < gas.cols(); ++p) {
      const double denom = gt_count(g) + pred_count(p) - potential(g, p);
      if (denom > 0.0) gas(g, p) = potential(g, p) / denom;
    }
  }
  return gas;
}

}  // namespace

HotaResult evaluate_hota(std::span<const EvalFrame> frames, const SimilarityConfig& cfg) {
  const DenseSequence seq = densify(frames, cfg);
  HotaResult res;
  if (seq.total_gt == 0 && seq.total_pred == 0) {
    res.hota = res.det_a = res.ass_a = res.loc_a = 100.0;
    res.vacuous = true;
    res.hota_alpha.fill(1.0);
    res.det_a_alpha.fill(1.0);
    res.ass_a_alpha.fill(1.0);
    return res;
  }
  if (seq.total_gt == 0 || seq.total_pred == 0) return res;

  const Eigen::MatrixXd gas = global_alignment(seq);
  Eigen::VectorXd gt_count = Eigen::VectorXd::Zero(seq.num_gt_ids);
  Eigen::VectorXd pred_count = Eigen::VectorXd::Zero(seq.num_pred_ids);
  for (const auto& f : seq.frames) {
    for (int g : f.gt) gt_count(g) += 1.0;
    for (int p : f.pred) pred_count(p) += 1.0;
  }
  const double gas_max = std::max(1.0, gas.size() > 0 ? gas.maxCoeff() : 0.0);

  const auto alphas = hota_alphas();
  double loc_sum = 0.0;
  long loc_count = 0;
  for (std::size_t a = 0; a < kNumAlphas; ++a) {
    const double alpha = alphas[a];
    Eigen::MatrixXd matches = Eigen::MatrixXd::Zero(seq.num_gt_ids, seq.num_pred_ids);
    long tp = 0;
    for (const auto& f : seq.frames) {
      const auto ng = static_cast<std::size_t>(f.sim.rows());
      const auto np = static_cast<std::size_t>(f.sim.cols());
      if (ng == 0 || np == 0) continue;
      // Maximize summed alignment, then summed similarity. Pairs below alpha
      // are priced as "unmatched" and dropped afterwards.
      CostMatrix primary(ng, np), secondary(ng, np);
      for (std::size_t i = 0; i < ng; ++i) {
        for (std::size_t j = 0; j < np; ++j) {
          const double s = f.sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          const bool usable = s >= alpha - kAlphaSlack;
          primary(i, j) = usable ? gas_max - gas(f.gt[i], f.pred[j]) : gas_max;
          secondary(i, j) = usable ? 1.0 - s : 1.0;
        }
      }
      const Assignment assignment = solve_hungarian_lexicographic(primary, secondary);
      for (const auto& m : assignment.matches) {
        const double s =
            f.sim(static_cast<Eigen::Index>(m.row), static_cast<Eigen::Index>(m.col));
        if (s < alpha - kAlphaSlack) continue;
        ++tp;
        matches(f.gt[m.row], f.pred[m.col]) += 1.0;
        loc_sum += s;
        ++loc_count;
      }
    }
    res.tp[a] = static_cast<int>(tp);
    if (tp == 0) continue;
    double ass_sum = 0.0;  // sum over TPs of A(c)
    for (Eigen::Index g = 0; g < matches.rows(); ++g) {
      for (Eigen::Index p = 0; p < matches.cols(); ++p) {
        const double m = matches(g, p);
        if (m == 0.0) continue;
        ass_sum += m * m / (gt_count(g) + pred_count(p) - m);
      }
    }
    const double det_denom = static_cast<double>(seq.total_gt + seq.total_pred - tp);
    res.det_a_alpha[a] = static_cast<double>(tp) / det_denom;
    res.ass_a_alpha[a] = ass_sum / static_cast<double>(tp);
    res.hota_alpha[a] = std::sqrt(ass_sum / det_denom);
  }
  for (std::size_t a = 0; a < kNumAlphas; ++a) {
    res.hota += res.hota_alpha[a];
    res.det_a += res.det_a_alpha[a];
    res.ass_a += res.ass_a_alpha[a];
  }
  res.hota *= 100.0 / kNumAlphas;
  res.det_a *= 100.0 / kNumAlphas;
  res.ass_a *= 100.0 / kNumAlphas;
  res.loc_a = loc_count > 0 ? 100.0 * loc_sum / static_cast<double>(loc_count) : 0.0;
  return res;
}

ClearResult evaluate_clear(std::span<const EvalFrame> frames, const SimilarityConfig& cfg,
                           double clear_threshold) {
  if (!(clear_threshold > 0.0 && clear_threshold <= 1.0)) {
    throw ConfigError("clear_threshold must lie in (0, 1]");
  }
  std::vector<EvalFrame> ordered(frames.begin(), frames.end());
  std::sort(ordered.begin(), ordered.end(), [](const EvalFrame& a, const EvalFrame& b) {
    return a.viewpoint_index < b.viewpoint_index;
  });
  const DenseSequence seq = densify(ordered, cfg);

  ClearResult res;
  std::vector<int> last_match(seq.num_gt_ids, -1);     // most recent pred ever
  std::vector<int> prev_frame(seq.num_gt_ids, -1);     // pred in the previous frame
  for (const auto& f : seq.frames) {
    const auto ng = static_cast<std::size_t>(f.sim.rows());
    const auto np = static_cast<std::size_t>(f.sim.cols());
    auto sim = [&](std::size_t i, std::size_t j) {
      return f.sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    std::vector<int> gt_to_pred(ng, -1);
    std::vector<char> pred_taken(np, 0);

    // Keep last frame's pairings that are still valid.
    for (std::size_t i = 0; i < ng; ++i) {
      const int want = prev_frame[f.gt[i]];
      if (want < 0) continue;
      for (std::size_t j = 0; j < np; ++j) {
        if (f.pred[j] == want && !pred_taken[j] && sim(i, j) >= clear_threshold) {
          gt_to_pred[i] = static_cast<int>(j);
          pred_taken[j] = 1;
          break;
        }
      }
    }
    std::vector<std::size_t> free_gt, free_pred;
    for (std::size_t i = 0; i < ng; ++i) {
      if (gt_to_pred[i] < 0) free_gt.push_back(i);
    }
    for (std::size_t j = 0; j < np; ++j) {
      if (!pred_taken[j]) free_pred.push_back(j);
    }
    CostMatrix costs(free_gt.size(), free_pred.size());
    for (std::size_t a = 0; a < free_gt.size(); ++a) {
      for (std::size_t b = 0; b < free_pred.size(); ++b) {
        const double s = sim(free_gt[a], free_pred[b]);
        costs(a, b) = s >= clear_threshold ? 1.0 - s : kForbidden;
      }
    }
    for (const auto& m : solve_hungarian(costs).matches) {
      gt_to_pred[free_gt[m.row]] = static_cast<int>(free_pred[m.col]);
    }

    std::fill(prev_frame.begin(), prev_frame.end(), -1);
    int matched = 0;
    for (std::size_t i = 0; i < ng; ++i) {
      if (gt_to_pred[i] < 0) continue;
      ++matched;
      const int g = f.gt[i];
      const int p = f.pred[static_cast<std::size_t>(gt_to_pred[i])];
      if (last_match[g] >= 0 && last_match[g] != p) ++res.idsw;
      last_match[g] = p;
      prev_frame[g] = p;
    }
    res.tp += matched;
    res.fn += static_cast<int>(ng) - matched;
    res.fp += static_cast<int>(np) - matched;
  }
  res.gt_total = static_cast<int>(seq.total_gt);
  if (res.gt_total == 0) {
    res.defined = false;
    res.mota = std::numeric_limits<double>::quiet_NaN();
  } else {
    res.mota = 100.0 * (1.0 - static_cast<double>(res.fn + res.fp + res.idsw) /
                                  static_cast<double>(res.gt_total));
  }
  return res;
}

MetricsReport evaluate_all(std::span<const EvalFrame> frames, const SimilarityConfig& cfg,
                           double clear_threshold) {
  const HotaResult h = evaluate_hota(frames, cfg);
  const ClearResult c = evaluate_clear(frames, cfg, clear_threshold);
  MetricsReport r;
  r.hota = h.hota;
  r.det_a = h.det_a;
  r.ass_a = h.ass_a;
  r.loc_a = h.loc_a;
  r.vacuous = h.vacuous;
  r.mota = c.mota;
  r.idsw = c.idsw;
  r.mota_defined = c.defined;
  return r;
}

}  // namespace mvtrack
