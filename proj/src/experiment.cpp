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

#include "mvtrack/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mvtrack/io.hpp"

namespace mvtrack {

void PlannerParams::validate() const {
  if (n_select == 0) throw ConfigError("planner.n_select must be positive");
  if (grid_rows < 1 || grid_cols < 1) throw ConfigError("planner grid must be at least 1x1");
  if (distances.empty()) throw ConfigError("planner.distances must not be empty");
  for (double d : distances) {
    if (!(d > 0.0)) throw ConfigError("planner.distances must be positive");
  }
  if (!(extent.array() >= 0.0).all()) throw ConfigError("planner.extent must be non-negative");
  if (!(resolution > 0.0)) throw ConfigError("planner.resolution must be positive");
  const std::size_t pool = distances.size() * static_cast<std::size_t>(grid_rows * grid_cols);
  if (n_select > pool) {
    throw ConfigError("planner.n_select (" + std::to_string(n_select) +
                      ") exceeds the candidate pool (" + std::to_string(pool) + ")");
  }
}

void ExperimentConfig::validate() const {
  scene.validate();
  noise.validate();
  camera.validate();
  position_tracker.validate();
  feature_tracker.validate();
  if (position_tracker.variant != TrackerVariant::PositionOnly ||
      feature_tracker.variant != TrackerVariant::FeatureBased) {
    throw ConfigError("tracker slots hold the wrong variants");
  }
  similarity.validate();
  if (!(clear_threshold > 0.0 && clear_threshold <= 1.0)) {
    throw ConfigError("clear_threshold must lie in (0, 1]");
  }
  planner.validate();
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

std::uint64_t scene_seed(std::uint64_t base, int repeat) { return base + repeat; }
std::uint64_t sampling_seed(std::uint64_t base, int repeat) { return base + 1000 + repeat; }
std::uint64_t noise_seed(std::uint64_t base, int repeat) { return base + 2000 + repeat; }

std::vector<CameraPose> build_pool(const Scene& scene, const PlannerParams& planner) {
  const Vec3 center = scene.stem_base + Vec3(0.0, 0.0, 0.5 * scene.stem_height);
  return build_viewpoint_grid(center, planner.distances, planner.grid_rows, planner.grid_cols,
                              planner.extent);
}

std::vector<std::size_t> plan_sequence(PlanStrategy strategy, const Scene& scene,
                                       const std::vector<CameraPose>& pool,
                                       const ExperimentConfig& cfg, std::uint64_t seed) {
  const PlanRequest req{pool, cfg.planner.n_select, seed};
  switch (strategy) {
    case PlanStrategy::Sort: return plan_sort(req);
    case PlanStrategy::Random: return plan_random(req);
    case PlanStrategy::Active:
      return plan_active(scene, req, scene.roi, cfg.camera, cfg.planner.resolution);
  }
  throw ConfigError("unknown plan strategy");
}

std::vector<Viewpoint> simulate_sequence(const Scene& scene, const std::vector<CameraPose>& pool,
                                         const std::vector<std::size_t>& order,
                                         const CameraModel& cam, const NoiseModel& noise,
                                         std::uint64_t seed) {
  std::vector<Viewpoint> out;
  out.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] >= pool.size()) throw RequestError("ordering refers outside the pool");
    Rng rng(derive_seed(seed, order[k]));
    Viewpoint vp = simulate_detections(scene, pool[order[k]], cam, noise, rng);
    vp.index = static_cast<int>(k);
    out.push_back(std::move(vp));
  }
  return out;
}

namespace {

std::vector<ResultRow> run_repeat(const ExperimentConfig& cfg, int repeat) {
  std::vector<ResultRow> rows;
  const std::uint64_t s_seed = scene_seed(cfg.base_seed, repeat);

  auto failed_rows = [&](PlanStrategy st, const std::string& what) {
    for (TrackerVariant v : kTrackerVariants) {
      rows.push_back({st, v, repeat, s_seed, {}, true, what});
    }
  };

  Scene scene;
  std::vector<CameraPose> pool;
  try {
    SceneSpec spec = cfg.scene;
    spec.seed = s_seed;
    scene = generate_scene(spec);
    pool = build_pool(scene, cfg.planner);
  } catch (const Error& e) {
    for (PlanStrategy st : kSequenceTypes) failed_rows(st, e.what());
    return rows;
  }

  for (PlanStrategy st : kSequenceTypes) {
    try {
      const auto order = plan_sequence(st, scene, pool, cfg, sampling_seed(cfg.base_seed, repeat));
      const auto seq = simulate_sequence(scene, pool, order, cfg.camera, cfg.noise,
                                         noise_seed(cfg.base_seed, repeat));
      for (TrackerVariant v : kTrackerVariants) {
        const TrackerConfig& tc =
            v == TrackerVariant::PositionOnly ? cfg.position_tracker : cfg.feature_tracker;
        const auto outputs = tracker_run(tc, seq);
        const auto frames = make_eval_frames(seq, outputs);
        rows.push_back({st, v, repeat, s_seed,
                        evaluate_all(frames, cfg.similarity, cfg.clear_threshold), false, {}});
      }
    } catch (const Error& e) {
      // Drop partial rows of this cell before recording the failure.
      std::erase_if(rows, [&](const ResultRow& r) { return r.sequence_type == st; });
      failed_rows(st, e.what());
    }
  }
  return rows;
}

std::size_t slot(PlanStrategy s) {
  return static_cast<std::size_t>(std::find(kSequenceTypes.begin(), kSequenceTypes.end(), s) -
                                  kSequenceTypes.begin());
}

std::size_t slot(TrackerVariant v) {
  return static_cast<std::size_t>(
      std::find(kTrackerVariants.begin(), kTrackerVariants.end(), v) - kTrackerVariants.begin());
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

ResultsTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<ResultRow>> per_repeat(static_cast<std::size_t>(cfg.repeats));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < cfg.repeats; r = next++) {
      per_repeat[static_cast<std::size_t>(r)] = run_repeat(cfg, r);
    }
  };
  const int n_threads = std::min(cfg.jobs, cfg.repeats);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  }

  ResultsTable table;
  for (auto& rows : per_repeat) {
    for (auto& row : rows) table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tuple(a.repeat, slot(a.sequence_type), slot(a.tracker)) <
           std::tuple(b.repeat, slot(b.sequence_type), slot(b.tracker));
  });
  return table;
}

std::vector<AggregateRow> aggregate(const ResultsTable& table) {
  std::vector<AggregateRow> out;
  for (PlanStrategy s : kSequenceTypes) {
    for (TrackerVariant v : kTrackerVariants) {
      AggregateRow agg{s, v};
      int mota_n = 0;
      for (const ResultRow& r : table.rows) {
        if (r.sequence_type != s || r.tracker != v) continue;
        if (r.failed) {
          ++agg.failed;
          continue;
        }
        ++agg.completed;
        agg.hota += r.metrics.hota;
        agg.det_a += r.metrics.det_a;
        agg.ass_a += r.metrics.ass_a;
        agg.loc_a += r.metrics.loc_a;
        agg.idsw += r.metrics.idsw;
        if (r.metrics.mota_defined) {
          agg.mota += r.metrics.mota;
          ++mota_n;
        }
      }
      if (agg.completed > 0) {
        const double n = agg.completed;
        agg.hota /= n;
        agg.det_a /= n;
        agg.ass_a /= n;
        agg.loc_a /= n;
        agg.idsw /= n;
      } else {
        agg.hota = agg.det_a = agg.ass_a = agg.loc_a = agg.idsw = std::nan("");
      }
      agg.mota = mota_n > 0 ? agg.mota / mota_n : std::nan("");
      out.push_back(agg);
    }
  }
  return out;
}

const AggregateRow& find_cell(const std::vector<AggregateRow>& rows, PlanStrategy s,
                              TrackerVariant v) {
  for (const auto& r : rows) {
    if (r.sequence_type == s && r.tracker == v) return r;
  }
  throw InputError("no aggregate row for " + std::string(to_string(s)) + "/" +
                   std::string(to_string(v)));
}

ResultPaths ResultPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "results.csv", dir / "aggregate.csv", dir / "summary.json"};
}

std::string rows_csv(const ResultsTable& table) {
  std::ostringstream out;
  out << "sequence_type,tracker,repeat,seed,hota,det_a,ass_a,loc_a,mota,idsw,status,error\n";
  for (const ResultRow& r : table.rows) {
    out << to_string(r.sequence_type) << ',' << to_string(r.tracker) << ',' << r.repeat << ','
        << r.seed << ',';
    if (r.failed) {
      out << ",,,,,,failed," << csv_field(r.error) << '\n';
      continue;
    }
    const MetricsReport& m = r.metrics;
    out << fmt(m.hota) << ',' << fmt(m.det_a) << ',' << fmt(m.ass_a) << ',' << fmt(m.loc_a) << ','
        << (m.mota_defined ? fmt(m.mota) : "nan") << ',' << m.idsw << ",ok,\n";
  }
  return out.str();
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "sequence_type,tracker,hota,det_a,ass_a,loc_a,mota,idsw,completed,failed\n";
  for (const AggregateRow& a : rows) {
    out << to_string(a.sequence_type) << ',' << to_string(a.tracker) << ',' << fmt(a.hota) << ','
        << fmt(a.det_a) << ',' << fmt(a.ass_a) << ',' << fmt(a.loc_a) << ',' << fmt(a.mota) << ','
        << fmt(a.idsw) << ',' << a.completed << ',' << a.failed << '\n';
  }
  return out.str();
}

void emit_results(const ResultsTable& table, const ResultPaths& paths) {
  const auto agg = aggregate(table);
  for (const auto* p : {&paths.rows_csv, &paths.aggregate_csv, &paths.summary_json}) {
    if (p->has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(p->parent_path(), ec);
      if (ec) throw IoError("cannot create '" + p->parent_path().string() + "': " + ec.message());
    }
  }
  write_text(paths.rows_csv, rows_csv(table));
  write_text(paths.aggregate_csv, aggregate_csv(agg));

  auto num = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  nlohmann::json cells = nlohmann::json::array();
  for (const AggregateRow& a : agg) {
    cells.push_back({{"sequence_type", to_string(a.sequence_type)},
                     {"tracker", to_string(a.tracker)},
                     {"hota", num(a.hota)},
                     {"det_a", num(a.det_a)},
                     {"ass_a", num(a.ass_a)},
                     {"loc_a", num(a.loc_a)},
                     {"mota", num(a.mota)},
                     {"idsw", num(a.idsw)},
                     {"completed", a.completed},
                     {"failed", a.failed}});
  }
  std::size_t failed = 0;
  for (const auto& r : table.rows) failed += r.failed ? 1 : 0;
  nlohmann::json summary{{"rows", table.rows.size()}, {"failed_rows", failed}, {"cells", cells}};
  write_text(paths.summary_json, summary.dump(2) + "\n");
}

}  // namespace mvtrack
