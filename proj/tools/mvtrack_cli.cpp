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

// Command-line front end: simulate, plan, track, evaluate, experiment.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mvtrack/io.hpp"

namespace fs = std::filesystem;
using namespace mvtrack;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<int> repeats;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "experiment config (JSON); built-in defaults if omitted")
      ->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "base seed");
  app->add_option("--out-dir", c.out_dir, "output directory");
  app->add_option("--repeats", c.repeats, "number of repeats")->check(CLI::PositiveNumber);
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : read_config(c.config);
  if (c.seed) cfg.base_seed = *c.seed;
  if (c.repeats) cfg.repeats = *c.repeats;
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

Scene make_scene(const ExperimentConfig& cfg) {
  SceneSpec spec = cfg.scene;
  spec.seed = scene_seed(cfg.base_seed, 0);
  return generate_scene(spec);
}

nlohmann::json metrics_json(const MetricsReport& m) {
  nlohmann::json mota = nullptr;
  if (m.mota_defined) mota = m.mota;
  return {{"hota", m.hota}, {"det_a", m.det_a}, {"ass_a", m.ass_a}, {"loc_a", m.loc_a},
          {"mota", mota},   {"idsw", m.idsw},   {"vacuous", m.vacuous}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view fruit tracking simulator and evaluator"};
  app.require_subcommand(1);

  Common sim_c, plan_c, track_c, eval_c, exp_c;
  std::string strategy = "random";
  std::string order_file;

  auto* sim = app.add_subcommand("simulate", "generate a scene and simulate a viewpoint sequence");
  add_common(sim, sim_c);
  sim->add_option("--strategy", strategy, "ordering when --order is not given")
      ->check(CLI::IsMember({"sort", "random", "ap", "active"}));
  sim->add_option("--order", order_file, "pool indices, one per line")->check(CLI::ExistingFile);

  std::string plan_strategy;
  auto* plan = app.add_subcommand("plan", "order viewpoints from the candidate pool");
  add_common(plan, plan_c);
  plan->add_option("--strategy", plan_strategy, "sort|random|ap")
      ->required()
      ->check(CLI::IsMember({"sort", "random", "ap", "active"}));

  std::string variant;
  std::string track_input;
  auto* track = app.add_subcommand("track", "run a tracker over a sequence file");
  add_common(track, track_c);
  track->add_option("--variant", variant, "position|feature")
      ->required()
      ->check(CLI::IsMember({"position", "feature"}));
  track->add_option("--input", track_input, "sequence file")->required()->check(CLI::ExistingFile);

  std::string gt_file, tracks_file;
  auto* eval = app.add_subcommand("evaluate", "score track outputs against ground truth");
  add_common(eval, eval_c);
  eval->add_option("--gt", gt_file, "sequence file with ground truth")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--tracks", tracks_file, "track outputs CSV")->required()->check(CLI::ExistingFile);

  int jobs = 0;
  auto* exp = app.add_subcommand("experiment", "run the full sequence-type x tracker matrix");
  add_common(exp, exp_c);
  exp->add_option("--jobs", jobs, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const ExperimentConfig cfg = load(sim_c);
      const fs::path dir = out_dir(sim_c);
      const Scene scene = make_scene(cfg);
      const auto pool = build_pool(scene, cfg.planner);
      const auto order =
          order_file.empty()
              ? plan_sequence(parse_plan_strategy(strategy), scene, pool, cfg,
                              sampling_seed(cfg.base_seed, 0))
              : read_order(order_file);
      const auto seq = simulate_sequence(scene, pool, order, cfg.camera, cfg.noise,
                                         noise_seed(cfg.base_seed, 0));
      write_text(dir / "scene.json", dump_scene(scene));
      write_order(dir / "order.txt", order);
      write_sequence(dir / "sequence.jsonl", seq, static_cast<std::size_t>(cfg.scene.feature_dim));
      std::cout << "wrote " << seq.size() << " viewpoints to " << (dir / "sequence.jsonl") << '\n';
    } else if (*plan) {
      const ExperimentConfig cfg = load(plan_c);
      const fs::path dir = out_dir(plan_c);
      const Scene scene = make_scene(cfg);
      const auto pool = build_pool(scene, cfg.planner);
      const auto order = plan_sequence(parse_plan_strategy(plan_strategy), scene, pool, cfg,
                                       sampling_seed(cfg.base_seed, 0));
      write_order(dir / "order.txt", order);
      std::cout << "path length " << path_length(pool, order) << " m over " << order.size()
                << " viewpoints\n";
    } else if (*track) {
      const ExperimentConfig cfg = load(track_c);
      const fs::path dir = out_dir(track_c);
      const TrackerVariant v = parse_tracker_variant(variant);
      const auto seq = read_sequence(fs::path(track_input));
      const auto outputs =
          tracker_run(v == TrackerVariant::PositionOnly ? cfg.position_tracker : cfg.feature_tracker,
                      seq);
      write_track_outputs(dir / "tracks.csv", outputs);
      std::cout << "wrote " << outputs.size() << " track outputs to " << (dir / "tracks.csv")
                << '\n';
    } else if (*eval) {
      const ExperimentConfig cfg = load(eval_c);
      const fs::path dir = out_dir(eval_c);
      const auto seq = read_sequence(fs::path(gt_file));
      const auto outputs = read_track_outputs(tracks_file);
      const auto frames = make_eval_frames(seq, outputs);
      const auto j = metrics_json(evaluate_all(frames, cfg.similarity, cfg.clear_threshold));
      write_text(dir / "metrics.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << '\n';
    } else if (*exp) {
      ExperimentConfig cfg = load(exp_c);
      if (jobs > 0) cfg.jobs = jobs;
      const fs::path dir = out_dir(exp_c);
      const ResultsTable table = run_experiment(cfg);
      emit_results(table, ResultPaths::in_directory(dir));
      std::cout << aggregate_csv(aggregate(table));
    }
  } catch (const ParseError& e) {
    std::cerr << "mvtrack: parse error at line " << e.line() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mvtrack: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
