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

#include <set>
#include <string>

#include "json.hpp"
#include "mvtrack/io.hpp"

namespace mvtrack {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(ctx + ": expected [x, y, z]");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json box_json(const AABB& b) { return {{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}; }

// Reads the keys of one JSON object into existing defaults and rejects keys
// it was never asked about.
class Section {
 public:
  Section(const json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object()) throw ConfigError(ctx_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& field) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    try {
      field = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(ctx_ + "." + key + ": " + e.what());
    }
  }

  void get_vec(const char* key, Vec3& field) {
    known_.insert(key);
    if (j_.contains(key)) field = vec_from(j_.at(key), ctx_ + "." + key);
  }

  const json* child(const char* key) {
    known_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return ctx_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!known_.count(item.key())) {
        throw ConfigError(ctx_ + ": unknown key '" + item.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string ctx_;
  std::set<std::string> known_;
};

json scene_spec_json(const SceneSpec& s) {
  return {{"n_trusses", s.n_trusses},
          {"tomatoes_per_truss", {s.tomatoes_per_truss_min, s.tomatoes_per_truss_max}},
          {"tomato_radius", s.tomato_radius},
          {"stem_base", vec_json(s.stem_base)},
          {"stem_height", s.stem_height},
          {"n_leaves", s.n_leaves},
          {"leaf_radius", s.leaf_radius},
          {"leaf_depth", {s.leaf_depth.x(), s.leaf_depth.y()}},
          {"workspace", box_json(s.workspace)},
          {"roi_size", vec_json(s.roi_size)},
          {"roi_offset", vec_json(s.roi_offset)},
          {"feature_dim", s.feature_dim},
          {"seed", s.seed}};
}

void read_scene_spec(const json& j, SceneSpec& s) {
  Section sec(j, "scene");
  sec.get("n_trusses", s.n_trusses);
  if (const json* range = sec.child("tomatoes_per_truss")) {
    if (!range->is_array() || range->size() != 2) {
      throw ConfigError("scene.tomatoes_per_truss: expected [min, max]");
    }
    s.tomatoes_per_truss_min = range->at(0).get<int>();
    s.tomatoes_per_truss_max = range->at(1).get<int>();
  }
  sec.get("tomato_radius", s.tomato_radius);
  sec.get_vec("stem_base", s.stem_base);
  sec.get("stem_height", s.stem_height);
  sec.get("n_leaves", s.n_leaves);
  sec.get("leaf_radius", s.leaf_radius);
  if (const json* d = sec.child("leaf_depth")) {
    if (!d->is_array() || d->size() != 2) throw ConfigError("scene.leaf_depth: expected [near, far]");
    s.leaf_depth = {d->at(0).get<double>(), d->at(1).get<double>()};
  }
  if (const json* ws = sec.child("workspace")) {
    Section w(*ws, "scene.workspace");
    w.get_vec("min", s.workspace.min);
    w.get_vec("max", s.workspace.max);
    w.finish();
  }
  sec.get_vec("roi_size", s.roi_size);
  sec.get_vec("roi_offset", s.roi_offset);
  sec.get("feature_dim", s.feature_dim);
  sec.get("seed", s.seed);
  sec.finish();
}

json noise_json(const NoiseModel& n) {
  return {{"position_sigma", n.position_sigma},
          {"feature_sigma", n.feature_sigma},
          {"base_miss_rate", n.base_miss_rate},
          {"occlusion_miss_gain", n.occlusion_miss_gain},
          {"false_positive_rate", n.false_positive_rate},
          {"confidence", {n.confidence_mean, n.confidence_sigma}},
          {"surface_bias", n.surface_bias},
          {"occlusion_shift_gain", n.occlusion_shift_gain}};
}

void read_noise(const json& j, NoiseModel& n) {
  Section sec(j, "noise");
  sec.get("position_sigma", n.position_sigma);
  sec.get("feature_sigma", n.feature_sigma);
  sec.get("base_miss_rate", n.base_miss_rate);
  sec.get("occlusion_miss_gain", n.occlusion_miss_gain);
  sec.get("false_positive_rate", n.false_positive_rate);
  if (const json* c = sec.child("confidence")) {
    if (!c->is_array() || c->size() != 2) throw ConfigError("noise.confidence: expected [mean, sigma]");
    n.confidence_mean = c->at(0).get<double>();
    n.confidence_sigma = c->at(1).get<double>();
  }
  sec.get("surface_bias", n.surface_bias);
  sec.get("occlusion_shift_gain", n.occlusion_shift_gain);
  sec.finish();
}

json camera_json(const CameraModel& c) {
  return {{"horizontal_fov", c.horizontal_fov},
          {"vertical_fov", c.vertical_fov},
          {"image_width", c.image_width},
          {"image_height", c.image_height},
          {"max_range", c.max_range}};
}

void read_camera(const json& j, CameraModel& c) {
  Section sec(j, "camera");
  sec.get("horizontal_fov", c.horizontal_fov);
  sec.get("vertical_fov", c.vertical_fov);
  sec.get("image_width", c.image_width);
  sec.get("image_height", c.image_height);
  sec.get("max_range", c.max_range);
  sec.finish();
}

json tracker_json(const TrackerConfig& t) {
  return {{"mahalanobis_gate", t.mahalanobis_gate},
          {"cosine_gate", t.cosine_gate},
          {"feature_momentum", t.feature_momentum},
          {"min_confidence", t.min_confidence},
          {"kalman",
           {{"process_q", t.noise.process_q},
            {"measurement_r", t.noise.measurement_r},
            {"initial_p", t.noise.initial_p}}}};
}

void read_tracker(const json& j, TrackerConfig& t, const std::string& ctx) {
  Section sec(j, ctx);
  sec.get("mahalanobis_gate", t.mahalanobis_gate);
  sec.get("cosine_gate", t.cosine_gate);
  sec.get("feature_momentum", t.feature_momentum);
  sec.get("min_confidence", t.min_confidence);
  if (const json* k = sec.child("kalman")) {
    Section ks(*k, ctx + ".kalman");
    ks.get("process_q", t.noise.process_q);
    ks.get("measurement_r", t.noise.measurement_r);
    ks.get("initial_p", t.noise.initial_p);
    ks.finish();
  }
  sec.finish();
}

json planner_json(const PlannerParams& p) {
  return {{"n_select", p.n_select},
          {"grid_rows", p.grid_rows},
          {"grid_cols", p.grid_cols},
          {"distances", p.distances},
          {"extent", {p.extent.x(), p.extent.y()}},
          {"resolution", p.resolution}};
}

void read_planner(const json& j, PlannerParams& p) {
  Section sec(j, "planner");
  sec.get("n_select", p.n_select);
  sec.get("grid_rows", p.grid_rows);
  sec.get("grid_cols", p.grid_cols);
  sec.get("distances", p.distances);
  if (const json* e = sec.child("extent")) {
    if (!e->is_array() || e->size() != 2) throw ConfigError("planner.extent: expected [w, h]");
    p.extent = {e->at(0).get<double>(), e->at(1).get<double>()};
  }
  sec.get("resolution", p.resolution);
  sec.finish();
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  const json j = parse_json(text, "config");
  ExperimentConfig cfg;
  Section sec(j, "config");
  sec.get("base_seed", cfg.base_seed);
  sec.get("repeats", cfg.repeats);
  sec.get("jobs", cfg.jobs);
  sec.get("clear_threshold", cfg.clear_threshold);
  if (const json* s = sec.child("scene")) read_scene_spec(*s, cfg.scene);
  if (const json* n = sec.child("noise")) read_noise(*n, cfg.noise);
  if (const json* c = sec.child("camera")) read_camera(*c, cfg.camera);
  if (const json* t = sec.child("trackers")) {
    Section ts(*t, "trackers");
    if (const json* p = ts.child("position")) read_tracker(*p, cfg.position_tracker, "trackers.position");
    if (const json* f = ts.child("feature")) read_tracker(*f, cfg.feature_tracker, "trackers.feature");
    ts.finish();
  }
  if (const json* s = sec.child("similarity")) {
    Section ss(*s, "similarity");
    std::string mode(to_string(cfg.similarity.mode));
    ss.get("mode", mode);
    cfg.similarity.mode = parse_similarity_mode(mode);
    ss.get("d_max", cfg.similarity.d_max);
    ss.finish();
  }
  if (const json* p = sec.child("planner")) read_planner(*p, cfg.planner);
  sec.finish();
  cfg.position_tracker.variant = TrackerVariant::PositionOnly;
  cfg.feature_tracker.variant = TrackerVariant::FeatureBased;
  cfg.validate();
  return cfg;
}

ExperimentConfig read_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_text(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_config(const ExperimentConfig& cfg) {
  json j{{"base_seed", cfg.base_seed},
         {"repeats", cfg.repeats},
         {"jobs", cfg.jobs},
         {"clear_threshold", cfg.clear_threshold},
         {"scene", scene_spec_json(cfg.scene)},
         {"noise", noise_json(cfg.noise)},
         {"camera", camera_json(cfg.camera)},
         {"trackers",
          {{"position", tracker_json(cfg.position_tracker)},
           {"feature", tracker_json(cfg.feature_tracker)}}},
         {"similarity",
          {{"mode", std::string(to_string(cfg.similarity.mode))}, {"d_max", cfg.similarity.d_max}}},
         {"planner", planner_json(cfg.planner)}};
  return j.dump(2) + "\n";
}

std::string dump_noise_model(const NoiseModel& noise) { return noise_json(noise).dump(2) + "\n"; }

NoiseModel parse_noise_model(const std::string& text) {
  NoiseModel n;
  read_noise(parse_json(text, "noise model"), n);
  n.validate();
  return n;
}

std::string dump_scene(const Scene& scene) {
  json tomatoes = json::array();
  for (const auto& t : scene.tomatoes) {
    tomatoes.push_back(
        {{"id", t.object_id}, {"center", vec_json(t.center)}, {"radius", t.radius}, {"truss", t.truss}});
  }
  json leaves = json::array();
  for (const auto& l : scene.leaves) {
    leaves.push_back(
        {{"center", vec_json(l.center)}, {"normal", vec_json(l.normal)}, {"radius", l.radius}});
  }
  json features = json::array();
  for (const auto& f : scene.latent_features) {
    features.push_back(std::vector<double>(f.data(), f.data() + f.size()));
  }
  json j{{"tomatoes", std::move(tomatoes)},
         {"leaves", std::move(leaves)},
         {"latent_features", std::move(features)},
         {"roi", box_json(scene.roi)},
         {"stem_base", vec_json(scene.stem_base)},
         {"stem_height", scene.stem_height}};
  return j.dump(2) + "\n";
}

Scene parse_scene(const std::string& text) {
  const json j = parse_json(text, "scene");
  Scene scene;
  try {
    for (const json& t : j.at("tomatoes")) {
      scene.tomatoes.push_back({t.at("id").get<int>(), vec_from(t.at("center"), "tomato.center"),
                                t.at("radius").get<double>(), t.value("truss", 0)});
    }
    for (const json& l : j.at("leaves")) {
      scene.leaves.push_back({vec_from(l.at("center"), "leaf.center"),
                              vec_from(l.at("normal"), "leaf.normal"), l.at("radius").get<double>()});
    }
    for (const json& f : j.at("latent_features")) {
      const auto v = f.get<std::vector<double>>();
      scene.latent_features.push_back(
          Eigen::Map<const FeatureVector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    scene.roi = {vec_from(j.at("roi").at("min"), "roi.min"), vec_from(j.at("roi").at("max"), "roi.max")};
    scene.stem_base = vec_from(j.at("stem_base"), "stem_base");
    scene.stem_height = j.at("stem_height").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  for (std::size_t k = 0; k < scene.tomatoes.size(); ++k) {
    if (scene.tomatoes[k].object_id != static_cast<int>(k + 1)) {
      throw ConfigError("scene: object ids must be contiguous from 1");
    }
  }
  if (scene.latent_features.size() != scene.tomatoes.size()) {
    throw ConfigError("scene: one latent feature per tomato required");
  }
  return scene;
}

}  // namespace mvtrack
