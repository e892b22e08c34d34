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

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mvtrack/io.hpp"

namespace mvtrack {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json box_json(const BBox2D& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("expected a 3-vector");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

BBox2D box_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw InputError("expected a 4-element box");
  BBox2D b{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
           j.at(3).get<double>()};
  if (!b.valid()) throw InputError("invalid bounding box");
  return b;
}

json viewpoint_json(const Viewpoint& vp) {
  const auto& q = vp.pose.orientation;
  json dets = json::array();
  for (const auto& d : vp.detections) {
    json jd{{"bbox", box_json(d.bbox)},
            {"position", vec_json(d.position)},
            {"confidence", d.confidence},
            {"class_id", d.class_id}};
    if (d.feature) {
      jd["feature"] = std::vector<double>(d.feature->data(), d.feature->data() + d.feature->size());
    } else {
      jd["feature"] = nullptr;
    }
    dets.push_back(std::move(jd));
  }
  json gts = json::array();
  for (const auto& g : vp.gt) {
    gts.push_back({{"id", g.object_id},
                   {"position", vec_json(g.position)},
                   {"visible_fraction", g.visible_fraction},
                   {"bbox", box_json(g.bbox)}});
  }
  return json{{"index", vp.index},
              {"pose",
               {{"position", vec_json(vp.pose.position)},
                {"orientation", json::array({q.w(), q.x(), q.y(), q.z()})}}},
              {"detections", std::move(dets)},
              {"gt", std::move(gts)}};
}

Viewpoint viewpoint_from(const json& j, std::size_t feature_dim) {
  Viewpoint vp;
  vp.index = j.at("index").get<int>();
  if (vp.index < 0) throw InputError("negative viewpoint index");
  const json& pose = j.at("pose");
  vp.pose.position = vec_from(pose.at("position"));
  const json& q = pose.at("orientation");
  if (!q.is_array() || q.size() != 4) throw InputError("orientation must be [w,x,y,z]");
  vp.pose.orientation = Eigen::Quaterniond(q.at(0).get<double>(), q.at(1).get<double>(),
                                           q.at(2).get<double>(), q.at(3).get<double>());
  if (std::abs(vp.pose.orientation.norm() - 1.0) > 1e-9) {
    throw InputError("orientation quaternion is not unit norm");
  }
  for (const json& jd : j.at("detections")) {
    Detection d;
    d.bbox = box_from(jd.at("bbox"));
    d.position = vec_from(jd.at("position"));
    d.confidence = jd.at("confidence").get<double>();
    d.class_id = jd.value("class_id", 0);
    const json& f = jd.at("feature");
    if (!f.is_null()) {
      const auto values = f.get<std::vector<double>>();
      if (values.size() != feature_dim) {
        throw SchemaError("viewpoint " + std::to_string(vp.index) + ": feature has " +
                          std::to_string(values.size()) + " components, header declares " +
                          std::to_string(feature_dim));
      }
      d.feature = Eigen::Map<const FeatureVector>(values.data(),
                                                  static_cast<Eigen::Index>(values.size()));
    }
    validate(d);
    vp.detections.push_back(std::move(d));
  }
  for (const json& jg : j.at("gt")) {
    GroundTruthEntry g;
    g.object_id = jg.at("id").get<int>();
    g.position = vec_from(jg.at("position"));
    g.visible_fraction = jg.at("visible_fraction").get<double>();
    if (!(g.visible_fraction >= 0.0 && g.visible_fraction <= 1.0)) {
      throw InputError("visible_fraction outside [0,1]");
    }
    if (jg.contains("bbox")) g.bbox = box_from(jg.at("bbox"));
    vp.gt.push_back(g);
  }
  return vp;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

void write_sequence(std::ostream& out, std::span<const Viewpoint> sequence,
                    std::size_t feature_dim) {
  out << json{{"format", "mvtrack-sequence"},
              {"version", kSequenceFormatVersion},
              {"feature_dim", feature_dim}}
             .dump()
      << '\n';
  for (const auto& vp : sequence) {
    for (const auto& d : vp.detections) {
      if (d.feature && static_cast<std::size_t>(d.feature->size()) != feature_dim) {
        throw SchemaError("viewpoint " + std::to_string(vp.index) +
                          ": feature width differs from feature_dim");
      }
    }
    out << viewpoint_json(vp).dump() << '\n';
  }
}

void write_sequence(const std::filesystem::path& path, std::span<const Viewpoint> sequence,
                    std::size_t feature_dim) {
  auto out = open_out(path);
  write_sequence(out, sequence, feature_dim);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<Viewpoint> read_sequence(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t feature_dim = 0;
  bool have_header = false;
  std::vector<Viewpoint> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed record: ") + e.what());
    }
    try {
      if (!have_header) {
        if (j.value("format", std::string()) != "mvtrack-sequence") {
          throw SchemaError("line 1 is not a sequence header");
        }
        if (j.at("version").get<int>() != kSequenceFormatVersion) {
          throw SchemaError("unsupported sequence format version");
        }
        feature_dim = j.at("feature_dim").get<std::size_t>();
        have_header = true;
        continue;
      }
      out.push_back(viewpoint_from(j, feature_dim));
    } catch (const SchemaError&) {
      throw;
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const InputError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!have_header) throw ParseError(line_no + 1, "missing sequence header");
  return out;
}

std::vector<Viewpoint> read_sequence(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_sequence(in);
}

void write_track_outputs(const std::filesystem::path& path, std::span<const TrackOutput> outputs) {
  auto out = open_out(path);
  out << "viewpoint_index,track_id,x,y,z,x_min,y_min,x_max,y_max\n";
  out << std::setprecision(17);
  for (const auto& o : outputs) {
    out << o.viewpoint_index << ',' << o.track_id << ',' << o.position.x() << ','
        << o.position.y() << ',' << o.position.z() << ',' << o.bbox.x_min << ',' << o.bbox.y_min
        << ',' << o.bbox.x_max << ',' << o.bbox.y_max << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<TrackOutput> read_track_outputs(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<TrackOutput> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 9) throw ParseError(line_no, "expected 9 comma-separated fields");
    try {
      std::size_t used = 0;
      auto num = [&](const std::string& s) {
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      auto integer = [&](const std::string& s) {
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      TrackOutput o;
      o.viewpoint_index = integer(fields[0]);
      o.track_id = integer(fields[1]);
      o.position = Vec3(num(fields[2]), num(fields[3]), num(fields[4]));
      o.bbox = {num(fields[5]), num(fields[6]), num(fields[7]), num(fields[8])};
      out.push_back(o);
    } catch (const std::exception&) {
      throw ParseError(line_no, "non-numeric field in track output");
    }
  }
  return out;
}

void write_order(const std::filesystem::path& path, const std::vector<std::size_t>& order) {
  auto out = open_out(path);
  for (std::size_t i : order) out << i << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<std::size_t> read_order(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::size_t> order;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t used = 0;
    try {
      const unsigned long v = std::stoul(line, &used);
      if (used != line.size()) throw std::invalid_argument(line);
      order.push_back(v);
    } catch (const std::exception&) {
      throw ParseError(line_no, "expected a pool index");
    }
  }
  return order;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mvtrack
