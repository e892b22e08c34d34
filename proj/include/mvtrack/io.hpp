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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "mvtrack/core.hpp"
#include "mvtrack/experiment.hpp"

namespace mvtrack {

// Sequence files are JSON Lines: one header object
//   {"format":"mvtrack-sequence","version":1,"feature_dim":D}
// followed by one object per viewpoint. Lines end with '\n' on every
// platform; doubles are written in shortest round-trip form.

inline constexpr int kSequenceFormatVersion = 1;

void write_sequence(std::ostream& out, std::span<const Viewpoint> sequence,
                    std::size_t feature_dim = kDefaultFeatureDim);
void write_sequence(const std::filesystem::path& path, std::span<const Viewpoint> sequence,
                    std::size_t feature_dim = kDefaultFeatureDim);

/// Throws ParseError (with line number) on malformed lines and SchemaError on
/// a feature-width mismatch or unsupported header.
std::vector<Viewpoint> read_sequence(std::istream& in);
std::vector<Viewpoint> read_sequence(const std::filesystem::path& path);

// Track outputs: CSV with header
//   viewpoint_index,track_id,x,y,z,x_min,y_min,x_max,y_max
void write_track_outputs(const std::filesystem::path& path, std::span<const TrackOutput> outputs);
std::vector<TrackOutput> read_track_outputs(const std::filesystem::path& path);

// Orderings: one pool index per line.
void write_order(const std::filesystem::path& path, const std::vector<std::size_t>& order);
std::vector<std::size_t> read_order(const std::filesystem::path& path);

// Experiment configuration as JSON. Missing keys keep their defaults;
// unknown keys are rejected with ConfigError.
ExperimentConfig read_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);
std::string dump_config(const ExperimentConfig& cfg);

std::string dump_scene(const Scene& scene);
Scene parse_scene(const std::string& text);
std::string dump_noise_model(const NoiseModel& noise);
NoiseModel parse_noise_model(const std::string& text);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace mvtrack
