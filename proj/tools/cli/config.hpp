// Copyright 2026 The cqad Authors
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

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "cqad/model.hpp"

namespace cqad::cli {

enum class Dim { kNone, kFrequency, kTime, kTemperature, kVoltage, kCapacitance, kInductance,
                 kFrequencyPerVolt, kRate };

// Parses "5.1071 GHz", "64us", "-226 MHz" or a bare number (SI) into SI units.
// Throws Error(kConfig) naming `field` on malformed input or a suffix of the wrong dimension.
double parse_quantity(const std::string& text, Dim dim, const std::string& field);

// Applies "a.b.2.c=value" to a YAML tree; numeric path parts index sequences.
void apply_override(YAML::Node& root, const std::string& assignment);

// Read access to a YAML tree that records every key it touches.
class Reader {
 public:
  Reader(YAML::Node node, std::string path, std::set<std::string>* used);

  bool has(const std::string& key) const;
  Reader child(const std::string& key) const;
  std::vector<Reader> items(const std::string& key) const;

  double quantity(const std::string& key, Dim dim, std::optional<double> fallback = std::nullopt) const;
  double positive(const std::string& key, Dim dim, std::optional<double> fallback = std::nullopt) const;
  double nonnegative(const std::string& key, Dim dim,
                     std::optional<double> fallback = std::nullopt) const;
  std::optional<double> optional_quantity(const std::string& key, Dim dim) const;
  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) const;
  bool flag(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  std::string choice(const std::string& key, const std::vector<std::string>& allowed,
                     std::optional<std::string> fallback = std::nullopt) const;
  // {start, stop, points} or an explicit list.
  std::vector<double> grid(const std::string& key, Dim dim,
                           std::optional<std::vector<double>> fallback = std::nullopt) const;

  const std::string& path() const { return path_; }
  std::string field(const std::string& key) const;

 private:
  YAML::Node scalar_node(const std::string& key) const;

  YAML::Node node_;
  std::string path_;
  std::set<std::string>* used_;
};

// Every mapping key below root whose path was never read; sorted.
std::vector<std::string> unused_keys(const YAML::Node& root, const std::set<std::string>& used);

struct Config {
  YAML::Node root;
  model::DeviceSpec device;
  std::string output_dir = "out";
  std::string format = "csv";
  std::string text;  // canonical dump used for hashing
};

// Loads, applies overrides and parses the device; experiment sections are parsed by the
// commands. `used` receives every key read so far.
Config load_config(const std::string& path, const std::vector<std::string>& overrides,
                   std::set<std::string>& used);
Config parse_config(YAML::Node root, std::set<std::string>& used);

model::DeviceSpec parse_device(const Reader& r);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace cqad::cli
