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
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace cqad::cli {

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
};

struct CommandResult {
  Table table;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> warnings;
};

struct RunContext {
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

using Runner = std::function<CommandResult(const RunContext&)>;

const std::vector<std::string>& subcommands();

// Parses the experiment and noise sections of every subcommand so that unknown keys
// anywhere are reported, and returns the runner for `name`.
Runner plan(const std::string& name, const Config& config, std::set<std::string>& used);

std::string format_number(double v);

}  // namespace cqad::cli
