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

#include "app.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "cqad/common.hpp"
#include "cqad/parallel.hpp"

namespace cqad::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScanAxis {
  std::string key;
  std::vector<double> values;
  std::string unit;
};

// "key=start:stop:points" or "key=v1,v2,..."; values share the unit suffix of the first entry.
ScanAxis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--axis '" + spec + "': expected key=values");
  ScanAxis a;
  a.key = spec.substr(0, eq);
  const std::string rhs = spec.substr(eq + 1);
  const std::string field = "--axis " + a.key;
  auto number = [&](const std::string& text, bool take_unit) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw UsageError(field + ": malformed value '" + text + "'");
    std::string unit(end);
    unit.erase(0, unit.find_first_not_of(' '));
    if (take_unit) a.unit = unit;
    if (!unit.empty() && unit != a.unit) throw UsageError(field + ": mixed units");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = rhs.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(rhs);
  for (std::string p; std::getline(ss, p, sep);) parts.push_back(p);
  if (parts.empty()) throw UsageError(field + ": no values");
  if (sep == ':') {
    if (parts.size() != 3) throw UsageError(field + ": expected start:stop:points");
    const double start = number(parts[0], true);
    const double stop = number(parts[1], false);
    char* end = nullptr;
    const long n = std::strtol(parts[2].c_str(), &end, 10);
    if (end == parts[2].c_str() || *end != '\0' || n < 1) {
      throw UsageError(field + ": points must be a positive integer");
    }
    for (long i = 0; i < n; ++i) {
      a.values.push_back(n == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
  } else {
    for (std::size_t i = 0; i < parts.size(); ++i) a.values.push_back(number(parts[i], i == 0));
  }
  return a;
}

void write_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    f << bytes;
    if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string render(const Table& table, const nlohmann::json& summary, const std::string& format) {
  if (format == "json") return nlohmann::json{{"table", table.to_json()}, {"summary", summary}}.dump(2) + "\n";
  std::ostringstream os;
  table.write_csv(os);
  return os.str();
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

struct Prepared {
  Config config;
  Runner runner;
};

Prepared prepare(const std::string& name, const YAML::Node& base, const std::vector<std::string>& overrides) {
  YAML::Node root = YAML::Clone(base);
  for (const auto& o : overrides) apply_override(root, o);
  std::set<std::string> used;
  Prepared p{parse_config(root, used), {}};
  p.runner = plan(name, p.config, used);
  const auto unknown = unused_keys(p.config.root, used);
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw Error(ErrorCode::kConfig, "unknown keys: " + list);
  }
  return p;
}

YAML::Node load_file(const std::string& path) {
  try {
    return YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw Error(ErrorCode::kConfig, path + ": cannot open");
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
}

struct Options {
  std::string command;
  std::string config;
  std::string out;
  std::string format;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::vector<std::string> overrides;
  std::vector<std::string> axes;
};

int execute(const Options& opt, bool scan, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const YAML::Node base = load_file(opt.config);

  std::vector<ScanAxis> axes;
  for (const auto& a : opt.axes) axes.push_back(parse_axis(a));
  std::size_t points = 1;
  for (const auto& a : axes) points *= a.values.size();

  std::vector<Prepared> prepared;
  std::vector<std::vector<double>> coords(points);
  for (std::size_t i = 0; i < points; ++i) {
    std::vector<std::string> overrides = opt.overrides;
    std::size_t rest = i;
    for (std::size_t k = axes.size(); k-- > 0;) {
      const auto& a = axes[k];
      const std::size_t j = rest % a.values.size();
      rest /= a.values.size();
      coords[i].insert(coords[i].begin(), a.values[j]);
      overrides.push_back(a.key + "=" + format_number(a.values[j]) + (a.unit.empty() ? "" : " " + a.unit));
    }
    prepared.push_back(prepare(opt.command, base, overrides));
  }

  const Config& cfg = prepared.front().config;
  const std::string format = opt.format.empty() ? cfg.format : opt.format;
  const fs::path dir = opt.out.empty() ? fs::path(cfg.output_dir) : fs::path(opt.out);
  fs::create_directories(dir);

  std::string hashed = cfg.text;
  for (const auto& o : opt.overrides) hashed += "\n" + o;
  for (const auto& a : opt.axes) hashed += "\naxis " + a;

  std::vector<std::optional<CommandResult>> results(points);
  std::vector<std::string> failures(points);
  const unsigned inner = scan && points > 1 ? 1u : opt.workers;
  parallel_for(points, scan ? opt.workers : 1u, [&](std::size_t i) {
    try {
      results[i] = prepared[i].runner(RunContext{stream_seed(opt.seed, i), inner});
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  bool ok = true;
  Table table;
  nlohmann::json summary = nlohmann::json::array();
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < points; ++i) {
    if (!results[i]) {
      ok = false;
      err << "error: point " << i << ": " << failures[i] << "\n";
      continue;
    }
    const CommandResult& r = *results[i];
    if (!scan) {
      table = r.table;
    } else {
      if (table.columns.empty()) {
        for (const auto& a : axes) table.columns.push_back(a.key);
        table.columns.insert(table.columns.end(), r.table.columns.begin(), r.table.columns.end());
        table.columns.push_back("seed");
      }
      for (const auto& row : r.table.rows) {
        std::vector<Cell> full(coords[i].begin(), coords[i].end());
        full.insert(full.end(), row.begin(), row.end());
        full.emplace_back(std::to_string(stream_seed(opt.seed, i)));
        table.rows.push_back(std::move(full));
      }
    }
    summary.push_back(r.summary);
    for (const auto& w : r.warnings) {
      warnings.push_back(scan ? "point " + std::to_string(i) + ": " + w : w);
      err << "warning: " << warnings.back() << "\n";
    }
  }

  const std::string stem = opt.command + (scan ? "_scan" : "") + (ok ? "" : ".partial");
  const fs::path data = dir / (stem + "." + format);
  const nlohmann::json summary_out = scan ? summary : (summary.empty() ? nlohmann::json::object() : summary[0]);
  write_atomic(data, render(table, summary_out, format));

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json manifest = {
      {"version", kVersion},
      {"command", scan ? "scan" : "run"},
      {"subcommand", opt.command},
      {"config", opt.config},
      {"config_hash", hex(fnv1a(hashed))},
      {"seed", opt.seed},
      {"workers", opt.workers},
      {"overrides", opt.overrides},
      {"axes", opt.axes},
      {"points", points},
      {"outputs", {data.string()}},
      {"valid", ok},
      {"wall_time_s", wall},
      {"summary", summary_out},
      {"warnings", warnings},
  };
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  out << data.string() << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"cqad: simulate a transmon coupled to mechanical oscillators", "cqad"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Options opt;
  auto common = [&](CLI::App* sub) {
    sub->add_option("experiment", opt.command, "Experiment name")
        ->required()
        ->check(CLI::IsMember(subcommands()));
    sub->add_option("--config,-c", opt.config, "YAML configuration")->required();
    sub->add_option("--out,-o", opt.out, "Output directory (default: output.dir)");
    sub->add_option("--seed", opt.seed, "Master seed")->default_val(0);
    sub->add_option("--workers,-j", opt.workers, "Worker threads")->default_val(1)->check(CLI::PositiveNumber);
    sub->add_option("--override", opt.overrides, "key.path=value");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  common(run);
  CLI::App* scan = app.add_subcommand("scan", "Run an experiment over a grid of config values");
  common(scan);
  scan->add_option("--axis", opt.axes, "key=start:stop:points or key=v1,v2,...")->required();
  CLI::App* list = app.add_subcommand("list", "List experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    for (const auto& s : subcommands()) out << s << "\n";
    return 0;
  }
  try {
    return execute(opt, scan->parsed(), out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kInvalidSpec ||
                   e.code() == ErrorCode::kInvalidArgument
               ? 2
               : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cqad::cli
