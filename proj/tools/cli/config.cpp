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

#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cqad/common.hpp"

namespace cqad::cli {
namespace {

struct Unit {
  const char* suffix;
  Dim dim;
  double scale;
};

constexpr Unit kUnits[] = {
    {"GHz", Dim::kFrequency, 1e9},      {"MHz", Dim::kFrequency, 1e6},
    {"kHz", Dim::kFrequency, 1e3},      {"Hz", Dim::kFrequency, 1.0},
    {"s", Dim::kTime, 1.0},             {"ms", Dim::kTime, 1e-3},
    {"us", Dim::kTime, 1e-6},           {"µs", Dim::kTime, 1e-6},
    {"ns", Dim::kTime, 1e-9},           {"K", Dim::kTemperature, 1.0},
    {"mK", Dim::kTemperature, 1e-3},    {"V", Dim::kVoltage, 1.0},
    {"mV", Dim::kVoltage, 1e-3},        {"F", Dim::kCapacitance, 1.0},
    {"nF", Dim::kCapacitance, 1e-9},    {"pF", Dim::kCapacitance, 1e-12},
    {"fF", Dim::kCapacitance, 1e-15},   {"H", Dim::kInductance, 1.0},
    {"nH", Dim::kInductance, 1e-9},     {"pH", Dim::kInductance, 1e-12},
    {"GHz/V", Dim::kFrequencyPerVolt, 1e9}, {"MHz/V", Dim::kFrequencyPerVolt, 1e6},
    {"kHz/V", Dim::kFrequencyPerVolt, 1e3}, {"Hz/V", Dim::kFrequencyPerVolt, 1.0},
    {"1/s", Dim::kRate, 1.0},           {"1/ms", Dim::kRate, 1e3},
    {"1/us", Dim::kRate, 1e6},
};

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kConfig, field + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void walk(const YAML::Node& node, const std::string& path, const std::set<std::string>& used,
          std::vector<std::string>& out) {
  if (node.IsMap()) {
    for (const auto& kv : node) {
      const std::string p = join(path, kv.first.as<std::string>());
      if (!used.count(p)) {
        out.push_back(p);
      } else {
        walk(kv.second, p, used, out);
      }
    }
  } else if (node.IsSequence()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      const std::string p = join(path, std::to_string(i));
      if (node[i].IsMap() || node[i].IsSequence()) {
        if (!used.count(p)) {
          out.push_back(p);
        } else {
          walk(node[i], p, used, out);
        }
      }
    }
  }
}

bool is_index(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

}  // namespace

double parse_quantity(const std::string& text, Dim dim, const std::string& field) {
  const std::string s = trim(text);
  if (s.empty()) fail(field, "empty value");
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) fail(field, "malformed quantity '" + text + "'");
  if (!std::isfinite(v)) fail(field, "value is not finite");
  const std::string suffix = trim(std::string(end));
  if (suffix.empty()) return v;
  for (const auto& u : kUnits) {
    if (suffix == u.suffix) {
      if (u.dim != dim) fail(field, "unit '" + suffix + "' has the wrong dimension");
      return v * u.scale;
    }
  }
  fail(field, "unknown unit '" + suffix + "'");
}

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::kConfig, "override '" + assignment + "' is not key=value");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw Error(ErrorCode::kConfig, "override key '" + key + "' has an empty part");
    parts.push_back(part);
  }
  YAML::Node cur;
  cur.reset(root);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next;
    if (cur.IsSequence() && is_index(parts[i])) {
      const auto idx = std::stoul(parts[i]);
      if (idx >= cur.size()) throw Error(ErrorCode::kConfig, key + ": index out of range");
      next.reset(cur[idx]);
    } else {
      next.reset(cur[parts[i]]);
    }
    cur.reset(next);
  }
  YAML::Node parsed = YAML::Load(value.empty() ? "~" : value);
  if (cur.IsSequence() && is_index(parts.back())) {
    const auto idx = std::stoul(parts.back());
    if (idx >= cur.size()) throw Error(ErrorCode::kConfig, key + ": index out of range");
    cur[idx] = parsed;
  } else {
    cur[parts.back()] = parsed;
  }
}

Reader::Reader(YAML::Node node, std::string path, std::set<std::string>* used)
    : node_(std::move(node)), path_(std::move(path)), used_(used) {}

std::string Reader::field(const std::string& key) const { return join(path_, key); }

bool Reader::has(const std::string& key) const {
  return node_.IsMap() && node_[key] && !node_[key].IsNull();
}

YAML::Node Reader::scalar_node(const std::string& key) const {
  used_->insert(field(key));
  const YAML::Node n = node_.IsMap() ? node_[key] : YAML::Node();
  if (n && !n.IsScalar()) fail(field(key), "expected a scalar");
  return n;
}

Reader Reader::child(const std::string& key) const {
  used_->insert(field(key));
  YAML::Node n = node_.IsMap() ? node_[key] : YAML::Node();
  if (n && !n.IsNull() && !n.IsMap()) fail(field(key), "expected a table");
  return Reader(n && n.IsMap() ? n : YAML::Node(YAML::NodeType::Map), field(key), used_);
}

std::vector<Reader> Reader::items(const std::string& key) const {
  used_->insert(field(key));
  std::vector<Reader> out;
  const YAML::Node n = node_.IsMap() ? node_[key] : YAML::Node();
  if (!n || n.IsNull()) return out;
  if (!n.IsSequence()) fail(field(key), "expected a list");
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string p = join(field(key), std::to_string(i));
    if (!n[i].IsMap()) fail(p, "expected a table");
    used_->insert(p);
    out.emplace_back(n[i], p, used_);
  }
  return out;
}

double Reader::quantity(const std::string& key, Dim dim, std::optional<double> fallback) const {
  const YAML::Node n = scalar_node(key);
  if (!n || n.IsNull()) {
    if (!fallback) fail(field(key), "missing required value");
    return *fallback;
  }
  return parse_quantity(n.Scalar(), dim, field(key));
}

std::optional<double> Reader::optional_quantity(const std::string& key, Dim dim) const {
  const YAML::Node n = scalar_node(key);
  if (!n || n.IsNull()) return std::nullopt;
  return parse_quantity(n.Scalar(), dim, field(key));
}

double Reader::positive(const std::string& key, Dim dim, std::optional<double> fallback) const {
  const double v = quantity(key, dim, fallback);
  if (!(v > 0.0)) fail(field(key), "must be positive");
  return v;
}

double Reader::nonnegative(const std::string& key, Dim dim, std::optional<double> fallback) const {
  const double v = quantity(key, dim, fallback);
  if (v < 0.0) fail(field(key), "must not be negative");
  return v;
}

int Reader::integer(const std::string& key, std::optional<int> fallback) const {
  const YAML::Node n = scalar_node(key);
  if (!n || n.IsNull()) {
    if (!fallback) fail(field(key), "missing required value");
    return *fallback;
  }
  try {
    return n.as<int>();
  } catch (const YAML::Exception&) {
    fail(field(key), "expected an integer, got '" + n.Scalar() + "'");
  }
}

bool Reader::flag(const std::string& key, std::optional<bool> fallback) const {
  const YAML::Node n = scalar_node(key);
  if (!n || n.IsNull()) {
    if (!fallback) fail(field(key), "missing required value");
    return *fallback;
  }
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    fail(field(key), "expected true or false, got '" + n.Scalar() + "'");
  }
}

std::string Reader::text(const std::string& key, std::optional<std::string> fallback) const {
  const YAML::Node n = scalar_node(key);
  if (!n || n.IsNull()) {
    if (!fallback) fail(field(key), "missing required value");
    return *fallback;
  }
  return n.Scalar();
}

std::string Reader::choice(const std::string& key, const std::vector<std::string>& allowed,
                           std::optional<std::string> fallback) const {
  const std::string v = text(key, std::move(fallback));
  for (const auto& a : allowed) {
    if (a == v) return v;
  }
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  fail(field(key), "'" + v + "' is not one of " + list);
}

std::vector<double> Reader::grid(const std::string& key, Dim dim,
                                 std::optional<std::vector<double>> fallback) const {
  used_->insert(field(key));
  const YAML::Node n = node_.IsMap() ? node_[key] : YAML::Node();
  if (!n || n.IsNull()) {
    if (!fallback) fail(field(key), "missing required value");
    return *fallback;
  }
  std::vector<double> out;
  if (n.IsSequence()) {
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string p = join(field(key), std::to_string(i));
      if (!n[i].IsScalar()) fail(p, "expected a scalar");
      out.push_back(parse_quantity(n[i].Scalar(), dim, p));
    }
  } else if (n.IsMap()) {
    const Reader g(n, field(key), used_);
    const double start = g.quantity("start", dim);
    const double stop = g.quantity("stop", dim);
    const int points = g.integer("points");
    if (points < 1) fail(g.field("points"), "must be at least 1");
    if (points == 1 && start != stop) fail(g.field("points"), "one point needs start == stop");
    for (int i = 0; i < points; ++i) {
      out.push_back(points == 1 ? start : start + (stop - start) * i / (points - 1));
    }
  } else {
    out.push_back(parse_quantity(n.Scalar(), dim, field(key)));
  }
  if (out.empty()) fail(field(key), "empty grid");
  return out;
}

std::vector<std::string> unused_keys(const YAML::Node& root, const std::set<std::string>& used) {
  std::vector<std::string> out;
  walk(root, "", used, out);
  return out;
}

model::DeviceSpec parse_device(const Reader& r) {
  model::DeviceSpec d = model::reference_device();
  const Reader t = r.child("transmon");
  auto& tr = d.transmon;
  tr.EJ_max = t.positive("EJ_max", Dim::kFrequency, tr.EJ_max * 1e9) / 1e9;
  tr.EC = t.positive("EC", Dim::kFrequency, tr.EC * 1e9) / 1e9;
  tr.omega_q = angular(t.positive("omega_q", Dim::kFrequency, tr.omega_q / kTwoPi));
  tr.anharmonicity = angular(t.quantity("anharmonicity", Dim::kFrequency, tr.anharmonicity / kTwoPi));
  tr.T1 = t.positive("T1", Dim::kTime, tr.T1);
  tr.T2_star = t.positive("T2_star", Dim::kTime, tr.T2_star);
  tr.thermal_pop = t.nonnegative("thermal_pop", Dim::kNone, tr.thermal_pop);
  tr.levels = t.integer("levels", tr.levels);
  if (auto v = t.optional_quantity("stark_thermal_pop", Dim::kNone)) {
    if (*v < 0.0) fail(t.field("stark_thermal_pop"), "must not be negative");
    tr.stark_thermal_pop = *v;
  }

  if (r.has("mechanics")) {
    d.mechanics.clear();
    for (const Reader& m : r.items("mechanics")) {
      model::MechSpec s;
      s.name = m.text("name", "m" + std::to_string(d.mechanics.size()));
      s.omega_m = angular(m.positive("omega_m", Dim::kFrequency));
      s.T1 = m.positive("T1", Dim::kTime);
      s.T2_star = m.nonnegative("T2_star", Dim::kTime, 0.0);
      s.g0 = angular(m.nonnegative("g0", Dim::kFrequencyPerVolt));
      s.Cm = m.nonnegative("Cm", Dim::kCapacitance, 0.0);
      s.kappa_e = angular(m.nonnegative("kappa_e", Dim::kFrequency, 0.0));
      s.thermal_pop = m.nonnegative("thermal_pop", Dim::kNone, 0.0);
      s.qubit_T1 = m.optional_quantity("qubit_T1", Dim::kTime);
      s.qubit_T2_star = m.optional_quantity("qubit_T2_star", Dim::kTime);
      d.mechanics.push_back(s);
    }
  } else {
    r.items("mechanics");
  }
  d.tls.clear();
  for (const Reader& m : r.items("tls")) {
    model::TlsSpec s;
    s.V0 = m.quantity("V0", Dim::kVoltage);
    s.lambda = m.quantity("lambda", Dim::kFrequencyPerVolt);
    s.g = angular(m.nonnegative("g", Dim::kFrequency));
    s.g_long = angular(m.nonnegative("g_long", Dim::kFrequency, 0.0));
    s.Gamma1 = m.positive("Gamma1", Dim::kRate);
    s.Gamma_phi = m.nonnegative("Gamma_phi", Dim::kRate, 0.0);
    const int mech = m.integer("mech", 0);
    if (mech < 0) fail(m.field("mech"), "must not be negative");
    s.mech = static_cast<std::size_t>(mech);
    s.thermal_pop = m.nonnegative("thermal_pop", Dim::kNone, 0.0);
    d.tls.push_back(s);
  }
  d.V_dc = r.quantity("V_dc", Dim::kVoltage, d.V_dc);
  d.fock_dim = r.integer("fock_dim", d.fock_dim);
  try {
    d.validate();
  } catch (const Error& e) {
    fail(r.path(), e.what());
  }
  return d;
}

Config parse_config(YAML::Node root, std::set<std::string>& used) {
  if (!root.IsMap()) throw Error(ErrorCode::kConfig, "config root must be a table");
  Config c;
  c.root = root;
  const Reader top(root, "", &used);
  c.device = parse_device(top.child("device"));
  const Reader out = top.child("output");
  c.output_dir = out.text("dir", c.output_dir);
  c.format = out.choice("format", {"csv", "json"}, c.format);
  YAML::Emitter em;
  em << root;
  c.text = em.c_str();
  return c;
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides,
                   std::set<std::string>& used) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw Error(ErrorCode::kConfig, path + ": cannot open config");
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);
  return parse_config(root, used);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cqad::cli
