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

#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "cqad/common.hpp"
#include "cqad/engine.hpp"
#include "cqad/experiments.hpp"
#include "cqad/fitkit.hpp"
#include "cqad/noisekit.hpp"
#include "cqad/parallel.hpp"
#include "cqad/tomography.hpp"

namespace cqad::cli {
namespace {

using experiments::Axis;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kConfig, field + ": " + what);
}

std::size_t mech_index(const Reader& r, const model::DeviceSpec& dev, int fallback) {
  const int m = r.integer("mech", fallback);
  if (m < 0 || static_cast<std::size_t>(m) >= dev.mechanics.size()) {
    fail(r.field("mech"), "no oscillator with index " + std::to_string(m));
  }
  return static_cast<std::size_t>(m);
}

// Qubit coherence at oscillator `mech` limited by T1; quasi-static dephasing does not
// drive transitions and is left out of the Markovian model.
model::DeviceSpec without_qubit_dephasing(const model::DeviceSpec& dev, std::size_t mech) {
  model::DeviceSpec d = dev;
  auto& m = d.mechanics[mech];
  m.qubit_T2_star = 2.0 * m.qubit_T1.value_or(dev.transmon.T1);
  return d;
}

std::optional<double> json_number(const std::function<double()>& f) {
  try {
    return f();
  } catch (const Error&) {
    return std::nullopt;
  }
}

nlohmann::json maybe(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

Table scan_table(const experiments::ScanResult& s, const std::vector<std::string>& names,
                 const std::string& value) {
  Table t;
  t.columns = names;
  t.columns.push_back(value);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto idx = s.unravel(i);
    std::vector<Cell> row;
    for (std::size_t a = 0; a < idx.size(); ++a) row.emplace_back(s.axes[a].values[idx[a]]);
    row.emplace_back(s.values[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct NoiseSpec {
  int members = 0;  // 0: sized for the Ramsey target
  double nu_min = 100.0;
  double gamma_min = 1e5 * std::exp(-20.0);
  double gamma_max = 1e5;
  std::optional<double> ramsey_time = 64e-6;
  int shots = 200;

  noisekit::FluctuatorEnsemble build(std::uint64_t seed) const {
    const int n = members > 0 ? members
                              : noisekit::members_for_rate(1.0 / ramsey_time.value_or(64e-6), nu_min);
    auto e = noisekit::sample_ensemble(n, nu_min, gamma_min, gamma_max, stream_seed(seed, 1));
    if (ramsey_time) noisekit::scale_to_ramsey_time(e, *ramsey_time);
    return e;
  }
};

std::optional<NoiseSpec> parse_noise(const Reader& top) {
  const bool present = top.has("noise");
  const Reader r = top.child("noise");
  NoiseSpec s;
  s.members = r.integer("members", 0);
  if (s.members < 0) fail(r.field("members"), "must not be negative");
  s.nu_min = r.positive("nu_min", Dim::kRate, s.nu_min);
  s.gamma_min = r.positive("gamma_min", Dim::kRate, s.gamma_min);
  s.gamma_max = r.positive("gamma_max", Dim::kRate, s.gamma_max);
  if (s.gamma_max < s.gamma_min) fail(r.field("gamma_max"), "must not be below gamma_min");
  if (r.has("ramsey_time")) {
    s.ramsey_time = r.positive("ramsey_time", Dim::kTime);
  } else {
    r.optional_quantity("ramsey_time", Dim::kTime);
  }
  s.shots = r.integer("shots", s.shots);
  if (s.shots < 1) fail(r.field("shots"), "must be positive");
  if (!present) return std::nullopt;
  return s;
}

Runner plan_rabi(const Reader& r, const model::DeviceSpec& dev) {
  experiments::VacuumRabiOptions o;
  o.mech = mech_index(r, dev, 0);
  const double duration = r.positive("duration", Dim::kTime, 3e-6);
  o.samples = r.integer("samples", 201);
  if (o.samples < 2) fail(r.field("samples"), "must be at least 2");
  o.lossless = r.flag("lossless", false);
  return [=](const RunContext&) {
    const engine::Trajectory tr = experiments::vacuum_rabi(dev, duration, o);
    CommandResult out;
    out.table.columns = {"time_s", "P_e", "n_mech"};
    const auto& pe = tr.series("P_e");
    const auto& n = tr.series("n_mech");
    std::size_t im = 0;
    for (std::size_t i = 0; i < pe.size(); ++i) {
      out.table.rows.push_back({tr.times[i], pe[i], n[i]});
      if (im == 0 && i > 0 && i + 1 < pe.size() && pe[i] <= pe[i - 1] && pe[i] < pe[i + 1]) im = i;
    }
    const double g = model::g_em(dev.mechanics[o.mech], dev.V_dc);
    out.summary["g_em_Hz"] = g / kTwoPi;
    out.summary["first_minimum_s"] = im > 0 ? nlohmann::json(tr.times[im]) : nlohmann::json(nullptr);
    out.summary["swap_time_s"] = g > 0.0 ? kPi / (2.0 * g) : 0.0;
    out.warnings = tr.warnings;
    return out;
  };
}

Runner plan_lifetime(const Reader& r, const model::DeviceSpec& base) {
  experiments::LifetimeOptions o;
  o.mech = mech_index(r, base, 0);
  const model::DeviceSpec dev = r.flag("qubit_markovian_dephasing", false)
                                    ? base
                                    : without_qubit_dephasing(base, o.mech);
  const double park = angular(r.quantity("park_detuning", Dim::kFrequency, 35e6));
  if (park == 0.0) fail(r.field("park_detuning"), "must be nonzero");
  const auto delays = r.grid("delays", Dim::kTime, std::vector<double>{1e-3, 6e-3, 11e-3, 16e-3,
                                                                        21e-3, 26e-3, 31e-3, 36e-3,
                                                                        41e-3, 46e-3, 51e-3, 56e-3,
                                                                        61e-3});
  for (double d : delays) {
    if (d < 0.0) fail(r.field("delays"), "delays must not be negative");
  }
  return [=](const RunContext& ctx) {
    auto opt = o;
    opt.seed = ctx.seed;
    opt.workers = ctx.workers;
    const auto s = experiments::mech_lifetime(dev, delays, park, opt);
    CommandResult out;
    out.table = scan_table(s, {"delay_s"}, "P_e");
    out.warnings = s.warnings;
    out.summary["predicted_tau_s"] = experiments::predicted_lifetime(dev, o.mech, park);
    try {
      const auto f = experiments::fit_lifetime(s);
      out.summary["tau_s"] = f.tau;
      out.summary["sigma_tau_s"] = f.sigma_tau;
    } catch (const Error& e) {
      out.warnings.push_back(std::string("lifetime fit failed: ") + e.what());
    }
    return out;
  };
}

Runner plan_coherence(const Reader& r, const model::DeviceSpec& dev,
                      const std::optional<NoiseSpec>& noise) {
  experiments::CoherenceOptions o;
  o.mech = mech_index(r, dev, 0);
  const std::string kind = r.choice("kind", {"ramsey", "echo", "cp"}, "ramsey");
  const int pulses = r.integer("pulses", 2);
  experiments::CoherenceProtocol protocol = experiments::CoherenceProtocol::ramsey();
  if (kind == "echo") protocol = experiments::CoherenceProtocol::echo();
  if (kind == "cp") {
    if (pulses < 1) fail(r.field("pulses"), "cp needs at least one refocusing pulse");
    protocol = experiments::CoherenceProtocol::cp(pulses);
  }
  const double detuning = angular(r.quantity("detuning", Dim::kFrequency, 0.0));
  o.park_detuning = angular(r.quantity("park_detuning", Dim::kFrequency, 100e6));
  if (o.park_detuning == 0.0) fail(r.field("park_detuning"), "must be nonzero");
  o.strategy = r.choice("strategy", {"qubit_then_swap", "half_swap"}, "qubit_then_swap") == "half_swap"
                   ? experiments::MechPulse::kHalfSwap
                   : experiments::MechPulse::kQubitThenSwap;
  o.swap_duration = r.nonnegative("swap_duration", Dim::kTime, 0.0);
  const bool use_noise = r.flag("noise", false);
  if (use_noise && !noise) fail(r.field("noise"), "requested but the config has no noise section");
  std::vector<double> fallback;
  for (int i = 0; i < 61; ++i) fallback.push_back(2e-6 * i);
  const auto delays = r.grid("delays", Dim::kTime, fallback);
  for (double d : delays) {
    if (d < 0.0) fail(r.field("delays"), "delays must not be negative");
  }
  return [=](const RunContext& ctx) {
    auto opt = o;
    opt.seed = ctx.seed;
    opt.workers = ctx.workers;
    std::optional<experiments::NoiseModel> nm;
    if (use_noise) nm = experiments::NoiseModel{noise->build(ctx.seed), noise->shots, ctx.seed};
    const auto s = experiments::coherence_sequence(dev, protocol, delays, detuning, nm, opt);
    CommandResult out;
    out.table = scan_table(s, {"delay_s"}, "P_e");
    out.warnings = s.warnings;
    out.summary["kind"] = kind;
    out.summary["contrast_decay_s"] = maybe(json_number([&] { return experiments::contrast_decay_time(s); }));
    return out;
  };
}

Runner plan_thermometry(const Reader& r, const model::DeviceSpec& base) {
  experiments::RpmOptions o;
  const std::string target = r.choice("target", {"qubit", "mech"}, "qubit");
  o.mech = mech_index(r, base, 0);
  model::DeviceSpec dev = base;
  dev.transmon.levels = 3;
  if (auto t = r.optional_quantity("qubit_temperature", Dim::kTemperature)) {
    if (*t < 0.0) fail(r.field("qubit_temperature"), "must not be negative");
    dev.transmon.thermal_pop = model::excited_population(dev.transmon.omega_q, *t);
  }
  if (auto t = r.optional_quantity("mech_temperature", Dim::kTemperature)) {
    if (*t < 0.0) fail(r.field("mech_temperature"), "must not be negative");
    dev.mechanics[o.mech].thermal_pop = model::bose_occupation(dev.mechanics[o.mech].omega_m, *t);
  }
  o.stark_pop = r.optional_quantity("stark_pop", Dim::kNone);
  o.ef_rabi = angular(r.positive("ef_rabi", Dim::kFrequency, 20e6));
  o.points = r.integer("points", o.points);
  o.cycles = r.positive("cycles", Dim::kNone, o.cycles);
  return [=](const RunContext&) {
    const auto res = experiments::rpm_thermometry(
        dev, target == "mech" ? experiments::RpmTarget::kMech : experiments::RpmTarget::kQubit, o);
    CommandResult out;
    out.table.columns = {"target", "amp_with", "amp_without", "p_ground", "p_excited",
                         "temperature_K", "mech_occupation"};
    out.table.rows.push_back({target, res.amp_with, res.amp_without, res.p_ground, res.p_excited,
                              res.temperature, res.mech_occupation});
    out.summary["temperature_K"] = res.temperature;
    return out;
  };
}

Runner plan_stark(const Reader& r, const model::DeviceSpec& dev) {
  experiments::StarkOptions o;
  o.mech = mech_index(r, dev, 0);
  const double drive = r.nonnegative("drive", Dim::kNone, 2.0);
  o.qubit_detuning = angular(r.quantity("qubit_detuning", Dim::kFrequency, 5e6));
  o.ramsey_detuning = angular(r.positive("ramsey_detuning", Dim::kFrequency, 20e6));
  o.ramsey_span = r.positive("ramsey_span", Dim::kTime, o.ramsey_span);
  o.ramsey_points = r.integer("ramsey_points", o.ramsey_points);
  o.alpha_corrected = r.flag("alpha_corrected", false);
  o.subtract_final = r.flag("subtract_final", true);
  o.fock_dim = r.integer("fock_dim", 0);
  std::vector<double> fallback;
  for (int i = 0; i <= 16; ++i) fallback.push_back(10e-3 * i);
  const auto delays = r.grid("delays", Dim::kTime, fallback);
  return [=](const RunContext& ctx) {
    auto opt = o;
    opt.seed = ctx.seed;
    opt.workers = ctx.workers;
    const auto s = experiments::stark_phonon_readout(dev, cplx(drive, 0.0), delays, opt);
    CommandResult out;
    out.table = scan_table(s, {"delay_s"}, "nbar");
    out.warnings = s.warnings;
    const std::size_t n = o.subtract_final && delays.size() > 3 ? delays.size() - 1 : delays.size();
    out.summary["tau_s"] = maybe(json_number([&] {
      return engine::decay_rate_fit(std::vector<double>(delays.begin(), delays.begin() + static_cast<long>(n)),
                                    std::vector<double>(s.values.begin(), s.values.begin() + static_cast<long>(n)))
          .tau;
    }));
    return out;
  };
}

Runner plan_spectroscopy(const Reader& r, const model::DeviceSpec& base) {
  const std::size_t mech = mech_index(r, base, 0);
  model::DeviceSpec dev = base;
  std::vector<double> keep_default;
  for (std::size_t i = 0; i < base.mechanics.size(); ++i) keep_default.push_back(static_cast<double>(i));
  const auto keep_values = r.grid("keep_mechanics", Dim::kNone, keep_default);
  std::vector<std::size_t> keep;
  std::size_t ref = 0;
  for (double k : keep_values) {
    if (k < 0 || k != std::floor(k) || k >= static_cast<double>(base.mechanics.size())) {
      fail(r.field("keep_mechanics"), "invalid oscillator index");
    }
    if (static_cast<std::size_t>(k) == mech) ref = keep.size();
    keep.push_back(static_cast<std::size_t>(k));
  }
  if (std::find(keep.begin(), keep.end(), mech) == keep.end()) {
    fail(r.field("mech"), "reference oscillator is not kept");
  }
  dev = base.with_mechanics(keep);
  dev.fock_dim = r.integer("fock_dim", std::min(base.fock_dim, 3));
  const double fm = dev.mechanics[ref].omega_m / kTwoPi;
  const std::string control = r.choice("control", {"omega_q", "V_dc"}, "omega_q");
  std::vector<double> probe_offsets;
  for (int i = 0; i <= 400; ++i) probe_offsets.push_back(-1e6 + 5e3 * i);
  Axis probe{"probe_Hz", {}};
  for (double p : r.grid("probe", Dim::kFrequency, probe_offsets)) probe.values.push_back(fm + p);
  Axis ctl;
  if (control == "omega_q") {
    ctl.name = "omega_q_Hz";
    for (double c : r.grid("control_axis", Dim::kFrequency, std::vector<double>{0.0})) ctl.values.push_back(fm + c);
  } else {
    ctl.name = "V_dc_V";
    ctl.values = r.grid("control_axis", Dim::kVoltage, std::vector<double>{dev.V_dc});
  }
  experiments::SpectroscopyOptions o;
  if (auto a = r.optional_quantity("probe_amplitude", Dim::kFrequency)) o.probe_amplitude = angular(*a);
  dev.validate();
  return [=](const RunContext& ctx) {
    auto opt = o;
    opt.seed = ctx.seed;
    opt.workers = ctx.workers;
    const auto s = experiments::spectroscopy_scan(
        dev, probe, ctl, control == "omega_q" ? experiments::ControlKind::kOmegaQ
                                              : experiments::ControlKind::kVdc,
        opt);
    CommandResult out;
    out.table = scan_table(s, {ctl.name, probe.name}, "P_e");
    out.warnings = s.warnings;
    if (ctl.values.size() == 1) {
      const auto peaks = experiments::find_peaks(probe.values, s.values);
      nlohmann::json p = nlohmann::json::array();
      for (const auto& k : peaks) p.push_back({{"frequency_Hz", k.x}, {"height", k.height}, {"fwhm_Hz", k.fwhm}});
      out.summary["peaks"] = p;
      out.summary["resolved_doublet"] = experiments::resolved_doublet(probe.values, s.values);
    }
    return out;
  };
}

Runner plan_tomography(const Reader& r, const model::DeviceSpec& base) {
  const std::size_t mech = mech_index(r, base, 0);
  const std::string state = r.choice("state", {"one", "ground"}, "one");
  experiments::StatePrepOptions prep;
  prep.mech = mech;
  prep.qubit_bath_temperature = r.nonnegative("qubit_bath_temperature", Dim::kTemperature, 0.060);
  prep.mech_temperature = r.nonnegative("mech_temperature", Dim::kTemperature, 0.072);
  tomography::PipelineOptions o;
  o.shots = r.integer("shots", o.shots);
  if (o.shots < 0) fail(r.field("shots"), "must not be negative");
  o.drive_duration = r.positive("drive_duration", Dim::kTime, o.drive_duration);
  o.qubit_detuning = angular(r.quantity("qubit_detuning", Dim::kFrequency, 5e6));
  o.reconstruct_max_fock = r.integer("max_fock", o.reconstruct_max_fock);
  o.radii = r.grid("radii", Dim::kNone, tomography::default_radii());
  model::DeviceSpec readout =
      r.flag("qubit_markovian_dephasing", false) ? base : without_qubit_dephasing(base, mech);
  readout.transmon.thermal_pop =
      model::excited_population(base.mechanics[mech].omega_m, prep.qubit_bath_temperature);
  return [=](const RunContext& ctx) {
    auto opt = o;
    opt.seed = ctx.seed;
    opt.workers = ctx.workers;
    const auto sp = experiments::prepare_fock_states(base, prep);
    const auto res = tomography::run_pipeline(readout, mech, state == "one" ? sp.one : sp.ground, opt);
    CommandResult out;
    out.table.columns = {"radius", "W", "sigma"};
    for (std::size_t i = 0; i < res.tomogram.radii.size(); ++i) {
      out.table.rows.push_back({res.tomogram.radii[i], res.tomogram.w[i], res.tomogram.sigma[i]});
    }
    out.summary["fock_dim"] = res.fock_dim;
    out.summary["W0"] = res.tomogram.w.empty() ? 0.0 : res.tomogram.w[0];
    out.summary["reconstruction"] = nlohmann::json::parse(res.reconstruction.to_json());
    out.summary["prepared_populations"] = state == "one" ? sp.p_one : sp.p_ground;
    out.summary["prepared_fidelity"] = state == "one" ? sp.fidelity_one : sp.fidelity_ground;
    return out;
  };
}

Runner plan_noise(const Reader& r, const std::optional<NoiseSpec>& noise) {
  std::vector<double> fallback;
  for (int i = 0; i <= 100; ++i) fallback.push_back(2e-6 * i);
  const auto times = r.grid("times", Dim::kTime, fallback);
  for (double t : times) {
    if (t < 0.0) fail(r.field("times"), "times must not be negative");
  }
  const int trajectories = r.integer("trajectories", 1000);
  if (trajectories < 0) fail(r.field("trajectories"), "must not be negative");
  const NoiseSpec spec = noise.value_or(NoiseSpec{});
  return [=](const RunContext& ctx) {
    const auto e = spec.build(ctx.seed);
    CommandResult out;
    out.table.columns = {"time_s", "ramsey_exact", "echo_exact"};
    std::vector<cplx> mr, me;
    if (trajectories > 0) {
      out.table.columns.push_back("ramsey_mc");
      out.table.columns.push_back("echo_mc");
      mr = noisekit::monte_carlo_coherence(e, times, noisekit::DecayKind::kRamsey, trajectories,
                                           stream_seed(ctx.seed, 2), ctx.workers);
      me = noisekit::monte_carlo_coherence(e, times, noisekit::DecayKind::kEcho, trajectories,
                                           stream_seed(ctx.seed, 3), ctx.workers);
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
      std::vector<Cell> row{times[i],
                            noisekit::ensemble_coherence(e, times[i], noisekit::DecayKind::kRamsey).real(),
                            noisekit::ensemble_coherence(e, times[i], noisekit::DecayKind::kEcho).real()};
      if (trajectories > 0) {
        row.emplace_back(mr[i].real());
        row.emplace_back(me[i].real());
      }
      out.table.rows.push_back(std::move(row));
    }
    const auto p = noisekit::ensemble_decay_predict(e, noisekit::DecayKind::kEcho);
    out.summary["members"] = e.members.size();
    out.summary["xi_per_s"] = e.xi;
    out.summary["ramsey_rate_per_s"] = p.ramsey_rate;
    out.summary["t2_ramsey_s"] = p.t2_ramsey;
    out.summary["t2_echo_s"] = p.t2_echo;
    out.summary["echo_efficiency"] = p.efficiency;
    return out;
  };
}

Runner plan_circuit(const Reader&, const model::DeviceSpec& dev) {
  return [=](const RunContext&) {
    CommandResult out;
    out.table.columns = {"mech", "g_em_Hz", "Ck_F", "Lk_H", "Cm_F", "C_T1", "C_T2"};
    for (std::size_t i = 0; i < dev.mechanics.size(); ++i) {
      const auto& m = dev.mechanics[i];
      const double g = model::g_em(m, dev.V_dc);
      const auto c = model::equivalent_circuit(m, g, dev.transmon);
      const auto k = model::cooperativities(dev, i);
      out.table.rows.push_back({m.name, g / kTwoPi, c.Ck, c.Lk, c.Cm, k.C_T1, k.C_T2});
    }
    const auto t = model::transmon_derived(dev.transmon);
    out.summary["omega_q_max_Hz"] = t.omega_q_max / kTwoPi;
    out.summary["Z_ohm"] = t.Z;
    out.summary["C_sigma_F"] = t.C_sigma;
    return out;
  };
}

std::vector<std::vector<std::string>> read_csv(const std::string& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) fail(field, "cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  if (rows.size() < 2) fail(field, "'" + path + "' has no data rows");
  return rows;
}

std::vector<double> column(const std::vector<std::vector<std::string>>& rows, const std::string& name,
                           const std::string& field) {
  const auto& header = rows[0];
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) fail(field, "no column '" + name + "'");
  const auto k = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (k >= rows[i].size()) fail(field, "row " + std::to_string(i) + " is short");
    out.push_back(parse_quantity(rows[i][k], Dim::kNone, field));
  }
  return out;
}

Runner plan_fit(const Reader& r) {
  const bool present = r.has("input");
  const std::string input = r.text("input", "");
  const std::string xs = r.text("x", "x");
  const std::string ys = r.text("y", "y");
  const std::string model = r.choice(
      "model", {"exp_decay", "exp_decay_offset", "gauss_decay", "fringes", "lorentzian", "linear"},
      "exp_decay_offset");
  const std::string field = r.field("input");
  return [=](const RunContext&) {
    if (!present) fail(field, "missing required value");
    const auto rows = read_csv(input, field);
    const auto x = column(rows, xs, field);
    const auto y = column(rows, ys, field);
    fitkit::FitResult fit;
    if (model == "fringes") {
      fit = fitkit::fit_fringes(x, y).fit;
    } else if (model == "lorentzian") {
      fit = fitkit::fit_lorentzian(x, y).fit;
    } else if (model == "linear") {
      Eigen::VectorXd p0(2);
      p0 << (y.back() - y.front()) / (x.back() - x.front()), y.front();
      fit = fitkit::curve_fit(fitkit::linear_model(), x, y, p0);
    } else {
      const bool gauss = model == "gauss_decay";
      const bool offset = model != "exp_decay";
      Eigen::VectorXd p0(3);
      p0 << y.front() - (offset ? y.back() : 0.0), 0.3 * (x.back() - x.front()), offset ? y.back() : 0.0;
      fit = fitkit::curve_fit(gauss ? fitkit::gauss_decay(offset) : fitkit::exp_decay(offset), x, y, p0);
    }
    CommandResult out;
    out.table.columns = {"parameter", "value", "sigma"};
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
      out.table.rows.push_back({fit.names[i], fit.params(static_cast<Eigen::Index>(i)),
                                fit.sigma.size() > static_cast<Eigen::Index>(i)
                                    ? fit.sigma(static_cast<Eigen::Index>(i))
                                    : 0.0});
    }
    out.summary = nlohmann::json::parse(fit.to_json());
    return out;
  };
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void Table::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (const double* d = std::get_if<double>(&row[i])) {
        os << format_number(*d);
      } else {
        os << std::get<std::string>(row[i]);
      }
    }
    os << '\n';
  }
}

nlohmann::json Table::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& c : row) {
      if (const double* d = std::get_if<double>(&c)) {
        r.push_back(*d);
      } else {
        r.push_back(std::get<std::string>(c));
      }
    }
    rows_json.push_back(std::move(r));
  }
  return {{"columns", columns}, {"rows", rows_json}};
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"rabi", "lifetime", "coherence", "thermometry",
                                                 "stark", "spectroscopy", "tomography", "noise",
                                                 "circuit", "fit"};
  return names;
}

Runner plan(const std::string& name, const Config& config, std::set<std::string>& used) {
  const Reader top(config.root, "", &used);
  const auto noise = parse_noise(top);
  const Reader ex = top.child("experiment");
  const auto& dev = config.device;
  std::map<std::string, Runner> runners;
  runners["rabi"] = plan_rabi(ex.child("rabi"), dev);
  runners["lifetime"] = plan_lifetime(ex.child("lifetime"), dev);
  runners["coherence"] = plan_coherence(ex.child("coherence"), dev, noise);
  runners["thermometry"] = plan_thermometry(ex.child("thermometry"), dev);
  runners["stark"] = plan_stark(ex.child("stark"), dev);
  runners["spectroscopy"] = plan_spectroscopy(ex.child("spectroscopy"), dev);
  runners["tomography"] = plan_tomography(ex.child("tomography"), dev);
  runners["noise"] = plan_noise(ex.child("noise"), noise);
  runners["circuit"] = plan_circuit(ex.child("circuit"), dev);
  runners["fit"] = plan_fit(ex.child("fit"));
  const auto it = runners.find(name);
  if (it == runners.end()) throw Error(ErrorCode::kConfig, "unknown subcommand '" + name + "'");
  return it->second;
}

}  // namespace cqad::cli
