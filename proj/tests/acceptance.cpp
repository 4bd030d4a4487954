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

// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cqad/engine.hpp"
#include "cqad/experiments.hpp"
#include "cqad/fitkit.hpp"
#include "cqad/model.hpp"
#include "cqad/noisekit.hpp"
#include "cqad/parallel.hpp"
#include "cqad/qops.hpp"
#include "cqad/tomography.hpp"

namespace {

using namespace cqad;
using namespace cqad::experiments;

namespace tol {
constexpr double kSwapTime = 0.01;
constexpr double kDecoheredSwapTime = 0.10;
constexpr double kRabiRuntime = 10.0;
constexpr double kSplitting = 0.05;
constexpr double kSpectrumRuntime = 120.0;
constexpr double kPurcell = 0.05;
constexpr double kPurcellRuntime = 120.0;
constexpr double kFidelity = 0.02;
constexpr double kStatePrepRuntime = 300.0;
constexpr double kWignerBound = -0.08;
constexpr double kWignerRuntime = 600.0;
constexpr double kStarkSlope = 0.02;
constexpr double kStarkTau = 0.05;
constexpr double kCircuitElements = 0.10;
constexpr double kImpedance = 0.05;
constexpr double kCooperativity = 2.0;
constexpr double kQubitMax = 0.01;
constexpr double kEchoClosedForm = 0.01;
constexpr double kRamseyClosedForm = 0.05;
constexpr double kResonantSum = 1e-9;
constexpr double kEnsembleRamsey = 0.10;
constexpr double kEchoEfficiency = 1.0;
constexpr double kEnsembleRuntime = 600.0;
constexpr double kKnee = 0.20;
constexpr double kPowerLaw = 0.1;
constexpr double kTlsFit = 0.05;
constexpr double kQubitTemperature = 0.02;
constexpr double kMechTemperature = 0.010;
constexpr double kTrace = 1e-8;
constexpr double kHermitian = 1e-10;
constexpr double kPositivity = 1e-8;
constexpr double kConserved = 1e-7;
}  // namespace tol

struct Verdict {
  bool pass = false;
  std::string detail;
};

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double rel(double x, double ref) { return std::abs(x / ref - 1.0); }

int failures = 0;

void criterion(int id, const std::function<Verdict(double t0)>& fn) {
  const double t0 = now();
  Verdict v;
  try {
    v = fn(t0);
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::printf("criterion %2d: %s  %s [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(),
              now() - t0);
  std::fflush(stdout);
}

std::size_t first_minimum(const std::vector<double>& y) {
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] <= y[i - 1] && y[i] < y[i + 1]) return i;
  }
  return 0;
}

Verdict vacuum_rabi_swap(double t0) {
  const model::DeviceSpec dev = model::reference_device();
  const double g = model::g_em(dev.mechanics[1], dev.V_dc);
  const double target = kPi / (2.0 * g);
  VacuumRabiOptions o;
  o.mech = 1;
  o.samples = 2001;
  o.lossless = true;
  const engine::Trajectory ideal = vacuum_rabi(dev, 3e-6, o);
  const double t_ideal = ideal.times[first_minimum(ideal.series("P_e"))];
  o.lossless = false;
  const engine::Trajectory lossy = vacuum_rabi(dev, 3e-6, o);
  const auto& pe = lossy.series("P_e");
  const std::size_t im = first_minimum(pe);
  const double peak = *std::max_element(pe.begin() + static_cast<long>(im), pe.end());
  const bool decaying = im > 0 && rel(lossy.times[im], target) <= tol::kDecoheredSwapTime &&
                        peak < pe.front() && peak > pe[im] + 0.1;
  const double runtime = now() - t0;
  return {rel(t_ideal, target) <= tol::kSwapTime && decaying && runtime < tol::kRabiRuntime,
          fmt("lossless swap %.4f us vs pi/2g = %.4f us; decohered minimum %.4f us, revival %.3f < 1",
              t_ideal * 1e6, target * 1e6, lossy.times[im] * 1e6, peak)};
}

Verdict strong_coupling(double t0) {
  model::DeviceSpec dev = model::reference_device().with_mechanics({1});
  dev.fock_dim = 3;
  const double fm = dev.mechanics[0].omega_m / kTwoPi;
  Axis probe{"probe_Hz", {}};
  for (int i = 0; i <= 400; ++i) probe.values.push_back(fm - 1e6 + 5e3 * i);
  const Axis control{"omega_q_Hz", {fm}};
  std::vector<std::string> parts;
  bool ok = true;
  for (double v : {50.0, 5.0}) {
    model::DeviceSpec d = dev;
    d.V_dc = v;
    const ScanResult s = spectroscopy_scan(d, probe, control, ControlKind::kOmegaQ);
    const bool resolved = resolved_doublet(probe.values, s.values);
    if (v == 50.0) {
      auto peaks = find_peaks(probe.values, s.values);
      if (peaks.size() < 2) return {false, "fewer than two peaks at 50 V"};
      std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
      const double split = std::abs(peaks[1].x - peaks[0].x);
      const double expected = 2.0 * model::g_em(d.mechanics[0], v) / kTwoPi;
      ok = ok && resolved && rel(split, expected) <= tol::kSplitting;
      parts.push_back(fmt("50 V split %.1f kHz vs 2g %.1f kHz", split / 1e3, expected / 1e3));
    } else {
      ok = ok && !resolved;
      parts.push_back(fmt("5 V %s", resolved ? "resolved" : "single unresolved peak"));
    }
  }
  ok = ok && now() - t0 < tol::kSpectrumRuntime;
  return {ok, parts[0] + "; " + parts[1]};
}

Verdict inverse_purcell(double t0) {
  model::DeviceSpec d = model::reference_device();
  d.V_dc = 40.0;
  d.mechanics[0].T1 = 25e-3;
  d.mechanics[0].T2_star = 0.0;
  d.mechanics[0].qubit_T2_star = 2.0 * *d.mechanics[0].qubit_T1;
  const double g = model::g_em(d.mechanics[0], d.V_dc);
  bool ok = true;
  std::string detail = "tau/predicted - 1 at D/g";
  for (double ratio : {10.0, 25.0, 50.0, 175.0}) {
    const double park = ratio * g;
    const double predicted = predicted_lifetime(d, 0, park);
    std::vector<double> delays;
    for (int i = 0; i < 13; ++i) delays.push_back(predicted * (0.05 + 0.25 * i));
    const LifetimeFit f = fit_lifetime(mech_lifetime(d, delays, park));
    const double dev = f.tau / predicted - 1.0;
    ok = ok && std::abs(dev) <= tol::kPurcell;
    detail += fmt(" %g: %+.2f%%", ratio, 100.0 * dev);
  }
  return {ok && now() - t0 < tol::kPurcellRuntime, detail};
}

Verdict state_prep(double t0) {
  StatePrepOptions o;
  o.mech = 1;
  const StatePrepResult r = prepare_fock_states(model::reference_device(), o);
  const bool ok = std::abs(r.fidelity_ground - 0.989) <= tol::kFidelity &&
                  std::abs(r.fidelity_one - 0.759) <= tol::kFidelity &&
                  now() - t0 < tol::kStatePrepRuntime;
  return {ok, fmt("F(|0>) = %.4f (0.989), F(|1>) = %.4f (0.759)", r.fidelity_ground, r.fidelity_one)};
}

Verdict wigner_negativity(double t0) {
  const model::DeviceSpec ref = model::reference_device();
  StatePrepOptions so;
  so.mech = 1;
  const StatePrepResult prep = prepare_fock_states(ref, so);
  model::DeviceSpec d = ref;
  d.transmon.thermal_pop = model::excited_population(ref.mechanics[1].omega_m, so.qubit_bath_temperature);
  d.mechanics[1].qubit_T2_star = 2.0 * *d.mechanics[1].qubit_T1;
  tomography::PipelineOptions po;
  po.seed = 7;
  const auto res = tomography::run_pipeline(d, 1, prep.one, po);
  const double w0 = res.tomogram.w.front();
  return {w0 <= tol::kWignerBound && now() - t0 < tol::kWignerRuntime,
          fmt("W(0) = %.4f +- %.4f (bound %.2f), reconstructed p1 = %.3f", w0, res.tomogram.sigma.front(),
              tol::kWignerBound, res.reconstruction.p.at(1))};
}

Verdict stark_readout(double) {
  model::DeviceSpec d = model::reference_device();
  const double g = angular(200e3);
  d.mechanics[0].g0 = g / d.V_dc;
  d.mechanics[0].thermal_pop = 0.0;
  std::vector<double> shift;
  for (int k : {0, 1, 2}) {
    Mat rho = Mat::Zero(8, 8);
    rho(k, k) = 1.0;
    shift.push_back(measure_stark_shift(d, rho));
  }
  const StarkOptions so;
  const double slope = (shift[2] - shift[0]) / 2.0;
  const double expected = stark_shift(g, so.qubit_detuning, 1.0);
  d.mechanics[0].T1 = 20e-3;
  std::vector<double> delays;
  for (int i = 0; i <= 16; ++i) delays.push_back(10e-3 * i);
  const ScanResult s = stark_phonon_readout(d, cplx(2.0, 0.0), delays, so);
  const auto fit = engine::decay_rate_fit(std::vector<double>(delays.begin(), delays.end() - 1),
                                          std::vector<double>(s.values.begin(), s.values.end() - 1));
  return {rel(slope, expected) <= tol::kStarkSlope && rel(fit.tau, 20e-3) <= tol::kStarkTau,
          fmt("slope %.3f kHz/phonon vs 2g^2/D %.3f kHz; phonon decay %.2f ms vs 20 ms",
              slope / kTwoPi / 1e3, expected / kTwoPi / 1e3, fit.tau * 1e3)};
}

Verdict circuit_numbers(double) {
  const model::DeviceSpec d = model::reference_device();
  const double ck[2] = {40e-12, 29e-12};
  const double lk[2] = {26e-12, 38e-12};
  const double ct2[2] = {132.0, 147.0};
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& m = d.mechanics[i];
    const auto c = model::equivalent_circuit(m, model::g_em(m, d.V_dc), d.transmon);
    const auto k = model::cooperativities(d, i);
    ok = ok && rel(c.Ck, ck[i]) <= tol::kCircuitElements && rel(c.Lk, lk[i]) <= tol::kCircuitElements &&
         std::abs(k.C_T2 - ct2[i]) <= tol::kCooperativity;
    detail += fmt("%s: Ck %.1f pF Lk %.1f pH C_T2 %.1f; ", m.name.c_str(), c.Ck * 1e12, c.Lk * 1e12, k.C_T2);
  }
  const auto t = model::transmon_derived(d.transmon);
  ok = ok && rel(t.Z, 350.0) <= tol::kImpedance && rel(t.omega_q_max, d.transmon.omega_q) <= tol::kQubitMax;
  detail += fmt("Z %.1f Ohm; omega_q_max/2pi %.4f GHz (asymptotic sqrt(8 EJ EC) - EC vs 5.1071)", t.Z,
                t.omega_q_max / kTwoPi / 1e9);
  return {ok, detail};
}

Verdict dephasing_closed_forms(double) {
  const double a = 1e10;
  double worst_echo = 0.0;
  for (double t : {1e-6, 1e-5, 1e-4}) {
    const double x = noisekit::gaussian_decay(noisekit::SpectralDensity::one_over_f(a), t, noisekit::DecayKind::kEcho);
    worst_echo = std::max(worst_echo, rel(x, -a * t * t * std::numbers::ln2));
  }
  const double t = 1e-5;
  const double wt = 1e-3;
  const double xr = noisekit::gaussian_decay(noisekit::SpectralDensity::one_over_f(a), t,
                                             noisekit::DecayKind::kRamsey, wt / t);
  const double ramsey_ratio = xr / (-a * t * t * std::log(1.0 / wt));
  double worst_sum = 0.0;
  const double d = angular(70e6);
  for (double d0 : {0.0, 0.1 * d, 0.5 * d}) {
    for (double g1 : {2500.0, 2e6, 1e8}) {
      const double closed = noisekit::resonant_tls_loss(angular(1e6), d, d0, g1, 100.0);
      worst_sum = std::max(worst_sum, rel(noisekit::resonant_tls_loss_sum(angular(1e6), d, d0, g1, 100.0), closed));
    }
  }
  const bool echo_ok = worst_echo <= tol::kEchoClosedForm;
  const bool ramsey_ok = std::abs(ramsey_ratio - 1.0) <= tol::kRamseyClosedForm;
  const bool sum_ok = worst_sum <= tol::kResonantSum;
  return {echo_ok && ramsey_ok && sum_ok,
          fmt("echo %s (max dev %.1e); Ramsey %s (quadrature/closed form = %.3f at w_ir t = 1e-3); "
              "resonant sum %s (max dev %.1e)",
              echo_ok ? "ok" : "off", worst_echo, ramsey_ok ? "ok" : "off", ramsey_ratio,
              sum_ok ? "ok" : "off", worst_sum)};
}

double one_over_e(const std::vector<double>& t, const std::vector<cplx>& c) {
  const double level = std::exp(-1.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double f0 = c[i - 1].real();
    const double f1 = c[i].real();
    if (f1 < level) return t[i - 1] + (t[i] - t[i - 1]) * (f0 - level) / (f0 - f1);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Verdict fluctuator_ensemble(double t0) {
  const double nu_min = 100.0;
  const double gamma_max = 1e5;
  const double gamma_min = gamma_max * std::exp(-20.0);
  auto e = noisekit::sample_ensemble(noisekit::members_for_rate(1.0 / 64e-6, nu_min), nu_min, gamma_min,
                                     gamma_max, 3);
  noisekit::scale_to_ramsey_time(e, 64e-6);
  const double predicted_rate = e.xi * e.log_ratio();
  const auto ramsey = noisekit::ensemble_decay_predict(e, noisekit::DecayKind::kRamsey);
  std::vector<double> t;
  for (int i = 1; i <= 80; ++i) t.push_back(ramsey.t2_ramsey * 3.0 * i / 80.0);
  const auto mc = noisekit::monte_carlo_coherence(e, t, noisekit::DecayKind::kRamsey, 10000, 1);
  const double t2 = one_over_e(t, mc);
  const double rate_ratio = 1.0 / t2 / predicted_rate;
  const double efficiency = noisekit::ensemble_decay_predict(e, noisekit::DecayKind::kEcho).efficiency;
  std::vector<double> te;
  for (int i = 1; i <= 200; ++i) te.push_back(ramsey.t2_ramsey * 100.0 * i / 200.0);
  const auto me = noisekit::monte_carlo_coherence(e, te, noisekit::DecayKind::kEcho, 10000, 2);
  const double mc_efficiency = one_over_e(te, me) / t2;
  const bool ok = std::abs(rate_ratio - 1.0) <= tol::kEnsembleRamsey &&
                  std::abs(efficiency - 5.0) <= tol::kEchoEfficiency && now() - t0 < tol::kEnsembleRuntime;
  return {ok, fmt("%zu fluctuators: MC Ramsey rate / (xi ln ratio) = %.3f; echo efficiency %.2f "
                  "(Gaussian prediction), Monte Carlo echo %.1f",
                  e.members.size(), rate_ratio, efficiency, mc_efficiency)};
}

Verdict psd(double) {
  const double gamma1 = kTwoPi * 1e-4;
  const double dt = 20.0;
  const auto x = noisekit::sample_trajectory(noisekit::Telegrapher{1.0, 0.5 * gamma1, 1}, dt * (1 << 21), dt, 5);
  const auto s = noisekit::psd_estimate(x, dt, {16384, false});
  const auto lf = fitkit::fit_lorentzian(s.omega, s.values);
  const auto y = noisekit::synthesize_power_law(1 << 18, 1.0, 1.0, 2.0, 7);
  const auto sp = noisekit::psd_estimate(y, 1.0);
  const auto pf = fitkit::fit_power_law(sp.omega, sp.values, 1e-2, 1.0);
  return {rel(lf.gamma1, gamma1) <= tol::kKnee && std::abs(pf.alpha - 1.0) <= tol::kPowerLaw,
          fmt("gamma1 %.3e rad/s vs %.3e; alpha %.3f", lf.gamma1, gamma1, pf.alpha)};
}

Verdict tls_spectroscopy(double) {
  model::DeviceSpec dev = model::reference_device().with_mechanics({0});
  dev.fock_dim = 2;
  model::TlsSpec tls;
  tls.V0 = 50.0;
  tls.lambda = 0.3e9;
  tls.g = angular(0.5e6);
  tls.Gamma1 = 1e6;
  dev.tls = {tls};
  const double fm = dev.mechanics[0].omega_m / kTwoPi;
  dev.transmon.omega_q = angular(fm + 5e6);
  Axis probe{"probe_Hz", {}};
  for (int i = 0; i <= 400; ++i) probe.values.push_back(fm - 2e6 + 10e3 * i);
  Axis control{"V_dc", {}};
  for (int i = 0; i <= 40; ++i) control.values.push_back(50.0 - 0.01 + 0.0005 * i);
  const ScanResult s = spectroscopy_scan(dev, probe, control, ControlKind::kVdc);
  std::vector<fitkit::CrossingPoint> points;
  const std::size_t n = probe.values.size();
  for (std::size_t c = 0; c < control.values.size(); ++c) {
    const std::vector<double> column(s.values.begin() + static_cast<long>(c * n),
                                     s.values.begin() + static_cast<long>((c + 1) * n));
    for (const Peak& p : find_peaks(probe.values, column, 0.05)) points.push_back({control.values[c], angular(p.x)});
  }
  const auto f = fitkit::fit_avoided_crossing(points);
  const double g = f.g / kTwoPi;
  return {rel(g, 0.5e6) <= tol::kTlsFit && rel(f.slope, 0.3e9) <= tol::kTlsFit,
          fmt("g/2pi %.4f MHz vs 0.5; lambda %.4f GHz/V vs 0.3", g / 1e6, f.slope / 1e9)};
}

Verdict thermometry(double) {
  model::DeviceSpec d = model::reference_device();
  d.transmon.levels = 3;
  d.transmon.thermal_pop = model::excited_population(d.transmon.omega_q, 0.060);
  const RpmResult q = rpm_thermometry(d, RpmTarget::kQubit);
  d.mechanics[1].thermal_pop = model::bose_occupation(d.mechanics[1].omega_m, 0.072);
  RpmOptions o;
  o.mech = 1;
  const RpmResult m = rpm_thermometry(d, RpmTarget::kMech, o);
  return {rel(q.temperature, 0.060) <= tol::kQubitTemperature &&
              std::abs(m.temperature - 0.072) <= tol::kMechTemperature,
          fmt("qubit %.2f mK vs 60; mechanics %.2f mK vs 72 (Stark population %.3f)", q.temperature * 1e3,
              m.temperature * 1e3, d.transmon.stark_thermal_pop.value_or(0.0))};
}

Mat random_state(int n, std::mt19937_64& rng, bool pure) {
  std::normal_distribution<double> normal;
  Mat a(n, pure ? 1 : n);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = cplx(normal(rng), normal(rng));
  }
  Mat rho = a * a.adjoint();
  return rho / rho.trace().real();
}

Verdict property_suite(double) {
  constexpr double kRtol = 1e-12;
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> unit;
  double trace = 0.0, herm = 0.0, neg = 0.0, number = 0.0, purity = 0.0;
  for (int c = 0; c < 12; ++c) {
    model::DeviceSpec d = model::reference_device().with_mechanics({0});
    d.fock_dim = 3 + c % 3;
    d.transmon.levels = 2 + c % 2;
    d.V_dc = 10.0 + 50.0 * unit(rng);
    d.transmon.omega_q = d.mechanics[0].omega_m + angular(2e6 * (unit(rng) - 0.5));
    const auto space = model::make_space(d);
    const qops::Operator H = model::build_hamiltonian(d, {d.mechanics[0].omega_m});
    const auto collapse = model::collapse_ops(d);
    const qops::Operator N =
        qops::embed(qops::number(d.transmon.levels), space, model::kQubit) +
        qops::embed(qops::number(d.fock_dim), space, model::mech_label(0));
    engine::Segment seg;
    seg.hamiltonian = H;
    seg.duration = 0.2e-6 + 0.3e-6 * unit(rng);
    seg.method = c % 2 ? engine::Method::kRungeKutta : engine::Method::kExponential;
    Mat open = random_state(space.total_dim(), rng, false);
    Mat closed = random_state(space.total_dim(), rng, true);
    const double n0 = (N.matrix() * closed).trace().real();
    for (int k = 0; k < 10; ++k) {
      open = engine::propagate(open, seg, collapse);
      closed = engine::propagate(closed, seg, {}, kRtol, kRtol * 1e-2);
      trace = std::max(trace, std::abs(open.trace().real() - 1.0));
      herm = std::max(herm, (open - open.adjoint()).cwiseAbs().maxCoeff());
      neg = std::max(neg, -qops::DensityMatrix::unchecked(space, open).min_eigenvalue());
      number = std::max(number, std::abs((N.matrix() * closed).trace().real() - n0));
      purity = std::max(purity, std::abs((closed * closed).trace().real() - 1.0));
    }
  }

  const auto e = noisekit::sample_ensemble(20, 100.0, 10.0, 1e5, 4);
  const PointFn fn = [&](const std::vector<std::size_t>& idx, std::uint64_t seed) {
    const double t = 10e-6 * static_cast<double>(1 + idx[0] + 3 * idx[1]);
    return noisekit::monte_carlo_coherence(e, {t}, noisekit::DecayKind::kEcho, 64, seed).front().real();
  };
  const std::vector<Axis> axes = {{"a", {0, 1, 2}}, {"b", {0, 1}}};
  const auto base = run_scan(axes, 11, 1, fn).values;
  bool deterministic = true;
  for (unsigned w : {2u, 3u, 8u}) deterministic = deterministic && run_scan(axes, 11, w, fn).values == base;
  const NoiseModel nm{e, 16, 9};
  CoherenceOptions co;
  const std::vector<double> delays = {0.0, 20e-6, 40e-6};
  const auto ref = coherence_sequence(model::reference_device(), CoherenceProtocol::echo(), delays, 0.0, nm, co).values;
  co.workers = 4;
  deterministic = deterministic &&
                  coherence_sequence(model::reference_device(), CoherenceProtocol::echo(), delays, 0.0, nm, co).values == ref;

  const bool ok = trace <= tol::kTrace && herm <= tol::kHermitian && neg <= tol::kPositivity &&
                  number <= tol::kConserved && purity <= tol::kConserved && deterministic;
  return {ok, fmt("trace %.1e, hermiticity %.1e, min eigenvalue %.1e, closed-system excitation number %.1e, "
                  "purity %.1e; scans %s across 1/2/3/8 workers",
                  trace, herm, -neg, number, purity, deterministic ? "identical" : "differ")};
}

}  // namespace

int main() {
  std::printf("cqad acceptance\n");
  criterion(1, vacuum_rabi_swap);
  criterion(2, strong_coupling);
  criterion(3, inverse_purcell);
  criterion(4, state_prep);
  criterion(5, wigner_negativity);
  criterion(6, stark_readout);
  criterion(7, circuit_numbers);
  criterion(8, dephasing_closed_forms);
  criterion(9, fluctuator_ensemble);
  criterion(10, psd);
  criterion(11, tls_spectroscopy);
  criterion(12, thermometry);
  criterion(13, property_suite);
  std::printf("%d of 13 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
