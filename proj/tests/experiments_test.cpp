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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cqad/experiments.hpp"
#include "cqad/fitkit.hpp"
#include "reference_device.hpp"

namespace cqad::experiments {
namespace {

using cqad::testing::reference_device;

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cqad::Error thrown";
  return ErrorCode::kInvalidArgument;
}

std::vector<double> arange(double start, double step, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = start + step * i;
  return v;
}

double lorentz(double x, double x0, double w) { return 1.0 / (1.0 + std::pow((x - x0) / w, 2)); }

TEST(Scan, ShapeUnravelAndCsv) {
  const ScanResult s = run_scan({{"a", {1.0, 2.0}}, {"b", {10.0, 20.0, 30.0}}}, 3, 1,
                                [](const std::vector<std::size_t>& i, std::uint64_t) {
                                  return static_cast<double>(10 * i[0] + i[1]);
                                });
  EXPECT_EQ(s.shape(), (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(s.unravel(4), (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(s.values[5], 12.0);
  EXPECT_NO_THROW(s.validate());
  std::ostringstream os;
  s.write_csv(os);
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "a,b,value,seed");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Scan, DeterministicAcrossWorkers) {
  const PointFn fn = [](const std::vector<std::size_t>& i, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return static_cast<double>(rng() % 1000) + static_cast<double>(i[0]);
  };
  const std::vector<Axis> axes = {{"x", arange(0.0, 1.0, 37)}};
  const ScanResult a = run_scan(axes, 42, 1, fn);
  const ScanResult b = run_scan(axes, 42, 4, fn);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.seed_map, b.seed_map);
  EXPECT_NE(run_scan(axes, 43, 1, fn).seed_map, a.seed_map);
}

TEST(Scan, EmptyAxisRejected) {
  EXPECT_EQ(code_of([] { run_scan({{"x", {}}}, 0, 1, [](auto&, auto) { return 0.0; }); }),
            ErrorCode::kInvalidArgument);
}

TEST(PulseSequence, Validation) {
  EXPECT_EQ(code_of([] { PulseSequence{}.validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { PulseSequence().pi_pulse().validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { PulseSequence().wait(-1e-6).measure().validate(); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { PulseSequence().pi_pulse(0.0, "nowhere").measure().validate(); }),
            ErrorCode::kUnknownLabel);
  PulseSequence s;
  s.pi_pulse().swap().wait(1e-6).swap().measure();
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.steps.size(), 5u);
  EXPECT_STREQ(to_string(s.steps[1].kind), "swap");
}

TEST(VacuumRabi, LosslessSwapTime) {
  VacuumRabiOptions o;
  o.mech = 1;
  o.lossless = true;
  o.samples = 2001;
  const engine::Trajectory tr = vacuum_rabi(reference_device(), 3e-6, o);
  const auto& pe = tr.series("P_e");
  const auto& n = tr.series("n_mech");
  std::size_t im = 0;
  for (std::size_t i = 1; i < pe.size() && tr.times[i] < 1.6e-6; ++i) {
    if (pe[i] < pe[im]) im = i;
  }
  const double g = model::g_em(reference_device().mechanics[1], 50.0);
  EXPECT_NEAR(g / kTwoPi, 230e3, 1.0);
  EXPECT_NEAR(tr.times[im], kPi / (2.0 * g), 0.01 * kPi / (2.0 * g));
  EXPECT_LT(pe[im], 1e-4);
  for (std::size_t i = 0; i < pe.size(); ++i) EXPECT_NEAR(pe[i] + n[i], 1.0, 1e-6);
}

TEST(VacuumRabi, ZeroCouplingIsFlat) {
  model::DeviceSpec d = reference_device();
  d.V_dc = 0.0;
  VacuumRabiOptions o;
  o.lossless = true;
  o.samples = 51;
  const auto tr = vacuum_rabi(d, 3e-6, o);
  for (double p : tr.series("P_e")) EXPECT_NEAR(p, 1.0, 1e-9);
}

TEST(VacuumRabi, DecoherenceDampsOscillation) {
  VacuumRabiOptions o;
  o.mech = 1;
  o.samples = 601;
  const auto tr = vacuum_rabi(reference_device(), 6e-6, o);
  const auto& pe = tr.series("P_e");
  // Revivals at multiples of the full period pi/g.
  const double period = kPi / model::g_em(reference_device().mechanics[1], 50.0);
  auto at = [&](double t) {
    return pe[static_cast<std::size_t>(std::lround(t / 6e-6 * 600))];
  };
  EXPECT_LT(at(period), 0.75);
  EXPECT_LT(at(2.0 * period), at(period));
  EXPECT_GT(at(period), at(0.5 * period));
}

TEST(Swap, TwiceReturnsInitialState) {
  const model::DeviceSpec dev = reference_device();
  const model::DeviceSpec single = single_device(dev, 0);
  const auto space = model::make_space(single);
  const auto psi = qops::product_state(
      space, {Mat(qops::projector(2, 1).matrix()), Mat(qops::projector(single.fock_dim, 0).matrix())});
  RunOptions ro;
  ro.initial = psi;
  ro.qubit_bath_pop = 0.0;
  PulseSequence s;
  s.swap().swap().measure();
  const SequenceResult r = run_sequence(dev, s, ro);
  const double fid = (psi.matrix() * r.final_state.matrix()).trace().real();
  const auto& m = single.mechanics[0];
  const double bound = 1.0 - 4.0 * swap_time(dev, 0) / std::min(*m.qubit_T1, *m.qubit_T2_star);
  EXPECT_GE(fid, bound);
  EXPECT_GT(fid, 0.3);

  model::DeviceSpec lossless = dev;
  lossless.mechanics[0].qubit_T1 = 1e3;
  lossless.mechanics[0].qubit_T2_star = 2e3;
  lossless.mechanics[0].T1 = 1e6;
  lossless.mechanics[0].T2_star = 0.0;
  const SequenceResult ideal = run_sequence(lossless, s, ro);
  EXPECT_NEAR((psi.matrix() * ideal.final_state.matrix()).trace().real(), 1.0, 1e-6);
}

TEST(Lifetime, MatchesInversePurcellPrediction) {
  model::DeviceSpec d = reference_device();
  d.mechanics[0].T1 = 25e-3;
  d.mechanics[0].qubit_T2_star = 2.0 * *d.mechanics[0].qubit_T1;
  d.V_dc = 40.0;
  const double park = angular(35e6);
  EXPECT_NEAR(model::g_em(d.mechanics[0], 40.0) / kTwoPi, 160e3, 1.0);
  const double predicted = predicted_lifetime(d, 0, park);
  EXPECT_NEAR(predicted, 1.0 / (40.0 + std::pow(0.16 / 35.0, 2) / 1.7e-6), 1e-9);
  const ScanResult s = mech_lifetime(d, arange(1e-3, 5e-3, 13), park);
  EXPECT_TRUE(s.warnings.empty());
  const LifetimeFit f = fit_lifetime(s);
  EXPECT_NEAR(f.tau / predicted, 1.0, 0.05);
  EXPECT_GT(f.amplitude, 0.3);
}

TEST(Lifetime, WarnsWhenPurcellDominated) {
  const ScanResult s = mech_lifetime(reference_device(), {1e-6, 2e-6}, angular(500e3));
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_NE(s.warnings[0].find("Purcell"), std::string::npos);
}

TEST(Coherence, RamseyFringeFrequency) {
  const double detuning = angular(200e3);
  const std::vector<double> delays = arange(0.0, 1e-6, 120);
  const ScanResult s = coherence_sequence(reference_device(), CoherenceProtocol::ramsey(), delays,
                                          detuning, std::nullopt);
  const fitkit::FringeFit f = fitkit::fit_fringes(delays, s.values);
  EXPECT_NEAR(f.frequency / 200e3, 1.0, 0.01);
}

TEST(Coherence, EchoWithZeroNoiseMatchesRamsey) {
  // Delays start after the qubit share left by the swaps has relaxed.
  const std::vector<double> delays = arange(20e-6, 4e-6, 31);
  model::DeviceSpec d = reference_device();
  d.mechanics[0].T2_star = 0.0;
  const NoiseModel silent{noisekit::FluctuatorEnsemble{}, 4, 1};
  const ScanResult r = coherence_sequence(d, CoherenceProtocol::ramsey(), delays, 0.0, std::nullopt);
  const ScanResult e = coherence_sequence(d, CoherenceProtocol::echo(), delays, 0.0, silent);
  const ScanResult q = coherence_sequence(d, CoherenceProtocol::echo(), delays, 0.0, std::nullopt);
  const double r0 = std::abs(2.0 * r.values[0] - 1.0);
  const double e0 = std::abs(2.0 * e.values[0] - 1.0);
  for (std::size_t i = 0; i < delays.size(); ++i) {
    EXPECT_NEAR(e.values[i], q.values[i], 1e-12);
    EXPECT_NEAR(std::abs(2.0 * r.values[i] - 1.0) / r0, std::abs(2.0 * e.values[i] - 1.0) / e0, 5e-3);
  }
}

TEST(Coherence, CarrPurcellNeedsPulses) {
  EXPECT_EQ(CoherenceProtocol::cp(3).refocusing_pulses(), 3);
  EXPECT_EQ(CoherenceProtocol::ramsey().refocusing_pulses(), 0);
  EXPECT_EQ(code_of([] {
              coherence_sequence(reference_device(), CoherenceProtocol::cp(0), {0.0}, 0.0,
                                 std::nullopt);
            }),
            ErrorCode::kInvalidArgument);
}

TEST(Coherence, NoisyRunDeterministicAcrossWorkers) {
  noisekit::FluctuatorEnsemble e = noisekit::sample_ensemble(20, 100.0, 10.0, 1e5, 4);
  const NoiseModel nm{e, 16, 9};
  CoherenceOptions a;
  a.workers = 1;
  CoherenceOptions b;
  b.workers = 3;
  const std::vector<double> delays = {0.0, 20e-6, 40e-6};
  const auto sa = coherence_sequence(reference_device(), CoherenceProtocol::echo(), delays, 0.0, nm, a);
  const auto sb = coherence_sequence(reference_device(), CoherenceProtocol::echo(), delays, 0.0, nm, b);
  EXPECT_EQ(sa.values, sb.values);
}

TEST(Coherence, DressedShiftLimit) {
  const double g = angular(200e3);
  const double delta = angular(100e6);
  EXPECT_NEAR(dressed_shift(g, delta) / (-g * g / delta), 1.0, 1e-5);
  EXPECT_NEAR(dressed_shift(g, -delta), -dressed_shift(g, delta), 1e-9);
}

model::DeviceSpec three_level(double temperature) {
  model::DeviceSpec d = reference_device();
  d.transmon.levels = 3;
  d.transmon.thermal_pop = model::excited_population(d.transmon.omega_q, temperature);
  return d;
}

TEST(Rpm, QubitTemperatureRoundTrip) {
  const model::DeviceSpec d = three_level(0.060);
  EXPECT_NEAR(d.transmon.thermal_pop, 0.0166, 5e-4);
  const RpmResult r = rpm_thermometry(d, RpmTarget::kQubit);
  EXPECT_NEAR(r.temperature / 0.060, 1.0, 0.02);
  EXPECT_NEAR(r.p_ground + r.p_excited, 1.0, 1e-12);
}

TEST(Rpm, ZeroTemperatureHasNoTemperature) {
  const model::DeviceSpec d = three_level(0.0);
  EXPECT_EQ(code_of([&] { rpm_thermometry(d, RpmTarget::kQubit); }), ErrorCode::kNoTemperature);
  EXPECT_EQ(code_of([] { rpm_thermometry(reference_device(), RpmTarget::kQubit); }),
            ErrorCode::kInvalidArgument);
}

TEST(Rpm, MechanicsMapInvertsThermalState) {
  model::DeviceSpec d = three_level(0.060);
  d.mechanics[1].thermal_pop = model::bose_occupation(d.mechanics[1].omega_m, 0.072);
  RpmOptions o;
  o.mech = 1;
  EXPECT_LT(mech_thermometry_map(d, 0.02, o), mech_thermometry_map(d, 0.05, o));
  const RpmResult r = rpm_thermometry(d, RpmTarget::kMech, o);
  EXPECT_NEAR(r.temperature, 0.072, 0.010);
}

TEST(Stark, FormulaExamples) {
  const double g = angular(200e3);
  const double delta = angular(5e6);
  EXPECT_NEAR(stark_shift(g, delta, 0.0), 0.0, 0.0);
  EXPECT_NEAR(stark_shift(g, delta, 1.0) / kTwoPi, 16e3, 1e-6);
  EXPECT_NEAR(stark_shift(g, delta, 1.0, angular(-226e6)) / kTwoPi, 15.65e3, 5.0);
  EXPECT_NEAR(phonons_from_shift(g, delta, stark_shift(g, delta, 2.5)), 2.5, 1e-12);
}

TEST(Stark, FockSlopeMatchesDispersiveShift) {
  model::DeviceSpec d = reference_device();
  d.mechanics[0].g0 = angular(200e3) / 50.0;
  d.mechanics[0].thermal_pop = 0.0;
  std::vector<double> n, shift;
  for (int k : {0, 1, 2}) {
    Mat rho = Mat::Zero(8, 8);
    rho(k, k) = 1.0;
    n.push_back(k);
    shift.push_back(measure_stark_shift(d, rho));
  }
  const double slope = (shift[2] - shift[0]) / 2.0;
  EXPECT_NEAR(slope / stark_shift(angular(200e3), angular(5e6), 1.0), 1.0, 0.02);
}

TEST(Stark, RequiresDispersiveRegime) {
  StarkOptions o;
  o.qubit_detuning = angular(500e3);
  EXPECT_EQ(code_of([&] { stark_phonon_readout(reference_device(), cplx(1.0), {0.0}, o); }),
            ErrorCode::kInvalidArgument);
}

TEST(Peaks, FindsLorentzians) {
  const std::vector<double> x = arange(-10.0, 0.05, 401);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = lorentz(x[i], -3.0, 0.5) + 0.6 * lorentz(x[i], 4.0, 0.5);
  const auto p = find_peaks(x, y);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0].x, -3.0, 0.01);
  EXPECT_NEAR(p[1].x, 4.0, 0.01);
  EXPECT_NEAR(p[0].fwhm, 1.0, 0.05);
  EXPECT_TRUE(resolved_doublet(x, y));
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = lorentz(x[i], -0.3, 1.0) + lorentz(x[i], 0.3, 1.0);
  EXPECT_FALSE(resolved_doublet(x, y));
}

TEST(Spectroscopy, StrongCouplingDoublet) {
  model::DeviceSpec dev = reference_device().with_mechanics({1});
  dev.fock_dim = 3;
  const double fm = dev.mechanics[0].omega_m / kTwoPi;
  const Axis probe{"probe_hz", arange(fm - 1e6, 5e3, 401)};
  const Axis control{"omega_q_hz", {fm}};
  for (double v : {50.0, 5.0}) {
    model::DeviceSpec d = dev;
    d.V_dc = v;
    const ScanResult s = spectroscopy_scan(d, probe, control, ControlKind::kOmegaQ);
    EXPECT_EQ(s.shape(), (std::vector<std::size_t>{1, 401}));
    if (v == 50.0) {
      ASSERT_TRUE(resolved_doublet(probe.values, s.values));
      auto p = find_peaks(probe.values, s.values);
      std::sort(p.begin(), p.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
      const double split = std::abs(p[0].x - p[1].x);
      EXPECT_NEAR(split / (2.0 * 230e3), 1.0, 0.05);
    } else {
      EXPECT_FALSE(resolved_doublet(probe.values, s.values));
    }
  }
}

TEST(Spectroscopy, UncoupledDefectLeavesLinesStraight) {
  model::DeviceSpec dev = reference_device().with_mechanics({0});
  dev.fock_dim = 2;
  model::TlsSpec t;
  t.V0 = 50.0;
  t.lambda = 0.3e9;
  t.g = 0.0;
  t.Gamma1 = 1e6;
  dev.tls = {t};
  const double fm = dev.mechanics[0].omega_m / kTwoPi;
  dev.transmon.omega_q = angular(fm + 5e6);
  const Axis probe{"probe_hz", arange(fm - 1e6, 10e3, 201)};
  const Axis control{"V_dc", arange(49.99, 0.005, 5)};
  const ScanResult s = spectroscopy_scan(dev, probe, control, ControlKind::kVdc);
  std::vector<double> first;
  for (std::size_t c = 0; c < control.values.size(); ++c) {
    const std::vector<double> col(s.values.begin() + static_cast<long>(c * 201),
                                  s.values.begin() + static_cast<long>((c + 1) * 201));
    const auto p = find_peaks(probe.values, col, 0.05);
    ASSERT_FALSE(p.empty());
    if (c == 0) {
      for (const auto& q : p) first.push_back(q.x);
    } else {
      ASSERT_EQ(p.size(), first.size());
      for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p[k].x, first[k], 1e3);
    }
  }
}

TEST(StatePrep, Fidelities) {
  StatePrepOptions o;
  o.mech = 1;
  const StatePrepResult r = prepare_fock_states(reference_device(), o);
  EXPECT_NEAR(r.fidelity_ground, 0.989, 0.02);
  EXPECT_NEAR(r.fidelity_one, 0.759, 0.02);
  EXPECT_NEAR(r.fidelity_one, std::sqrt(r.p_one[1]), 1e-12);
  EXPECT_NO_THROW(r.one.validate());
}

}  // namespace
}  // namespace cqad::experiments
