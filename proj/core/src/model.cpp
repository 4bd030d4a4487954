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

#include "cqad/model.hpp"

#include <cmath>

namespace cqad::model {

using qops::CompositeSpace;
using qops::Dissipator;
using qops::Operator;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidSpec, field + ": " + why);
}

double pure_dephasing(double T1, double T2_star) {
  if (T1 <= 0.0 || !std::isfinite(T1)) return T2_star > 0.0 ? 1.0 / T2_star : 0.0;
  return std::max(0.0, 1.0 / T2_star - 1.0 / (2.0 * T1));
}

Mat diag_number(int dim) {
  Mat n = Mat::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

void add_relaxation(std::vector<Dissipator>& out, const CompositeSpace& space,
                    const std::string& label, const Mat& lower, double T1, double nth,
                    double gamma_phi) {
  if (T1 > 0.0 && std::isfinite(T1)) {
    out.push_back({qops::embed(lower, space, label), (1.0 + nth) / T1, label + ".down"});
    if (nth > 0.0) {
      out.push_back({qops::embed(Mat(lower.adjoint()), space, label), nth / T1, label + ".up"});
    }
  }
  if (gamma_phi > 0.0) {
    out.push_back({qops::embed(diag_number(static_cast<int>(lower.rows())), space, label),
                   2.0 * gamma_phi, label + ".dephase"});
  }
}

}  // namespace

void TransmonSpec::validate() const {
  if (EC <= 0.0) invalid("transmon.EC", "must be positive");
  if (EJ_max <= 0.0) invalid("transmon.EJ_max", "must be positive");
  if (T1 <= 0.0) invalid("transmon.T1", "must be positive");
  if (T2_star <= 0.0) invalid("transmon.T2_star", "must be positive");
  if (T2_star > 2.0 * T1 * (1.0 + 1e-12)) invalid("transmon.T2_star", "exceeds 2*T1");
  if (thermal_pop < 0.0 || thermal_pop >= 0.5) invalid("transmon.thermal_pop", "must lie in [0, 0.5)");
  if (stark_thermal_pop && (*stark_thermal_pop < 0.0 || *stark_thermal_pop >= 0.5)) {
    invalid("transmon.stark_thermal_pop", "must lie in [0, 0.5)");
  }
  if (levels != 2 && levels != 3) invalid("transmon.levels", "must be 2 or 3");
}

void MechSpec::validate() const {
  const std::string f = "mechanics[" + name + "]";
  if (omega_m <= 0.0) invalid(f + ".omega_m", "must be positive");
  if (g0 < 0.0) invalid(f + ".g0", "must be nonnegative");
  if (T1 <= 0.0) invalid(f + ".T1", "must be positive");
  if (T2_star < 0.0) invalid(f + ".T2_star", "must be nonnegative");
  if (T2_star > 2.0 * T1 * (1.0 + 1e-12)) invalid(f + ".T2_star", "exceeds 2*T1");
  if (thermal_pop < 0.0) invalid(f + ".thermal_pop", "must be nonnegative");
  if (Cm < 0.0) invalid(f + ".Cm", "must be nonnegative");
  if (qubit_T1 && *qubit_T1 <= 0.0) invalid(f + ".qubit_T1", "must be positive");
  if (qubit_T2_star && *qubit_T2_star <= 0.0) invalid(f + ".qubit_T2_star", "must be positive");
}

void TlsSpec::validate() const {
  if (Gamma1 <= 0.0) invalid("tls.Gamma1", "must be positive");
  if (Gamma_phi < 0.0) invalid("tls.Gamma_phi", "must be nonnegative");
  if (thermal_pop < 0.0) invalid("tls.thermal_pop", "must be nonnegative");
}

void DeviceSpec::validate() const {
  transmon.validate();
  for (const auto& m : mechanics) m.validate();
  for (const auto& t : tls) {
    t.validate();
    if (t.mech >= mechanics.size()) invalid("tls.mech", "refers to a missing oscillator");
  }
  if (V_dc < 0.0) invalid("V_dc", "must be nonnegative");
  if (fock_dim < 2) invalid("fock_dim", "must be at least 2");
}

DeviceSpec DeviceSpec::with_mechanics(const std::vector<std::size_t>& keep) const {
  DeviceSpec out = *this;
  out.mechanics.clear();
  out.tls.clear();
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] >= mechanics.size()) {
      throw Error(ErrorCode::kInvalidArgument, "oscillator index out of range");
    }
    out.mechanics.push_back(mechanics[keep[k]]);
    for (const auto& t : tls) {
      if (t.mech == keep[k]) {
        TlsSpec c = t;
        c.mech = k;
        out.tls.push_back(c);
      }
    }
  }
  return out;
}

DeviceSpec DeviceSpec::qubit_at(std::size_t i) const {
  DeviceSpec out = *this;
  const auto& m = mechanics.at(i);
  if (m.qubit_T1) out.transmon.T1 = *m.qubit_T1;
  if (m.qubit_T2_star) out.transmon.T2_star = *m.qubit_T2_star;
  return out;
}

DeviceSpec reference_device() {
  DeviceSpec dev;
  auto& t = dev.transmon;
  t.EJ_max = 15.9;
  t.EC = 0.226;
  t.omega_q = angular(5.1071e9);
  t.anharmonicity = angular(-226e6);
  t.T1 = 1.55e-6;
  t.T2_star = 1.05e-6;
  t.thermal_pop = 0.02;
  t.levels = 2;

  MechSpec a;
  a.name = "A";
  a.omega_m = angular(4.9176e9);
  a.T1 = 19.3e-3;
  a.T2_star = 64e-6;
  a.g0 = angular(4.0e3);
  a.Cm = 0.15e-15;
  a.qubit_T1 = 1.70e-6;
  a.qubit_T2_star = 1.30e-6;

  MechSpec b;
  b.name = "B";
  b.omega_m = angular(4.7667e9);
  b.T1 = 21.1e-3;
  b.T2_star = 67e-6;
  b.g0 = angular(4.6e3);
  b.Cm = 0.15e-15;
  b.qubit_T1 = 1.55e-6;
  b.qubit_T2_star = 1.05e-6;

  dev.mechanics = {a, b};
  dev.V_dc = 50.0;
  dev.fock_dim = 4;
  return dev;
}

std::string mech_label(std::size_t i) { return "mech" + std::to_string(i); }
std::string tls_label(std::size_t j) { return "tls" + std::to_string(j); }

double g_em(const MechSpec& mech, double V_dc) {
  if (V_dc < 0.0) throw Error(ErrorCode::kInvalidArgument, "V_dc must be nonnegative");
  return mech.g0 * V_dc;
}

double tls_frequency(const DeviceSpec& dev, std::size_t j) {
  const TlsSpec& t = dev.tls.at(j);
  return dev.mechanics.at(t.mech).omega_m + kTwoPi * t.lambda * (dev.V_dc - t.V0);
}

CompositeSpace make_space(const DeviceSpec& dev) {
  std::vector<std::string> labels{kQubit};
  std::vector<int> dims{dev.transmon.levels};
  for (std::size_t i = 0; i < dev.mechanics.size(); ++i) {
    labels.push_back(mech_label(i));
    dims.push_back(dev.fock_dim);
  }
  for (std::size_t j = 0; j < dev.tls.size(); ++j) {
    labels.push_back(tls_label(j));
    dims.push_back(2);
  }
  return CompositeSpace(labels, dims);
}

Mat qubit_lowering(int levels) { return qops::annihilation(levels).matrix(); }

Mat sigma_z() {
  Mat z = Mat::Zero(2, 2);
  z(0, 0) = -1.0;
  z(1, 1) = 1.0;
  return z;
}

namespace {

// Linear-response amplitude of each oscillator under a weak static qubit drive.
void check_drive_truncation(const DeviceSpec& dev, const Frame& frame) {
  if (frame.drive_amplitude == 0.0 || dev.mechanics.empty()) return;
  const double gq = 1.0 / dev.transmon.T2_star;
  cplx denom(dev.transmon.omega_q - frame.omega_ref, -gq);
  std::vector<cplx> chi;
  for (const auto& m : dev.mechanics) {
    const double g = g_em(m, dev.V_dc);
    const cplx dm(m.omega_m - frame.omega_ref, -1.0 / m.effective_T2_star());
    chi.push_back(-g / dm);
    denom -= g * g / dm;
  }
  const cplx a = -0.5 * frame.drive_amplitude / denom;
  for (std::size_t i = 0; i < chi.size(); ++i) {
    const double nbar = std::norm(chi[i] * a) + dev.mechanics[i].thermal_pop;
    if (required_fock_dim(nbar) > dev.fock_dim) {
      throw Error(ErrorCode::kInvalidSpec,
                  "fock_dim " + std::to_string(dev.fock_dim) +
                      " too small for drive amplitude (estimated occupation " +
                      std::to_string(nbar) + ")");
    }
  }
}

}  // namespace

Operator build_hamiltonian(const DeviceSpec& dev, const Frame& frame) {
  dev.validate();
  check_drive_truncation(dev, frame);
  const CompositeSpace space = make_space(dev);
  const int nq = dev.transmon.levels;
  Mat hq = (dev.transmon.omega_q - frame.omega_ref) * diag_number(nq);
  if (nq == 3) {
    Mat nn = diag_number(nq);
    hq += 0.5 * dev.transmon.anharmonicity * nn * (nn - Mat::Identity(nq, nq));
  }
  Operator H = qops::embed(hq, space, kQubit);
  const Operator sm = qops::embed(qubit_lowering(nq), space, kQubit);
  for (std::size_t i = 0; i < dev.mechanics.size(); ++i) {
    const auto& m = dev.mechanics[i];
    const std::string l = mech_label(i);
    H += qops::embed(Mat((m.omega_m - frame.omega_ref) * diag_number(dev.fock_dim)), space, l);
    const Operator b = qops::embed(qops::annihilation(dev.fock_dim), space, l);
    const double g = g_em(m, dev.V_dc);
    if (g != 0.0) H += (sm.adjoint() * b + sm * b.adjoint()) * g;
  }
  for (std::size_t j = 0; j < dev.tls.size(); ++j) {
    const auto& t = dev.tls[j];
    const std::string l = tls_label(j);
    H += qops::embed(Mat((tls_frequency(dev, j) - frame.omega_ref) * diag_number(2)), space, l);
    if (t.g != 0.0) {
      const Operator s = qops::embed(qops::annihilation(2), space, l);
      const Operator b = qops::embed(qops::annihilation(dev.fock_dim), space, mech_label(t.mech));
      H += (s.adjoint() * b + s * b.adjoint()) * t.g;
    }
  }
  if (frame.drive_amplitude != 0.0) H += qubit_drive_operator(dev, frame.drive_phase) * frame.drive_amplitude;
  return H;
}

Operator qubit_drive_operator(const DeviceSpec& dev, double phase) {
  const CompositeSpace space = make_space(dev);
  const Operator sm = qops::embed(qubit_lowering(dev.transmon.levels), space, kQubit);
  const cplx e = std::polar(1.0, phase);
  return (sm.adjoint() * e + sm * std::conj(e)) * 0.5;
}

std::vector<Dissipator> collapse_ops(const DeviceSpec& dev, const CollapseOptions& options) {
  dev.validate();
  const CompositeSpace space = make_space(dev);
  std::vector<Dissipator> out;
  const auto& t = dev.transmon;
  const double pq = options.qubit_thermal_pop.value_or(t.thermal_pop);
  add_relaxation(out, space, kQubit, qubit_lowering(t.levels), t.T1, nth_from_population(pq),
                 pure_dephasing(t.T1, t.T2_star));
  for (std::size_t i = 0; i < dev.mechanics.size(); ++i) {
    const auto& m = dev.mechanics[i];
    add_relaxation(out, space, mech_label(i), qops::annihilation(dev.fock_dim).matrix(), m.T1,
                   m.thermal_pop, pure_dephasing(m.T1, m.effective_T2_star()));
  }
  for (std::size_t j = 0; j < dev.tls.size(); ++j) {
    const auto& s = dev.tls[j];
    add_relaxation(out, space, tls_label(j), qops::annihilation(2).matrix(), 1.0 / s.Gamma1,
                   s.thermal_pop, s.Gamma_phi);
  }
  return out;
}

EquivalentCircuit equivalent_circuit(const MechSpec& mech, double g, const TransmonSpec& t) {
  if (g <= 0.0) throw Error(ErrorCode::kInvalidArgument, "coupling must be positive");
  const double Z = transmon_derived(t).Z;
  const double total = mech.Cm * mech.Cm * t.omega_q * t.omega_q * Z * mech.omega_m / (4.0 * g * g);
  EquivalentCircuit c;
  c.Cm = mech.Cm;
  c.Ck = total - mech.Cm;
  c.Lk = 1.0 / (mech.omega_m * mech.omega_m * total);
  return c;
}

double coupling_from_circuit(const EquivalentCircuit& c, const MechSpec& mech,
                             const TransmonSpec& t) {
  const double Z = transmon_derived(t).Z;
  const double total = c.Ck + c.Cm;
  return c.Cm * t.omega_q * std::sqrt(Z * mech.omega_m / (4.0 * total));
}

TransmonDerived transmon_derived(const TransmonSpec& t) {
  TransmonDerived d;
  d.omega_q_max = kTwoPi * 1e9 * (std::sqrt(8.0 * t.EJ_max * t.EC) - t.EC);
  const double rq = kPlanck / (4.0 * kElectronCharge * kElectronCharge);
  d.Z = rq / kPi * std::sqrt(2.0 * t.EC / t.EJ_max);
  d.C_sigma = kElectronCharge * kElectronCharge / (2.0 * kPlanck * t.EC * 1e9);
  return d;
}

Cooperativities cooperativities(const DeviceSpec& dev, std::size_t mech,
                                std::optional<double> V_dc) {
  const MechSpec& m = dev.mechanics.at(mech);
  const double g = g_em(m, V_dc.value_or(dev.V_dc));
  const double T1q = m.qubit_T1.value_or(dev.transmon.T1);
  const double T2q = m.qubit_T2_star.value_or(dev.transmon.T2_star);
  return {4.0 * g * g * m.T1 * T1q, g * g * m.effective_T2_star() * T2q};
}

double bose_occupation(double omega, double T) {
  if (T <= 0.0) return 0.0;
  return 1.0 / std::expm1(kHbar * omega / (kBoltzmann * T));
}

double excited_population(double omega, double T) {
  if (T <= 0.0) return 0.0;
  const double x = std::exp(-kHbar * omega / (kBoltzmann * T));
  return x / (1.0 + x);
}

double temperature_from_ratio(double omega, double p_ground, double p_excited) {
  if (p_excited <= 0.0 || p_ground <= 0.0 || p_ground <= p_excited) {
    throw Error(ErrorCode::kNoTemperature, "population ratio does not define a temperature");
  }
  return kHbar * omega / (kBoltzmann * std::log(p_ground / p_excited));
}

double nth_from_population(double p) {
  if (p < 0.0 || p >= 0.5) throw Error(ErrorCode::kInvalidArgument, "population must lie in [0, 0.5)");
  return p / (1.0 - 2.0 * p);
}

int required_fock_dim(double nbar, double tol) {
  if (nbar <= 0.0) return 2;
  double p = std::exp(-nbar);
  double cdf = p;
  int n = 0;
  while (1.0 - cdf >= tol && n < 4096) {
    ++n;
    p *= nbar / n;
    cdf += p;
  }
  return std::max(2, n + 1);
}

}  // namespace cqad::model
