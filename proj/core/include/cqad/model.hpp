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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cqad/qops.hpp"

namespace cqad::model {

struct TransmonSpec {
  double EJ_max = 15.9;  // E_J/h in GHz
  double EC = 0.226;     // E_C/h in GHz
  double omega_q = 0.0;  // rad/s
  double anharmonicity = 0.0;  // rad/s
  double T1 = 0.0;       // s
  double T2_star = 0.0;  // s
  double thermal_pop = 0.0;  // excited-state population at rest
  int levels = 2;
  // Excited-state population while an ac-Stark detuning is applied.
  std::optional<double> stark_thermal_pop = 0.039;

  void validate() const;
};

struct MechSpec {
  std::string name;
  double omega_m = 0.0;  // rad/s
  double T1 = 0.0;       // s
  double T2_star = 0.0;  // s; 0 means 2*T1 (no pure dephasing)
  double g0 = 0.0;       // rad/s per volt
  double Cm = 0.0;       // F
  double kappa_e = 0.0;  // rad/s
  double thermal_pop = 0.0;  // mean phonon occupation
  // Qubit coherence when tuned to this oscillator; falls back to the transmon values.
  std::optional<double> qubit_T1;
  std::optional<double> qubit_T2_star;

  double effective_T2_star() const { return T2_star > 0.0 ? T2_star : 2.0 * T1; }
  void validate() const;
};

struct TlsSpec {
  double V0 = 0.0;           // V
  double lambda = 0.0;       // Hz/V
  double g = 0.0;            // rad/s
  double g_long = 0.0;       // rad/s
  double Gamma1 = 0.0;       // 1/s
  double Gamma_phi = 0.0;    // 1/s
  std::size_t mech = 0;      // oscillator the defect couples to
  double thermal_pop = 0.0;

  void validate() const;
};

struct DeviceSpec {
  TransmonSpec transmon;
  std::vector<MechSpec> mechanics;
  std::vector<TlsSpec> tls;
  double V_dc = 0.0;
  int fock_dim = 10;

  void validate() const;
  // Copy keeping only the listed oscillators; TLS attached to dropped oscillators are removed.
  DeviceSpec with_mechanics(const std::vector<std::size_t>& keep) const;
  // Copy whose transmon T1/T2* are those quoted at oscillator i.
  DeviceSpec qubit_at(std::size_t i) const;
};

struct EquivalentCircuit {
  double Ck = 0.0;
  double Lk = 0.0;
  double Cm = 0.0;
};

struct TransmonDerived {
  double omega_q_max = 0.0;  // rad/s
  double Z = 0.0;            // Ohm
  double C_sigma = 0.0;      // F
};

struct Cooperativities {
  double C_T1 = 0.0;
  double C_T2 = 0.0;
};

// Rotating frame at omega_ref; an optional qubit drive at omega_ref.
struct Frame {
  double omega_ref = 0.0;
  double drive_amplitude = 0.0;  // Omega_q, rad/s
  double drive_phase = 0.0;
};

// Two-oscillator device with the characterized parameter set (oscillators A and B at 50 V).
DeviceSpec reference_device();

std::string mech_label(std::size_t i);
std::string tls_label(std::size_t j);
inline constexpr const char* kQubit = "qubit";

double g_em(const MechSpec& mech, double V_dc);
double tls_frequency(const DeviceSpec& dev, std::size_t j);

qops::CompositeSpace make_space(const DeviceSpec& dev);

// Qubit ladder operator; sqrt(n) matrix elements for a three-level transmon.
Mat qubit_lowering(int levels);
// Pauli z with sigma_z|e> = +|e>, basis ordered (g, e).
Mat sigma_z();

qops::Operator build_hamiltonian(const DeviceSpec& dev, const Frame& frame);
// Drive operator (sigma_+ e^{i phi} + sigma_-)/2 on the qubit, scaled by the envelope amplitude.
qops::Operator qubit_drive_operator(const DeviceSpec& dev, double phase = 0.0);

struct CollapseOptions {
  std::optional<double> qubit_thermal_pop;
};

// Downward (1+nth)/T1, upward nth/T1, and pure dephasing
// Gamma_phi = 1/T2* - 1/(2T1) realized as 2 Gamma_phi on the number operator.
std::vector<qops::Dissipator> collapse_ops(const DeviceSpec& dev,
                                           const CollapseOptions& options = {});

EquivalentCircuit equivalent_circuit(const MechSpec& mech, double g, const TransmonSpec& t);
double coupling_from_circuit(const EquivalentCircuit& c, const MechSpec& mech,
                             const TransmonSpec& t);
TransmonDerived transmon_derived(const TransmonSpec& t);
Cooperativities cooperativities(const DeviceSpec& dev, std::size_t mech,
                                std::optional<double> V_dc = std::nullopt);

// Thermal helpers.
double bose_occupation(double omega, double T);
double excited_population(double omega, double T);
double temperature_from_ratio(double omega, double p_ground, double p_excited);
// Two-level thermal nth reproducing an excited population p under (1+nth, nth) rates.
double nth_from_population(double p);
// Smallest Fock dimension whose Poisson(nbar) tail beyond the top level is below tol.
int required_fock_dim(double nbar, double tol = 1e-6);

}  // namespace cqad::model
