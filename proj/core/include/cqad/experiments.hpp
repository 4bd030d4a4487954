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

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cqad/engine.hpp"
#include "cqad/model.hpp"
#include "cqad/noisekit.hpp"
#include "cqad/qops.hpp"

namespace cqad::experiments {


struct Axis {
  std::string name;
  std::vector<double> values;
};

// Values are stored row-major over the axes (last axis fastest).
struct ScanResult {
  std::vector<Axis> axes;
  std::vector<double> values;
  std::vector<std::uint64_t> seed_map;
  std::string value_name = "value";
  std::vector<std::string> warnings;

  std::size_t size() const { return values.size(); }
  std::vector<std::size_t> shape() const;
  std::vector<std::size_t> unravel(std::size_t flat) const;
  void validate() const;
  // One row per grid point: axis columns, then the value.
  void write_csv(std::ostream& os) const;
};

using PointFn = std::function<double(const std::vector<std::size_t>& index, std::uint64_t seed)>;

// Evaluates fn on every grid point with seed stream_seed(master_seed, flat index).
ScanResult run_scan(std::vector<Axis> axes, std::uint64_t master_seed, unsigned workers,
                    const PointFn& fn, std::string value_name = "value");


enum class StepKind { kSetDetuning, kPiPulse, kHalfPiPulse, kWait, kSwap, kDisplace, kMeasure };
const char* to_string(StepKind kind);

// Pulses and displacements are instantaneous. Pulse targets are "qubit" (g-e) or
// "qubit_ef" (e-f, three-level transmon only).
struct Step {
  StepKind kind = StepKind::kMeasure;
  double duration = 0.0;  // wait, swap (0 selects pi/(2 g_em))
  double phase = 0.0;     // pulse axis or displacement phase
  double amplitude = 0.0;  // set_detuning: qubit minus oscillator, rad/s; displace: |alpha|
  std::string target = model::kQubit;
};

struct PulseSequence {
  std::vector<Step> steps;

  PulseSequence& set_detuning(double detuning);
  PulseSequence& pi_pulse(double phase = 0.0, std::string target = model::kQubit);
  PulseSequence& half_pi_pulse(double phase = 0.0, std::string target = model::kQubit);
  PulseSequence& wait(double duration);
  PulseSequence& swap(double duration = 0.0);
  PulseSequence& displace(cplx alpha);
  PulseSequence& measure();

  // Non-empty, ends with measure, nonnegative durations.
  void validate() const;
};

// Classical frequency noise on the oscillator during wait steps; one switching
// history per shot.
struct NoiseModel {
  noisekit::FluctuatorEnsemble ensemble;
  int shots = 200;
  std::uint64_t seed = 0;
};

struct RunOptions {
  std::size_t mech = 0;
  // Reference frame at omega_m + frame_offset.
  double frame_offset = 0.0;
  // Initial joint state; default is the thermal product of the device populations.
  std::optional<qops::DensityMatrix> initial;
  std::optional<double> initial_qubit_pop;
  // Qubit bath population used by the collapse operators.
  std::optional<double> qubit_bath_pop;
  std::optional<NoiseModel> noise;
  unsigned workers = 1;
};

struct SequenceResult {
  std::vector<double> pe;  // one entry per measure step
  qops::DensityMatrix final_state;  // shot average when noise is present
};

// Runs the sequence on dev.qubit_at(mech).with_mechanics({mech}). The qubit starts
// on resonance with the oscillator; swaps are resonant regardless of the current detuning.
SequenceResult run_sequence(const model::DeviceSpec& dev, const PulseSequence& seq,
                            const RunOptions& options = {});

// Single-oscillator device with the qubit coherence quoted at that oscillator.
model::DeviceSpec single_device(const model::DeviceSpec& dev, std::size_t mech);
double swap_time(const model::DeviceSpec& dev, std::size_t mech);


struct VacuumRabiOptions {
  std::size_t mech = 0;
  int samples = 201;
  bool lossless = false;
};

// |e,0> with the qubit resonant; series "P_e" and "n_mech".
engine::Trajectory vacuum_rabi(const model::DeviceSpec& dev, double duration,
                               const VacuumRabiOptions& options = {});

struct LifetimeOptions {
  std::size_t mech = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// pi pulse, swap, park at park_detuning for each delay, swap back, measure P_e.
ScanResult mech_lifetime(const model::DeviceSpec& dev, const std::vector<double>& delays,
                         double park_detuning, const LifetimeOptions& options = {});

struct LifetimeFit {
  double tau = 0.0;
  double sigma_tau = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
};
LifetimeFit fit_lifetime(const ScanResult& scan);

// 1/(Gamma_i + (g/Delta)^2 kappa) with kappa = 1/T1q.
double predicted_lifetime(const model::DeviceSpec& dev, std::size_t mech, double park_detuning);

enum class CoherenceKind { kRamsey, kEcho, kCarrPurcell };

struct CoherenceProtocol {
  CoherenceKind kind = CoherenceKind::kRamsey;
  int pulses = 1;  // refocusing pulses for Carr-Purcell

  static CoherenceProtocol ramsey() { return {CoherenceKind::kRamsey, 0}; }
  static CoherenceProtocol echo() { return {CoherenceKind::kEcho, 1}; }
  static CoherenceProtocol cp(int n) { return {CoherenceKind::kCarrPurcell, n}; }
  int refocusing_pulses() const;
};

// Oscillator pi/2 implementation: qubit pi/2 then a full swap, or qubit pi then a
// half-duration swap.
enum class MechPulse { kQubitThenSwap, kHalfSwap };

struct CoherenceOptions {
  std::size_t mech = 0;
  MechPulse strategy = MechPulse::kQubitThenSwap;
  double park_detuning = angular(100e6);
  double swap_duration = 0.0;  // 0: pi/(2 g_em)
  double final_phase = 0.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// P_e after an oscillator Ramsey, echo or CP sequence with total free evolution `delay`.
// The frame is detuned by `detuning` from the qubit-dressed oscillator frequency at the
// park point, so fringes appear at `detuning`.
ScanResult coherence_sequence(const model::DeviceSpec& dev, const CoherenceProtocol& protocol,
                              const std::vector<double>& delays, double detuning,
                              const std::optional<NoiseModel>& noise,
                              const CoherenceOptions& options = {});

// Oscillator frequency shift from a far-detuned qubit in its ground state (exact two-mode).
double dressed_shift(double g, double detuning);

// Contrast |2 P_e - 1| normalized by its first point, and the first 1/e crossing.
double contrast_decay_time(const ScanResult& scan);

enum class RpmTarget { kQubit, kMech };

struct RpmOptions {
  std::size_t mech = 0;
  double ef_rabi = angular(20e6);
  int points = 41;
  double cycles = 4.0;
  // Qubit population before the thermometry swap; default transmon.stark_thermal_pop.
  std::optional<double> stark_pop;
};

struct RpmResult {
  double amp_with = 0.0;     // e-f oscillation amplitude after a g-e pi pulse
  double amp_without = 0.0;
  double p_ground = 0.0;
  double p_excited = 0.0;
  double temperature = 0.0;  // of the qubit transition, or of the oscillator for kMech
  double mech_occupation = 0.0;
};

// Needs a three-level transmon.
RpmResult rpm_thermometry(const model::DeviceSpec& dev, RpmTarget target,
                          const RpmOptions& options = {});
// RPM population estimate of the qubit after a resonant swap from a thermal oscillator
// with mean occupation nbar.
double mech_thermometry_map(const model::DeviceSpec& dev, double nbar,
                            const RpmOptions& options = {});

// 2 g^2 n / Delta, or -2 g^2 alpha n / (Delta (Delta - alpha)) with an anharmonicity.
double stark_shift(double g, double detuning, double nbar,
                   std::optional<double> anharmonicity = std::nullopt);
double phonons_from_shift(double g, double detuning, double shift,
                          std::optional<double> anharmonicity = std::nullopt);

struct StarkOptions {
  std::size_t mech = 0;
  double qubit_detuning = angular(5e6);  // qubit minus oscillator
  double ramsey_detuning = angular(20e6);
  double ramsey_span = 2e-6;
  int ramsey_points = 201;
  bool alpha_corrected = false;
  bool subtract_final = true;
  int fock_dim = 0;  // 0: from the displacement
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// Qubit frequency shift (rad/s) measured by a simulated Ramsey with the oscillator in rho_mech.
double measure_stark_shift(const model::DeviceSpec& dev, const Mat& rho_mech,
                           const StarkOptions& options = {});

// Oscillator displaced by init_drive from its thermal state, free decay for each delay,
// then a qubit Ramsey; values are the inferred mean phonon numbers.
ScanResult stark_phonon_readout(const model::DeviceSpec& dev, cplx init_drive,
                                const std::vector<double>& delays,
                                const StarkOptions& options = {});

enum class ControlKind { kOmegaQ, kVdc };

struct SpectroscopyOptions {
  double probe_amplitude = 0.0;  // 0: 0.01 / T2q*
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// Steady-state P_e over (control, probe). probe values in Hz; control values in Hz
// (qubit frequency) or volts.
ScanResult spectroscopy_scan(const model::DeviceSpec& dev, const Axis& probe,
                             const Axis& control, ControlKind control_kind,
                             const SpectroscopyOptions& options = {});

struct Peak {
  double x = 0.0;
  double height = 0.0;  // above the minimum of the trace
  double fwhm = 0.0;    // twice the narrower half width at half height
};

// Local maxima higher than min_fraction of the tallest, sorted by x; parabolic refinement.
std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                             double min_fraction = 0.1);
// Rayleigh-type test: the two strongest peaks are further apart than their mean full
// width, each width taken from the outer flank.
bool resolved_doublet(const std::vector<double>& x, const std::vector<double>& y);


struct StatePrepOptions {
  std::size_t mech = 0;
  double ground_wait = 25e-6;
  double qubit_initial_pop = 0.039;
  double qubit_bath_temperature = 0.060;
  double mech_temperature = 0.072;
  double swap_duration = 0.0;
};

struct StatePrepResult {
  qops::DensityMatrix ground;  // joint state after the resonant cooling wait
  qops::DensityMatrix one;     // joint state after pi pulse and swap
  std::vector<double> p_ground;
  std::vector<double> p_one;
  double fidelity_ground = 0.0;
  double fidelity_one = 0.0;
};

StatePrepResult prepare_fock_states(const model::DeviceSpec& dev,
                                    const StatePrepOptions& options = {});

}  // namespace cqad::experiments
