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
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqad/model.hpp"
#include "cqad/qops.hpp"

namespace cqad::tomography {

struct RabiTrace {
  std::vector<double> times;
  std::vector<double> pe;
  double r = 0.0;
  bool phase_averaged = true;

  void validate() const;
};

struct FockDistribution {
  std::vector<double> p;
  std::vector<double> sigma;
  double residual = 0.0;
  double parity_sigma = 0.0;

  void validate() const;
};

struct WignerTomogram {
  std::vector<double> radii;
  std::vector<double> w;
  std::vector<double> sigma;

  void validate() const;
  // Header "r,W,sigma".
  void write_csv(std::ostream& os) const;
};

// P_e(t) of |g, n> for n = 0..max_fock; rows are times, columns Fock levels.
struct RabiBasis {
  std::vector<double> times;
  Eigen::MatrixXd curves;

  int max_fock() const { return static_cast<int>(curves.cols()) - 1; }
  RabiBasis truncated(int max_fock) const;
};

// Resonant qubit-oscillator evolution of a joint state on the space of a single-oscillator
// device, sampled at `times`.
std::vector<double> simulate_rabi(const model::DeviceSpec& single, const qops::DensityMatrix& rho,
                                  const std::vector<double>& times);
// Device reduced to oscillator `mech` with fock_dim = max_fock + 2.
RabiBasis rabi_basis(const model::DeviceSpec& dev, std::size_t mech,
                     const std::vector<double>& times, int max_fock);

struct DecomposeOptions {
  int bootstrap = 100;
  std::uint64_t seed = 0;
  double max_condition = 1e8;
};

// Simplex-constrained least squares of the trace onto the basis curves.
FockDistribution decompose_rabi(const RabiTrace& trace, const RabiBasis& basis,
                                const DecomposeOptions& options = {});

double parity(const FockDistribution& p);
double parity(const std::vector<double>& p);
double wigner_point(double parity);

// Phase-averaged Wigner function of |n> at radius r: (2/pi)(-1)^n e^{-2r^2} L_n(4r^2).
double fock_wigner(int n, double r);
// W(alpha) = (2/pi) Tr[D(-alpha) rho D(alpha) Pi] on a truncated mode.
double wigner_at(const Mat& rho, cplx alpha);

// Poisson(lambda) maximum-likelihood fit: lambda = mean, r = sqrt(lambda).
struct PoissonFit {
  double r = 0.0;
  double kl = 0.0;
};
PoissonFit poisson_fit(const std::vector<double>& p);

struct ReconstructOptions {
  int resamples = 200;
  std::uint64_t seed = 0;
};

struct Reconstruction {
  std::vector<double> p;
  std::vector<double> sigma;
  double residual = 0.0;
  int resamples = 0;

  Mat density() const;
  std::string to_json() const;
};

// Diagonal, nonnegative, trace-one fit of the tomogram; sigma from Monte-Carlo resampling.
Reconstruction reconstruct(const WignerTomogram& tomogram, int max_fock,
                           const ReconstructOptions& options = {});

double fidelity(const Mat& rho, const Vec& target);
double fidelity(const std::vector<double>& diagonal, const Vec& target);

// Standard deviation of bootstrap means of `data`.
double bootstrap_mean_sigma(const std::vector<double>& data, int resamples, std::uint64_t seed);

struct PipelineOptions {
  std::vector<double> radii;  // empty: 12 points uniform on [0, 2.4]
  double drive_duration = 8e-6;
  double qubit_detuning = angular(5e6);
  std::vector<double> rabi_times;  // empty: 101 points on [0, 5 us]
  int shots = 2000;  // binomial readout noise per point; 0 disables
  double tail_tol = 1e-3;
  int reconstruct_max_fock = 4;
  int phase_samples = 1;
  bool ideal_displacement = false;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  DecomposeOptions decompose;
  ReconstructOptions reconstruct;
};

struct PipelineResult {
  WignerTomogram tomogram;
  std::vector<double> target_radii;
  std::vector<FockDistribution> distributions;
  Reconstruction reconstruction;
  int fock_dim = 0;
};

std::vector<double> default_radii();

// Displaced-Rabi Wigner tomography of a qubit-oscillator state on the space of
// dev.with_mechanics({mech}); the qubit is assumed to start near its ground state.
PipelineResult run_pipeline(const model::DeviceSpec& dev, std::size_t mech,
                            const qops::DensityMatrix& joint, const PipelineOptions& options = {});

// Displacement radius produced by a Gaussian drive of peak amplitude eps (rad/s)
// on vacuum, from the Poisson fit of the simulated populations.
double calibrate_displacement(const model::DeviceSpec& single, double eps,
                              const PipelineOptions& options);

}  // namespace cqad::tomography
