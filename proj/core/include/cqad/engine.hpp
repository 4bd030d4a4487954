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

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cqad/qops.hpp"

namespace cqad::engine {

enum class Envelope { kConstant, kGaussian };
enum class Method { kAuto, kRungeKutta, kExponential };

// H(t) = hamiltonian + f(t) * drive on [0, duration]. The Gaussian envelope
// exp(-(t - T/2)^2 / (2 sigma^2)) is truncated at the segment edges, sigma = T/4 by default.
struct Segment {
  double duration = 0.0;
  qops::Operator hamiltonian;
  std::optional<qops::Operator> drive;
  Envelope envelope = Envelope::kConstant;
  double sigma = 0.0;
  // Replaces the problem-level dissipators for this segment.
  std::optional<std::vector<qops::Dissipator>> collapse;
  Method method = Method::kAuto;

  double envelope_at(double t) const;
  bool time_independent() const { return !drive || envelope == Envelope::kConstant; }
};

struct Observable {
  std::string label;
  qops::Operator op;
};

struct LindbladProblem {
  std::vector<Segment> segments;
  std::vector<qops::Dissipator> collapse;
  qops::DensityMatrix rho0;
  double rtol = 1e-8;
  double atol = 1e-10;
  std::vector<Observable> observables;
  // Absolute times from the start of the first segment.
  std::vector<double> sample_times;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;
  qops::DensityMatrix final_state;
  std::vector<std::string> warnings;
  double max_trace_drift = 0.0;

  const std::vector<double>& series(std::string_view label) const;
  // Header "time_s,<label>,...".
  void write_csv(std::ostream& os) const;
};

Trajectory evolve(const LindbladProblem& problem);

// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
Mat liouvillian(const qops::Operator& H, const std::vector<qops::Dissipator>& collapse);
Mat propagator(const qops::Operator& H, const std::vector<qops::Dissipator>& collapse, double t);
Mat apply_superoperator(const Mat& S, const Mat& rho);

// Propagates any operator (not necessarily a state) through one segment.
Mat propagate(const Mat& rho, const Segment& segment, const std::vector<qops::Dissipator>& collapse,
              double rtol = 1e-8, double atol = 1e-10);

// Null vector of the Liouvillian; requires the second-smallest singular value
// to exceed 1e3 times the smallest.
qops::DensityMatrix steady_state(const qops::Operator& H,
                                 const std::vector<qops::Dissipator>& collapse);

struct DecayFit {
  double tau = 0.0;
  double amplitude = 0.0;
  double sigma_tau = 0.0;
  double sigma_amplitude = 0.0;
};

// Least-squares a exp(-t/tau) with Jacobian-covariance intervals.
DecayFit decay_rate_fit(const std::vector<double>& t, const std::vector<double>& y);
DecayFit decay_rate_fit(const Trajectory& traj, std::string_view label);

}  // namespace cqad::engine
