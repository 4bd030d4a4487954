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

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cqad/common.hpp"

namespace cqad::fitkit {

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd params;
  Eigen::VectorXd sigma;
  double residual = 0.0;
  bool converged = false;
  int n_eval = 0;
  // "jacobian", "bootstrap" or "none".
  std::string interval_method = "none";

  double value(std::string_view name) const;
  double error(std::string_view name) const;
  std::string to_json() const;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct NelderMeadOptions {
  double xtol = 1e-10;  // simplex diameter, relative to max(1, |x|)
  double ftol = 1e-14;  // objective spread, relative to max(1e-300, |f|) plus absolute floor
  int max_eval = 20000;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  Eigen::VectorXd initial_step;  // empty: 5% of |x0_i|, 2.5e-4 for zeros
  bool restart = true;
  bool throw_on_max_eval = true;  // false: return the best vertex with converged = false
};

// Downhill simplex; restarts once from the best vertex after convergence.
FitResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0,
                      const NelderMeadOptions& options = {});

enum class ModelKind {
  kExpDecay,                // a exp(-t/tau) + c
  kGaussDecay,              // a exp(-(t/tau)^2) + c
  kDampedSinusoid,          // a exp(-t/tau) cos(2 pi f t + phi) + c
  kAvoidedCrossing,         // branch frequencies, see fit_avoided_crossing
  kLorentzianPlusPowerLaw,  // A 2 gamma1/(gamma1^2 + w^2) + B/|w|^alpha
  kLinear,                  // m x + c
};

struct ModelFn {
  ModelKind kind = ModelKind::kLinear;
  std::map<std::string, double> fixed;

  const std::vector<std::string>& names() const;
  double operator()(const Eigen::VectorXd& params, double x) const;
};

ModelFn exp_decay(bool offset = false);
ModelFn gauss_decay(bool offset = false);
ModelFn damped_sinusoid();
ModelFn lorentzian_plus_powerlaw();
ModelFn linear_model();

struct CurveFitOptions {
  NelderMeadOptions simplex;
  int bootstrap_resamples = 200;
  unsigned long long bootstrap_seed = 0;
};

// Least squares over the free parameters: simplex search then Levenberg-Marquardt polish.
// p0 holds every parameter of the model; fixed entries are ignored.
// 1-sigma intervals from the Jacobian covariance, bootstrap when the Jacobian is singular.
FitResult curve_fit(const ModelFn& model, const std::vector<double>& x,
                    const std::vector<double>& y, const Eigen::VectorXd& p0,
                    const CurveFitOptions& options = {});

struct LinearFit {
  Eigen::VectorXd coef;
  Eigen::MatrixXd covariance;
  double residual = 0.0;
};

LinearFit linear_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

// Lawson-Hanson nonnegative least squares.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, int max_iter = 0);

struct SimplexLsq {
  Eigen::VectorXd x;
  double residual = 0.0;  // ||A x - y||
  int iterations = 0;
};

// min ||A x - y|| subject to x >= 0 and sum(x) = 1, exact active-set solution.
SimplexLsq nnls_simplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

struct CrossingPoint {
  double control = 0.0;
  double omega = 0.0;  // rad/s
};

struct AvoidedCrossingFit {
  double g = 0.0;        // rad/s
  double slope = 0.0;    // Hz per control unit
  double x0 = 0.0;       // crossing control value
  double omega_m = 0.0;  // rad/s
  double sigma_g = 0.0;
  double sigma_slope = 0.0;
  double sigma_x0 = 0.0;
  FitResult fit;
};

// Branch frequencies (omega_m + omega_tls)/2 +- sqrt(((omega_tls - omega_m)/2)^2 + g^2),
// omega_tls = omega_m + 2 pi slope (x - x0).
double crossing_branch(double g, double slope, double x0, double omega_m, double x, int sign);

// Unlabeled points; each point is scored against the nearer branch.
AvoidedCrossingFit fit_avoided_crossing(const std::vector<CrossingPoint>& points);

struct FringeFit {
  double frequency = 0.0;  // Hz
  double decay = 0.0;      // s
  double phase = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double sigma_frequency = 0.0;
  bool frequency_identifiable = true;
  FitResult fit;
};

// Uniformly sampled damped sinusoid.
FringeFit fit_fringes(const std::vector<double>& t, const std::vector<double>& y);

enum class DecayShape { kExponential, kGaussian };
DecayShape select_decay_model(const std::vector<double>& t, const std::vector<double>& y);

struct PowerLawFit {
  double alpha = 0.0;
  double sigma_alpha = 0.0;
  double amplitude = 0.0;
};

// Slope of log S against log omega over [omega_lo, omega_hi], with log-spaced bin averaging.
PowerLawFit fit_power_law(const std::vector<double>& omega, const std::vector<double>& S,
                          double omega_lo, double omega_hi);

struct LorentzianFit {
  double gamma1 = 0.0;  // 1/s
  double amplitude = 0.0;
  double floor = 0.0;
  FitResult fit;
};

// Fits log S to log(A 2 gamma1/(gamma1^2 + omega^2) + floor) on omega > 0.
LorentzianFit fit_lorentzian(const std::vector<double>& omega, const std::vector<double>& S);

}  // namespace cqad::fitkit
