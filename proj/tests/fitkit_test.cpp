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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cqad/fitkit.hpp"

namespace cqad::fitkit {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

TEST(NelderMead, Quadratic) {
  VectorXd x0(1);
  x0 << 0.0;
  const FitResult r = nelder_mead([](const VectorXd& x) { return (x(0) - 3) * (x(0) - 3); }, x0);
  EXPECT_NEAR(r.params(0), 3.0, 1e-6);
  EXPECT_TRUE(r.converged);
}

TEST(NelderMead, Rosenbrock) {
  VectorXd x0(2);
  x0 << -1.2, 1.0;
  const FitResult r = nelder_mead(
      [](const VectorXd& x) { return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2); }, x0);
  EXPECT_NEAR(r.params(0), 1.0, 1e-4);
  EXPECT_NEAR(r.params(1), 1.0, 1e-4);
}

TEST(NelderMead, ExponentialObjective) {
  const auto t = linspace(0, 0.1, 40);
  std::vector<double> y;
  for (double x : t) y.push_back(0.7 * std::exp(-x / 25e-3));
  auto obj = [&](const VectorXd& p) {
    double s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) s += std::pow(p(0) * std::exp(-t[i] / p(1)) - y[i], 2);
    return s;
  };
  VectorXd x0(2);
  x0 << 1.0, 10e-3;
  const FitResult r = nelder_mead(obj, x0);
  EXPECT_NEAR(r.params(1) / 25e-3, 1.0, 1e-6);
}

TEST(NelderMead, MaxEvaluations) {
  VectorXd x0(2);
  x0 << -1.2, 1.0;
  NelderMeadOptions o;
  o.max_eval = 20;
  try {
    nelder_mead([](const VectorXd& x) { return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2); }, x0, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMaxEvaluations);
  }
}

TEST(NelderMead, Deterministic) {
  VectorXd x0(2);
  x0 << -1.2, 1.0;
  auto f = [](const VectorXd& x) { return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2); };
  const FitResult a = nelder_mead(f, x0);
  const FitResult b = nelder_mead(f, x0);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.n_eval, b.n_eval);
}

TEST(CurveFit, JsonAndIntervals) {
  const auto t = linspace(0, 10, 50);
  std::vector<double> y;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 0.01);
  for (double x : t) y.push_back(2.0 * x + 1.0 + n(rng));
  VectorXd p0(2);
  p0 << 1.0, 0.0;
  const FitResult r = curve_fit(linear_model(), t, y, p0);
  EXPECT_NEAR(r.value("m"), 2.0, 5 * r.error("m"));
  EXPECT_GT(r.error("m"), 0.0);
  EXPECT_EQ(r.interval_method, "jacobian");
  EXPECT_NE(r.to_json().find("\"m\""), std::string::npos);
}

TEST(Nnls, MatchesUnconstrainedWhenInterior) {
  MatrixXd A(4, 2);
  A << 1, 0, 0, 1, 1, 1, 2, 1;
  VectorXd x(2);
  x << 0.3, 0.7;
  const VectorXd got = nnls(A, A * x);
  EXPECT_LT((got - x).norm(), 1e-12);
  VectorXd y(4);
  y << -1, 1, 0, -1;
  EXPECT_GE(nnls(A, y).minCoeff(), 0.0);
}

TEST(NnlsSimplex, ExactConstraints) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    MatrixXd A(12, 6);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 6; ++j) A(i, j) = g(rng);
    VectorXd y(12);
    for (int i = 0; i < 12; ++i) y(i) = g(rng);
    const SimplexLsq s = nnls_simplex(A, y);
    EXPECT_GE(s.x.minCoeff(), 0.0);
    EXPECT_NEAR(s.x.sum(), 1.0, 1e-14);
    // KKT: no feasible direction e_j - x improves the objective.
    const VectorXd grad = A.transpose() * (A * s.x - y);
    const double base = grad.dot(s.x);
    for (int j = 0; j < 6; ++j) EXPECT_GE(grad(j) - base, -1e-9);
  }
}

TEST(NnlsSimplex, RecoversInteriorPoint) {
  MatrixXd A = MatrixXd::Random(10, 4);
  VectorXd x(4);
  x << 0.1, 0.2, 0.3, 0.4;
  const SimplexLsq s = nnls_simplex(A, A * x);
  EXPECT_LT((s.x - x).norm(), 1e-10);
}

TEST(AvoidedCrossing, RecoversParameters) {
  const double g = angular(0.5e6);
  const double slope = 0.3e9;
  const double x0 = 0.004;
  const double wm = angular(4.7667e9);
  std::vector<CrossingPoint> pts;
  for (double x : linspace(-0.015, 0.015, 31)) {
    pts.push_back({x, crossing_branch(g, slope, x0, wm, x, +1)});
    pts.push_back({x, crossing_branch(g, slope, x0, wm, x, -1)});
  }
  const AvoidedCrossingFit f = fit_avoided_crossing(pts);
  EXPECT_NEAR(f.g / g, 1.0, 1e-4);
  EXPECT_NEAR(f.slope / slope, 1.0, 1e-4);
  EXPECT_NEAR(f.x0, x0, 1e-6);
  // Minimum gap of the branch formula is 2g.
  EXPECT_NEAR(crossing_branch(g, slope, x0, wm, x0, 1) - crossing_branch(g, slope, x0, wm, x0, -1), 2 * g, 1e-9 * g);
  // Branch labels do not matter.
  std::reverse(pts.begin(), pts.end());
  const AvoidedCrossingFit r = fit_avoided_crossing(pts);
  EXPECT_NEAR(r.g / f.g, 1.0, 1e-6);
}

TEST(AvoidedCrossing, ZeroCouplingWithinSigma) {
  const double slope = 0.3e9;
  const double wm = angular(4.7667e9);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, angular(20e3));
  std::vector<CrossingPoint> pts;
  for (double x : linspace(-0.015, 0.015, 31)) {
    pts.push_back({x, crossing_branch(0.0, slope, 0.001, wm, x, +1) + n(rng)});
    pts.push_back({x, crossing_branch(0.0, slope, 0.001, wm, x, -1) + n(rng)});
  }
  const AvoidedCrossingFit f = fit_avoided_crossing(pts);
  EXPECT_LE(f.g, 2.0 * f.sigma_g + angular(20e3));
}

TEST(AvoidedCrossing, SingleBranchIsUnidentifiable) {
  std::vector<CrossingPoint> pts;
  for (double x : linspace(-0.015, 0.015, 31)) {
    pts.push_back({x, crossing_branch(angular(0.5e6), 0.3e9, 0.0, angular(4.7e9), x, +1)});
  }
  try {
    fit_avoided_crossing(pts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnidentifiable);
  }
}

TEST(Fringes, NoiselessRecovery) {
  const double f = 20.371e6;
  const auto t = linspace(0.0, 2e-6, 401);
  std::vector<double> y;
  for (double x : t) y.push_back(0.5 + 0.45 * std::exp(-x / 3e-6) * std::cos(kTwoPi * f * x + 0.3));
  const FringeFit r = fit_fringes(t, y);
  EXPECT_NEAR(r.frequency / f, 1.0, 1e-6);
  EXPECT_NEAR(r.decay / 3e-6, 1.0, 1e-4);
  EXPECT_NEAR(r.phase, 0.3, 1e-5);
}

TEST(Fringes, ZeroAmplitude) {
  const auto t = linspace(0.0, 2e-6, 101);
  const FringeFit r = fit_fringes(t, std::vector<double>(101, 0.4));
  EXPECT_EQ(r.amplitude, 0.0);
  EXPECT_FALSE(r.frequency_identifiable);
}

TEST(Fringes, Undersampled) {
  const auto t = linspace(0.0, 1e-6, 64);
  std::vector<double> y;
  for (double x : t) y.push_back(std::cos(kTwoPi * 1e6 * x));
  try {
    fit_fringes(t, y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndersampled);
  }
}

TEST(Fringes, CovarianceMatchesScatter) {
  const double f = 2e6;
  const auto t = linspace(0.0, 4e-6, 201);
  std::vector<double> freqs;
  double sigma_sum = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(static_cast<unsigned long long>(seed));
    std::normal_distribution<double> n(0.0, 0.01);
    std::vector<double> y;
    for (double x : t) y.push_back(0.5 + 0.4 * std::exp(-x / 3e-6) * std::cos(kTwoPi * f * x) + n(rng));
    const FringeFit r = fit_fringes(t, y);
    freqs.push_back(r.frequency);
    sigma_sum += r.sigma_frequency;
  }
  double mean = 0.0;
  for (double v : freqs) mean += v;
  mean /= 100.0;
  double var = 0.0;
  for (double v : freqs) var += (v - mean) * (v - mean);
  const double scatter = std::sqrt(var / 99.0);
  EXPECT_NEAR(sigma_sum / 100.0 / scatter, 1.0, 0.3);
}

TEST(ModelSelection, PrefersExponential) {
  const auto t = linspace(0.0, 3.0, 40);
  int ok = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(static_cast<unsigned long long>(seed));
    std::normal_distribution<double> n(0.0, 0.1);
    std::vector<double> y;
    for (double x : t) y.push_back(std::exp(-x) + n(rng));
    if (select_decay_model(t, y) == DecayShape::kExponential) ++ok;
  }
  EXPECT_GE(ok, 95);
}

TEST(PowerLaw, SlopeRecovery) {
  std::vector<double> w;
  std::vector<double> s;
  for (int i = 1; i < 2000; ++i) {
    w.push_back(0.01 * i);
    s.push_back(3.0 / std::pow(0.01 * i, 1.3));
  }
  const PowerLawFit f = fit_power_law(w, s, 0.02, 19.0);
  EXPECT_NEAR(f.alpha, 1.3, 1e-9);
}

TEST(Lorentzian, KneeRecovery) {
  std::vector<double> w;
  std::vector<double> s;
  for (int i = 1; i < 5000; ++i) {
    w.push_back(1e-3 * i);
    s.push_back(2.0 * 0.05 / (0.05 * 0.05 + w.back() * w.back()) + 1e-3);
  }
  const LorentzianFit f = fit_lorentzian(w, s);
  EXPECT_NEAR(f.gamma1 / 0.05, 1.0, 0.02);
}

}  // namespace
}  // namespace cqad::fitkit
