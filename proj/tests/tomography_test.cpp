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

#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cqad/tomography.hpp"
#include "reference_device.hpp"

namespace cqad::tomography {
namespace {

model::DeviceSpec single_b(int fock) {
  model::DeviceSpec d = cqad::testing::reference_device().qubit_at(1).with_mechanics({1});
  d.fock_dim = fock;
  return d;
}

qops::DensityMatrix joint_diag(const model::DeviceSpec& d, const std::vector<double>& p) {
  Mat g = Mat::Zero(2, 2);
  g(0, 0) = 1.0 - d.transmon.thermal_pop;
  g(1, 1) = d.transmon.thermal_pop;
  Mat m = Mat::Zero(d.fock_dim, d.fock_dim);
  for (std::size_t n = 0; n < p.size(); ++n) m(static_cast<int>(n), static_cast<int>(n)) = p[n];
  return qops::product_state(model::make_space(d), {g, m});
}

std::vector<double> times() {
  std::vector<double> t(101);
  for (int i = 0; i <= 100; ++i) t[static_cast<std::size_t>(i)] = 5e-6 * i / 100.0;
  return t;
}

TEST(Parity, Examples) {
  EXPECT_EQ(parity(std::vector<double>{1, 0, 0}), 1.0);
  EXPECT_EQ(parity(std::vector<double>{0, 1, 0}), -1.0);
  std::vector<double> poisson;
  for (int n = 0; n < 30; ++n) poisson.push_back(std::exp(-1.0) / std::tgamma(n + 1.0));
  EXPECT_NEAR(parity(poisson), std::exp(-2.0), 1e-12);
  EXPECT_NEAR(wigner_point(1.0), 0.6366, 1e-4);
  EXPECT_NEAR(wigner_point(-1.0), -0.6366, 1e-4);
  EXPECT_THROW(wigner_point(1.1), Error);
  EXPECT_NEAR(fock_wigner(0, 0.0), 2.0 / kPi, 1e-15);
  EXPECT_NEAR(fock_wigner(1, 0.0), -2.0 / kPi, 1e-15);
}

TEST(Wigner, PhaseAveragingLeavesFockStatesUnchanged) {
  const int d = 40;
  for (int n : {0, 1, 2, 3}) {
    Mat rho = qops::projector(d, n).matrix();
    for (double r : {0.0, 0.5, 1.2, 2.0}) {
      double avg = 0.0;
      for (int k = 0; k < 8; ++k) {
        const double w = wigner_at(rho, std::polar(r, kTwoPi * k / 8.0));
        EXPECT_NEAR(w, fock_wigner(n, r), 1e-6);
        avg += w / 8.0;
      }
      EXPECT_NEAR(avg, fock_wigner(n, r), 1e-6);
    }
  }
}

TEST(Decompose, FockOneClosedLoop) {
  const auto t = times();
  const RabiBasis basis = rabi_basis(cqad::testing::reference_device(), 1, t, 5);
  const model::DeviceSpec d = single_b(7);
  RabiTrace trace{t, simulate_rabi(d, joint_diag(d, {0, 1}), t)};
  const FockDistribution p = decompose_rabi(trace, basis);
  EXPECT_NEAR(p.p[1], 1.0, 0.02);
  for (std::size_t n = 0; n < p.p.size(); ++n) {
    if (n != 1) EXPECT_NEAR(p.p[n], 0.0, 0.02);
  }
  EXPECT_NO_THROW(p.validate());
}

TEST(Decompose, FlatTraceIsVacuum) {
  const auto t = times();
  const RabiBasis basis = rabi_basis(cqad::testing::reference_device(), 1, t, 4);
  RabiTrace trace{t, std::vector<double>(t.size(), 0.02)};
  const FockDistribution p = decompose_rabi(trace, basis);
  EXPECT_GT(p.p[0], 0.95);
}

TEST(Decompose, IdentityOnDiagonalStates) {
  const auto t = times();
  const RabiBasis basis = rabi_basis(cqad::testing::reference_device(), 1, t, 5);
  const model::DeviceSpec d = single_b(7);
  const std::vector<double> p_in = {0.45, 0.3, 0.15, 0.1};
  RabiTrace trace{t, simulate_rabi(d, joint_diag(d, p_in), t)};
  const FockDistribution p = decompose_rabi(trace, basis);
  for (std::size_t n = 0; n < p.p.size(); ++n) {
    EXPECT_NEAR(p.p[n], n < p_in.size() ? p_in[n] : 0.0, 0.02);
  }
}

TEST(Decompose, DisplacedVacuumIsPoisson) {
  const auto t = times();
  const int F = model::required_fock_dim(1.0, 1e-3);
  const RabiBasis basis = rabi_basis(cqad::testing::reference_device(), 1, t, F - 1);
  const model::DeviceSpec d = single_b(F + 4);
  const auto space = model::make_space(d);
  const Mat D = qops::embed(qops::displacement(d.fock_dim, 1.0), space, model::mech_label(0)).matrix();
  const auto vac = joint_diag(d, {1.0});
  Mat m = D * vac.matrix() * D.adjoint();
  m /= m.trace();
  const auto rho = qops::DensityMatrix(space, m);
  RabiTrace trace{t, simulate_rabi(d, rho, t), 1.0};
  const FockDistribution p = decompose_rabi(trace, basis);
  const PoissonFit f = poisson_fit(p.p);
  EXPECT_LT(f.kl, 1e-3);
  EXPECT_NEAR(f.r, 1.0, 0.03);
}

TEST(Decompose, IllConditionedBasis) {
  RabiBasis basis;
  basis.times = {0.0, 1.0, 2.0};
  basis.curves.resize(3, 2);
  basis.curves << 0.1, 0.1, 0.2, 0.2, 0.3, 0.3;
  try {
    decompose_rabi(RabiTrace{basis.times, {0.1, 0.2, 0.3}}, basis);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIllConditioned);
  }
}

WignerTomogram exact_tomogram(const std::vector<double>& p) {
  WignerTomogram t;
  t.radii = default_radii();
  for (double r : t.radii) {
    double w = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) w += p[n] * fock_wigner(static_cast<int>(n), r);
    t.w.push_back(w);
    t.sigma.push_back(0.01);
  }
  return t;
}

TEST(Reconstruct, ExactStates) {
  const Reconstruction vac = reconstruct(exact_tomogram({1.0}), 4);
  EXPECT_NEAR(vac.p[0], 1.0, 1e-3);
  const Reconstruction one = reconstruct(exact_tomogram({0.0, 1.0}), 4);
  EXPECT_GE(one.p[1], 0.99);
  double s = 0.0;
  for (double v : one.p) {
    EXPECT_GE(v, 0.0);
    s += v;
  }
  EXPECT_NEAR(s, 1.0, 1e-14);
  EXPECT_EQ(one.resamples, 200);
  EXPECT_GT(one.sigma[1], 0.0);
  EXPECT_NE(one.to_json().find("\"resamples\": 200"), std::string::npos);
}

TEST(Reconstruct, TooFewRadii) {
  WignerTomogram t = exact_tomogram({1.0});
  t.radii.resize(3);
  t.w.resize(3);
  t.sigma.resize(3);
  EXPECT_THROW(reconstruct(t, 4), Error);
}

TEST(Fidelity, Examples) {
  EXPECT_DOUBLE_EQ(fidelity(std::vector<double>{0, 1, 0}, qops::basis(3, 1)), 1.0);
  EXPECT_NEAR(fidelity(std::vector<double>{0.5, 0.25, 0.25}, qops::basis(3, 1)), 0.5, 1e-15);
}

TEST(Bootstrap, SigmaScalesAsInverseRootN) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> ln_n;
  std::vector<double> ln_s;
  for (int n : {100, 400, 1600, 6400}) {
    std::vector<double> data(static_cast<std::size_t>(n));
    for (double& v : data) v = g(rng);
    ln_n.push_back(std::log(n));
    ln_s.push_back(std::log(bootstrap_mean_sigma(data, 400, 7)));
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < ln_n.size(); ++i) {
    mx += ln_n[i] / 4.0;
    my += ln_s[i] / 4.0;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < ln_n.size(); ++i) {
    sxy += (ln_n[i] - mx) * (ln_s[i] - my);
    sxx += (ln_n[i] - mx) * (ln_n[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, -0.5, 0.05);
}

TEST(Pipeline, IdealDisplacementOfFockOne) {
  const model::DeviceSpec d = single_b(4);
  PipelineOptions o;
  o.ideal_displacement = true;
  o.radii = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
  o.reconstruct_max_fock = 3;
  const PipelineResult r = run_pipeline(cqad::testing::reference_device(), 1, joint_diag(d, {0, 1}), o);
  EXPECT_LT(r.tomogram.w[0], -0.55);
  EXPECT_GT(r.reconstruction.p[1], 0.9);
  EXPECT_NO_THROW(r.tomogram.validate());
}

TEST(Pipeline, DrivenDisplacementCalibration) {
  const model::DeviceSpec d = single_b(8);
  PipelineOptions o;
  for (double r : {0.5, 1.0}) {
    const double eps = r / (2e-6 * std::sqrt(kTwoPi) * std::erf(std::sqrt(2.0)));
    EXPECT_NEAR(calibrate_displacement(d, eps, o), r, 0.1 * r);
  }
}

}  // namespace
}  // namespace cqad::tomography
