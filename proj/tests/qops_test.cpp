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

#include "cqad/qops.hpp"

namespace cqad::qops {
namespace {

Mat random_density(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

TEST(Annihilation, QubitLowering) {
  Mat b = annihilation(2).matrix();
  EXPECT_EQ(b(0, 1), cplx(1.0));
  EXPECT_EQ(b(0, 0), cplx(0.0));
  EXPECT_EQ(b(1, 0), cplx(0.0));
  EXPECT_EQ(b(1, 1), cplx(0.0));
}

TEST(Annihilation, FockLadder) {
  Mat b = annihilation(3).matrix();
  EXPECT_NEAR(b(1, 2).real(), std::sqrt(2.0), 1e-15);
}

TEST(Annihilation, CommutatorCornerDefect) {
  const int d = 6;
  Mat b = annihilation(d).matrix();
  Mat c = b * b.adjoint() - b.adjoint() * b;
  Mat expected = Mat::Identity(d, d);
  expected(d - 1, d - 1) = 1.0 - d;
  EXPECT_LT((c - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Annihilation, NumberEigenstates) {
  const int d = 8;
  Mat b = annihilation(d).matrix();
  Mat n = b.adjoint() * b;
  for (int k = 0; k < d; ++k) {
    Vec v = basis(d, k);
    EXPECT_LT((n * v - static_cast<double>(k) * v).norm(), 1e-12);
  }
}

TEST(Annihilation, RejectsSmallDimension) {
  try {
    annihilation(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidDimension);
  }
}

TEST(CompositeSpace, Invariants) {
  CompositeSpace s{{"qubit", 2}, {"mech", 3}, {"tls0", 2}};
  EXPECT_EQ(s.total_dim(), 12);
  EXPECT_EQ(s.index_of("mech"), 1u);
  EXPECT_THROW(CompositeSpace({{"a", 2}, {"a", 2}}), Error);
  EXPECT_THROW(CompositeSpace({{"a", 1}}), Error);
  EXPECT_THROW(CompositeSpace({{"a", 100}, {"b", 100}}), Error);
  EXPECT_NO_THROW(CompositeSpace({{"a", 100}, {"b", 100}}, 10000));
}

TEST(Embed, PauliZOnQubitOuter) {
  CompositeSpace s{{"qubit", 2}, {"mech", 3}};
  Mat z = Mat::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  Mat e = embed(z, s, "qubit").matrix();
  Eigen::VectorXd expected(6);
  expected << 1, 1, 1, -1, -1, -1;
  EXPECT_LT((e.diagonal().real() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((e - Mat(e.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Embed, IdentityAndCommutation) {
  CompositeSpace s{{"qubit", 2}, {"mech", 4}};
  EXPECT_LT((embed(identity(4), s, "mech").matrix() - Mat::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-15);
  Operator b = embed(annihilation(4), s, "mech");
  Operator sp = embed(creation(2), s, "qubit");
  EXPECT_LT(((b * sp) - (sp * b)).matrix().cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Embed, Homomorphism) {
  CompositeSpace s{{"a", 3}, {"b", 2}, {"c", 4}};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Mat A(4, 4), B(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      A(i, j) = cplx(g(rng), g(rng));
      B(i, j) = cplx(g(rng), g(rng));
    }
  Mat lhs = embed(Mat(A * B), s, "c").matrix();
  Mat rhs = embed(A, s, "c").matrix() * embed(B, s, "c").matrix();
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Embed, Errors) {
  CompositeSpace s{{"qubit", 2}, {"mech", 3}};
  EXPECT_THROW(embed(annihilation(4), s, "mech"), Error);
  EXPECT_THROW(embed(annihilation(2), s, "nope"), Error);
}

TEST(PartialTrace, ProductState) {
  CompositeSpace s{{"qubit", 2}, {"mech", 3}};
  std::mt19937_64 rng(1);
  Mat rq = random_density(2, rng);
  Mat rm = random_density(3, rng);
  DensityMatrix rho = product_state(s, {rq, rm});
  EXPECT_LT((partial_trace(rho, {"qubit"}).matrix() - rq).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((partial_trace(rho, {"mech"}).matrix() - rm).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PartialTrace, BellState) {
  CompositeSpace s{{"a", 2}, {"b", 2}};
  Vec psi = Vec::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  DensityMatrix rho = DensityMatrix::pure(s, psi);
  EXPECT_LT((partial_trace(rho, {"a"}).matrix() - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PartialTrace, RandomStatesPreserveTraceAndPositivity) {
  CompositeSpace s{{"q", 3}, {"m", 4}, {"t", 2}};
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    DensityMatrix rho(s, random_density(24, rng));
    for (const auto& keep : std::vector<std::vector<std::string>>{{"q"}, {"m"}, {"t"}, {"q", "t"}, {"m", "t"}}) {
      DensityMatrix r = partial_trace(rho, keep);
      EXPECT_NEAR(r.trace(), 1.0, 1e-12);
      EXPECT_GT(r.min_eigenvalue(), -1e-12);
    }
  }
  EXPECT_THROW(partial_trace(DensityMatrix(s, random_density(24, rng)), {}), Error);
}

TEST(Expect, Basics) {
  CompositeSpace m = CompositeSpace::single(5, "mode");
  DensityMatrix vac = DensityMatrix::pure(m, basis(5, 0));
  EXPECT_NEAR(std::abs(expect(number(5), vac)), 0.0, 1e-15);

  CompositeSpace q = CompositeSpace::single(2, "mode");
  Mat sz = Mat::Zero(2, 2);
  sz(0, 0) = -1.0;
  sz(1, 1) = 1.0;
  DensityMatrix e = DensityMatrix::pure(q, basis(2, 1));
  EXPECT_NEAR(expect(Operator(q, sz), e).real(), 1.0, 1e-15);
}

TEST(Expect, CoherentStateNumber) {
  const int d = 30;
  const cplx alpha(1.2, -0.7);
  CompositeSpace m = CompositeSpace::single(d);
  DensityMatrix rho = DensityMatrix::pure(m, coherent_state(d, alpha));
  const cplx n = expect(number(d), rho);
  EXPECT_NEAR(n.real(), std::norm(alpha), 1e-9);
  EXPECT_NEAR(n.imag(), 0.0, 1e-10);
  // Displacement operator applied to vacuum gives the same state.
  Vec v = displacement(d, alpha) * basis(d, 0);
  EXPECT_NEAR(std::abs(v.dot(coherent_state(d, alpha))), 1.0, 1e-9);
}

TEST(Expect, SpaceMismatch) {
  DensityMatrix rho = DensityMatrix::pure(CompositeSpace::single(3, "a"), basis(3, 0));
  EXPECT_THROW(expect(number(3) * cplx(1.0), DensityMatrix::pure(CompositeSpace::single(3, "b"), basis(3, 0))), Error);
  (void)rho;
}

TEST(DensityMatrix, Validation) {
  CompositeSpace s = CompositeSpace::single(2);
  Mat bad = Mat::Zero(2, 2);
  bad(0, 0) = 1.2;
  bad(1, 1) = -0.2;
  EXPECT_THROW(DensityMatrix(s, bad), Error);
  Mat nonherm = Mat::Identity(2, 2) * 0.5;
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix(s, nonherm), Error);
}

}  // namespace
}  // namespace cqad::qops
