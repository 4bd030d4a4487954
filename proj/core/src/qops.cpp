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

#include "cqad/qops.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <unsupported/Eigen/MatrixFunctions>

namespace cqad {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDimension: return "invalid-dimension";
    case ErrorCode::kUnknownLabel: return "unknown-label";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kSpaceMismatch: return "space-mismatch";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kInvalidState: return "invalid-state";
    case ErrorCode::kNonHermitian: return "non-hermitian";
    case ErrorCode::kIntegrationFailure: return "integration-failure";
    case ErrorCode::kPositivityViolation: return "positivity-violation";
    case ErrorCode::kAmbiguousSteadyState: return "ambiguous-steady-state";
    case ErrorCode::kFitFailure: return "fit-failure";
    case ErrorCode::kMaxEvaluations: return "max-eval-exceeded";
    case ErrorCode::kIllConditioned: return "ill-conditioned";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kUndersampled: return "undersampled";
    case ErrorCode::kUnidentifiable: return "unidentifiable";
    case ErrorCode::kNoTemperature: return "no-temperature";
    case ErrorCode::kDivergent: return "divergent";
    case ErrorCode::kTooFewSamples: return "too-few-samples";
    case ErrorCode::kTimestepTooCoarse: return "dt-too-coarse";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace cqad

namespace cqad::qops {

CompositeSpace::CompositeSpace(std::vector<std::string> labels, std::vector<int> dims,
                               std::size_t cap)
    : labels_(std::move(labels)), dims_(std::move(dims)) {
  if (labels_.size() != dims_.size() || dims_.empty()) {
    throw Error(ErrorCode::kInvalidDimension, "labels and dims must be nonempty and equal length");
  }
  std::set<std::string> seen;
  std::size_t total = 1;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] < 2) {
      throw Error(ErrorCode::kInvalidDimension,
                  "factor '" + labels_[i] + "' has dimension " + std::to_string(dims_[i]));
    }
    if (!seen.insert(labels_[i]).second) {
      throw Error(ErrorCode::kInvalidDimension, "duplicate label '" + labels_[i] + "'");
    }
    total *= static_cast<std::size_t>(dims_[i]);
    if (total > cap) {
      throw Error(ErrorCode::kInvalidDimension,
                  "total dimension exceeds cap " + std::to_string(cap));
    }
  }
  total_ = static_cast<int>(total);
}

CompositeSpace::CompositeSpace(std::initializer_list<std::pair<std::string, int>> factors,
                               std::size_t cap)
    : CompositeSpace(
          [&] {
            std::vector<std::string> l;
            for (const auto& f : factors) l.push_back(f.first);
            return l;
          }(),
          [&] {
            std::vector<int> d;
            for (const auto& f : factors) d.push_back(f.second);
            return d;
          }(),
          cap) {}

CompositeSpace CompositeSpace::single(int dim, std::string label) {
  return CompositeSpace(std::vector<std::string>{std::move(label)}, std::vector<int>{dim});
}

bool CompositeSpace::contains(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t CompositeSpace::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw Error(ErrorCode::kUnknownLabel, "no factor labeled '" + std::string(label) + "'");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

CompositeSpace CompositeSpace::subspace(const std::vector<std::string>& keep) const {
  if (keep.empty()) throw Error(ErrorCode::kInvalidArgument, "empty keep set");
  for (const auto& k : keep) index_of(k);
  std::vector<std::string> l;
  std::vector<int> d;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (std::find(keep.begin(), keep.end(), labels_[i]) != keep.end()) {
      l.push_back(labels_[i]);
      d.push_back(dims_[i]);
    }
  }
  return CompositeSpace(l, d);
}

Operator::Operator(CompositeSpace space, Mat matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "operator matrix is not square");
  }
  if (matrix_.rows() != space_.total_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "operator dimension " + std::to_string(matrix_.rows()) +
                    " does not match space dimension " + std::to_string(space_.total_dim()));
  }
}

bool Operator::is_hermitian(double tol) const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

namespace {
void require_same(const CompositeSpace& a, const CompositeSpace& b) {
  if (a != b) throw Error(ErrorCode::kSpaceMismatch, "operands live on different spaces");
}
}  // namespace

Operator Operator::operator+(const Operator& o) const {
  require_same(space_, o.space_);
  return Operator(space_, matrix_ + o.matrix_);
}

Operator Operator::operator-(const Operator& o) const {
  require_same(space_, o.space_);
  return Operator(space_, matrix_ - o.matrix_);
}

Operator Operator::operator*(const Operator& o) const {
  require_same(space_, o.space_);
  return Operator(space_, matrix_ * o.matrix_);
}

Operator& Operator::operator+=(const Operator& o) {
  require_same(space_, o.space_);
  matrix_ += o.matrix_;
  return *this;
}

DensityMatrix::DensityMatrix(CompositeSpace space, Mat matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  validate();
}

DensityMatrix DensityMatrix::unchecked(CompositeSpace space, Mat matrix) {
  DensityMatrix rho;
  rho.space_ = std::move(space);
  rho.matrix_ = std::move(matrix);
  return rho;
}

DensityMatrix DensityMatrix::pure(const CompositeSpace& space, const Vec& psi) {
  if (psi.size() != space.total_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "state vector length does not match space");
  }
  Vec n = psi / psi.norm();
  return DensityMatrix(space, n * n.adjoint());
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(matrix_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate() const {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != space_.total_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "density matrix dimension does not match space");
  }
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorCode::kInvalidState, "density matrix is not Hermitian");
  }
  if (std::abs(matrix_.trace() - cplx(1.0)) > 1e-9) {
    throw Error(ErrorCode::kInvalidState, "density matrix trace is not 1");
  }
  if (min_eigenvalue() < -1e-9) {
    throw Error(ErrorCode::kInvalidState, "density matrix has a negative eigenvalue");
  }
}

Operator annihilation(int dim) {
  if (dim < 2) throw Error(ErrorCode::kInvalidDimension, "dim must be >= 2");
  Mat b = Mat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(CompositeSpace::single(dim), b);
}

Operator creation(int dim) { return annihilation(dim).adjoint(); }

Operator number(int dim) {
  if (dim < 2) throw Error(ErrorCode::kInvalidDimension, "dim must be >= 2");
  Mat n = Mat::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return Operator(CompositeSpace::single(dim), n);
}

Operator identity(int dim) {
  if (dim < 2) throw Error(ErrorCode::kInvalidDimension, "dim must be >= 2");
  return Operator(CompositeSpace::single(dim), Mat::Identity(dim, dim));
}

Operator identity(const CompositeSpace& space) {
  return Operator(space, Mat::Identity(space.total_dim(), space.total_dim()));
}

Operator projector(int dim, int n) {
  if (dim < 2) throw Error(ErrorCode::kInvalidDimension, "dim must be >= 2");
  if (n < 0 || n >= dim) throw Error(ErrorCode::kInvalidArgument, "level outside dimension");
  Mat p = Mat::Zero(dim, dim);
  p(n, n) = 1.0;
  return Operator(CompositeSpace::single(dim), p);
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator embed(const Mat& local, const CompositeSpace& space, std::string_view target) {
  const std::size_t t = space.index_of(target);
  if (local.rows() != space.dims()[t] || local.cols() != space.dims()[t]) {
    throw Error(ErrorCode::kDimensionMismatch,
                "operator dimension does not match factor '" + std::string(target) + "'");
  }
  int outer = 1;
  int inner = 1;
  for (std::size_t i = 0; i < t; ++i) outer *= space.dims()[i];
  for (std::size_t i = t + 1; i < space.num_factors(); ++i) inner *= space.dims()[i];
  Mat m = kron(Mat::Identity(outer, outer), kron(local, Mat::Identity(inner, inner)));
  return Operator(space, std::move(m));
}

Operator embed(const Operator& op, const CompositeSpace& space, std::string_view target) {
  return embed(op.matrix(), space, target);
}

Mat partial_trace(const Mat& rho, const CompositeSpace& space,
                  const std::vector<std::string>& keep) {
  const CompositeSpace sub = space.subspace(keep);
  const auto& dims = space.dims();
  const std::size_t nf = dims.size();
  std::vector<bool> kept(nf, false);
  for (const auto& k : keep) kept[space.index_of(k)] = true;

  std::vector<int> stride(nf, 1);
  for (int i = static_cast<int>(nf) - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

  const int dk = sub.total_dim();
  int dt = 1;
  for (std::size_t i = 0; i < nf; ++i)
    if (!kept[i]) dt *= dims[i];

  // Maps (kept index, traced index) to a full index.
  auto full_index = [&](int k, int r) {
    int idx = 0;
    for (int i = static_cast<int>(nf) - 1; i >= 0; --i) {
      if (kept[i]) {
        idx += (k % dims[i]) * stride[i];
        k /= dims[i];
      } else {
        idx += (r % dims[i]) * stride[i];
        r /= dims[i];
      }
    }
    return idx;
  };

  Mat out = Mat::Zero(dk, dk);
  for (int a = 0; a < dk; ++a) {
    for (int b = 0; b < dk; ++b) {
      cplx s = 0.0;
      for (int r = 0; r < dt; ++r) s += rho(full_index(a, r), full_index(b, r));
      out(a, b) = s;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep) {
  CompositeSpace sub = rho.space().subspace(keep);
  return DensityMatrix::unchecked(sub, partial_trace(rho.matrix(), rho.space(), keep));
}

cplx expect(const Operator& op, const DensityMatrix& rho) {
  if (op.space() != rho.space()) {
    throw Error(ErrorCode::kSpaceMismatch, "operator and state live on different spaces");
  }
  return (op.matrix() * rho.matrix()).trace();
}

Vec basis(int dim, int n) {
  if (n < 0 || n >= dim) throw Error(ErrorCode::kInvalidArgument, "level outside dimension");
  Vec v = Vec::Zero(dim);
  v(n) = 1.0;
  return v;
}

DensityMatrix product_state(const CompositeSpace& space, const std::vector<Mat>& locals) {
  if (locals.size() != space.num_factors()) {
    throw Error(ErrorCode::kDimensionMismatch, "one local state per factor required");
  }
  Mat m = locals[0];
  for (std::size_t i = 1; i < locals.size(); ++i) m = kron(m, locals[i]);
  return DensityMatrix(space, m);
}

Mat thermal_state(int dim, double nth) {
  if (nth < 0) throw Error(ErrorCode::kInvalidArgument, "negative thermal occupation");
  Mat rho = Mat::Zero(dim, dim);
  if (nth == 0.0) {
    rho(0, 0) = 1.0;
    return rho;
  }
  const double q = nth / (1.0 + nth);
  double sum = 0.0;
  for (int n = 0; n < dim; ++n) {
    const double p = std::pow(q, n);
    rho(n, n) = p;
    sum += p;
  }
  return rho / sum;
}

Vec coherent_state(int dim, cplx alpha) {
  Vec v(dim);
  cplx term = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < dim; ++n) {
    v(n) = term;
    term *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return v / v.norm();
}

Mat displacement(int dim, cplx alpha) {
  const int big = dim + 40 + static_cast<int>(4.0 * std::norm(alpha));
  Mat b = annihilation(big).matrix();
  Mat gen = alpha * b.adjoint() - std::conj(alpha) * b;
  Mat d = gen.exp();
  return d.topLeftCorner(dim, dim);
}

}  // namespace cqad::qops
