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
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cqad/common.hpp"

namespace cqad::qops {

inline constexpr std::size_t kDefaultDimensionCap = 4096;

// Ordered tensor-product space. Factor order is declaration order.
class CompositeSpace {
 public:
  CompositeSpace() = default;
  CompositeSpace(std::vector<std::string> labels, std::vector<int> dims,
                 std::size_t cap = kDefaultDimensionCap);
  CompositeSpace(std::initializer_list<std::pair<std::string, int>> factors,
                 std::size_t cap = kDefaultDimensionCap);

  static CompositeSpace single(int dim, std::string label = "mode");

  std::size_t num_factors() const { return dims_.size(); }
  int total_dim() const { return total_; }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<std::string>& labels() const { return labels_; }
  bool contains(std::string_view label) const;
  std::size_t index_of(std::string_view label) const;
  int dim(std::string_view label) const { return dims_[index_of(label)]; }

  // Factors kept in declaration order.
  CompositeSpace subspace(const std::vector<std::string>& keep) const;

  bool operator==(const CompositeSpace& other) const {
    return dims_ == other.dims_ && labels_ == other.labels_;
  }
  bool operator!=(const CompositeSpace& other) const { return !(*this == other); }

 private:
  std::vector<std::string> labels_;
  std::vector<int> dims_;
  int total_ = 1;
};

class Operator {
 public:
  Operator() = default;
  Operator(CompositeSpace space, Mat matrix);

  const CompositeSpace& space() const { return space_; }
  const Mat& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  Operator adjoint() const { return Operator(space_, matrix_.adjoint()); }
  bool is_hermitian(double tol = 1e-12) const;

  Operator operator+(const Operator& o) const;
  Operator operator-(const Operator& o) const;
  Operator operator*(const Operator& o) const;
  Operator operator*(cplx s) const { return Operator(space_, matrix_ * s); }
  Operator& operator+=(const Operator& o);

 private:
  CompositeSpace space_;
  Mat matrix_;
};

inline Operator operator*(cplx s, const Operator& op) { return op * s; }

class DensityMatrix {
 public:
  DensityMatrix() = default;
  // Validates Hermiticity (1e-10), unit trace (1e-9) and eigenvalues >= -1e-9.
  DensityMatrix(CompositeSpace space, Mat matrix);

  static DensityMatrix pure(const CompositeSpace& space, const Vec& psi);
  // Skips validation; for internal propagation where checks run separately.
  static DensityMatrix unchecked(CompositeSpace space, Mat matrix);

  const CompositeSpace& space() const { return space_; }
  const Mat& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  double trace() const { return matrix_.trace().real(); }
  double purity() const;
  double min_eigenvalue() const;
  void validate() const;

 private:
  CompositeSpace space_;
  Mat matrix_;
};

// Lindblad jump operator L with rate gamma, contributing gamma (L rho L^dag - {L^dag L, rho}/2).
struct Dissipator {
  Operator op;
  double rate = 0.0;
  std::string label;
};

// Truncated Fock lowering operator, entry (n-1, n) = sqrt(n).
Operator annihilation(int dim);
Operator creation(int dim);
Operator number(int dim);
Operator identity(int dim);
Operator identity(const CompositeSpace& space);
// Projector |n><n| on a single factor of dimension dim.
Operator projector(int dim, int n);

// Identity on every factor except target.
Operator embed(const Operator& op, const CompositeSpace& space, std::string_view target);
Operator embed(const Mat& local, const CompositeSpace& space, std::string_view target);

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep);
Mat partial_trace(const Mat& rho, const CompositeSpace& space,
                  const std::vector<std::string>& keep);

cplx expect(const Operator& op, const DensityMatrix& rho);

Mat kron(const Mat& a, const Mat& b);

// Basis vector |n> of dimension dim.
Vec basis(int dim, int n);
// Product state of per-factor local density matrices in declaration order.
DensityMatrix product_state(const CompositeSpace& space, const std::vector<Mat>& locals);
// Bose-Einstein state with mean occupation nth, renormalized after truncation.
Mat thermal_state(int dim, double nth);
// Coherent state from the truncated displacement series; renormalized.
Vec coherent_state(int dim, cplx alpha);
// Displacement exp(alpha b^dag - alpha* b) computed in an enlarged space then truncated.
Mat displacement(int dim, cplx alpha);

}  // namespace cqad::qops
