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
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cqad {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kPlanck = 6.62607015e-34;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kElectronCharge = 1.602176634e-19;

enum class ErrorCode {
  kInvalidDimension,
  kUnknownLabel,
  kDimensionMismatch,
  kSpaceMismatch,
  kInvalidArgument,
  kInvalidSpec,
  kInvalidState,
  kNonHermitian,
  kIntegrationFailure,
  kPositivityViolation,
  kAmbiguousSteadyState,
  kFitFailure,
  kMaxEvaluations,
  kIllConditioned,
  kInfeasible,
  kUndersampled,
  kUnidentifiable,
  kNoTemperature,
  kDivergent,
  kTooFewSamples,
  kTimestepTooCoarse,
  kConfig,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Angular frequency in rad/s from a frequency in Hz.
constexpr double angular(double hz) { return kTwoPi * hz; }

}  // namespace cqad
