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
#include <vector>

#include "cqad/common.hpp"

namespace cqad::noisekit {

// Frequency offset switching between +nu and -nu; each state is left at rate gamma.
// The autocorrelation is nu^2 exp(-2 gamma |t|).
struct Telegrapher {
  double nu = 0.0;
  double gamma = 1.0;
  int state0 = 1;

  void validate() const;
};

// Members drawn from P(nu, gamma) ~ 1/(gamma nu^2) on [nu_min, inf) x [gamma_min, gamma_max].
// xi is the Ramsey normalization in x_R(t) = -t xi ln(gamma_max / gamma_min).
struct FluctuatorEnsemble {
  std::vector<Telegrapher> members;
  double xi = 0.0;
  double gamma_min = 1e-3;
  double gamma_max = 1e5;
  double nu_min = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  double max_rate() const;
  double log_ratio() const;
};

// gamma log-uniform, nu = nu_min / U, random initial signs; xi calibrated with calibrate_xi.
FluctuatorEnsemble sample_ensemble(int count, double nu_min, double gamma_min, double gamma_max,
                                   std::uint64_t seed);
// Number of members whose phase-space density corresponds to the Ramsey rate `rate`
// under the small-coupling estimate rate = (pi/2) N nu_min.
int members_for_rate(double rate, double nu_min);

enum class DecayKind { kRamsey, kEcho };

// Exact switching-averaged coherence <exp(i phi(t))> of one member in the stationary state.
cplx telegraph_coherence(const Telegrapher& m, double t, DecayKind kind);
// Product over members.
cplx ensemble_coherence(const FluctuatorEnsemble& e, double t, DecayKind kind);
// 1/e time of |ensemble_coherence|, bracketed on [t_lo, t_hi].
double coherence_time(const FluctuatorEnsemble& e, DecayKind kind, double t_lo, double t_hi);
// Sets xi from the exact Ramsey 1/e time. Returns the calibrated value.
double calibrate_xi(FluctuatorEnsemble& e);

// Rescales every amplitude (and nu_min) until the exact Ramsey 1/e time equals t2, then
// recalibrates xi. Returns the overall scale factor.
double scale_to_ramsey_time(FluctuatorEnsemble& e, double t2);

// Piecewise-constant offset sampled at t_i = i dt, i = 0..floor(duration/dt).
std::vector<double> sample_trajectory(const Telegrapher& m, double duration, double dt,
                                      std::uint64_t seed);
std::vector<double> sample_trajectory(const FluctuatorEnsemble& e, double duration, double dt,
                                      std::uint64_t seed);

// Phase integral of one switching history, int_0^t offset dt', at each query time
// (any order), with stationary random initial states.
std::vector<double> accumulated_phase(const FluctuatorEnsemble& e, const std::vector<double>& times,
                                      std::uint64_t seed);

// Monte-Carlo <exp(i phi)> over n_traj switching histories with stationary initial states.
// Echo phases use a refocusing flip at t/2.
std::vector<cplx> monte_carlo_coherence(const FluctuatorEnsemble& e,
                                        const std::vector<double>& times, DecayKind kind,
                                        int n_traj, std::uint64_t seed, unsigned workers = 1);

double psd_lorentzian(double gamma1, double omega);

enum class SpectrumKind { kWhite, kOneOverF, kLorentzian, kTabulated };

// Two-sided in omega with integral over all omega equal to the variance.
struct SpectralDensity {
  SpectrumKind kind = SpectrumKind::kWhite;
  double S0 = 0.0;
  double A = 0.0;
  double gamma1 = 0.0;
  double weight = 1.0;
  std::vector<double> omega;
  std::vector<double> values;

  static SpectralDensity white(double s0);
  static SpectralDensity one_over_f(double a);
  static SpectralDensity lorentzian(double gamma1, double weight);
  static SpectralDensity tabulated(std::vector<double> omega, std::vector<double> values);

  double operator()(double w) const;
  // Integral over [-omega_max, omega_max] of the tabulated data.
  double integral() const;
  void write_csv(std::ostream& os) const;
};

struct PsdOptions {
  // Samples per segment; 0 chooses the largest power of two giving at least 8 segments.
  int segment = 0;
  bool hann = false;
};

// Mean-subtracted segment-averaged periodogram with 50% overlap, omega in [0, pi/dt].
SpectralDensity psd_estimate(const std::vector<double>& series, double dt,
                             const PsdOptions& options = {});

// Gaussian noise with two-sided PSD A/|omega|^alpha, generated by spectral shaping.
std::vector<double> synthesize_power_law(std::size_t n, double dt, double alpha, double a,
                                         std::uint64_t seed);

// x(t) = -t^2/2 int dw S(w) F(w t) with F = sinc^2(wt/2) (Ramsey) or
// sin^2(wt/4) sinc^2(wt/4) (echo); the spectrum is cut below omega_ir.
double gaussian_decay(const SpectralDensity& S, double t, DecayKind kind, double omega_ir = 0.0);

struct DecayPrediction {
  DecayKind kind = DecayKind::kRamsey;
  double ramsey_rate = 0.0;
  double t2_ramsey = 0.0;
  double t2_echo = 0.0;
  double efficiency = 0.0;
  // False when gamma_max * t2_echo <= 1.
  bool echo_valid = true;
  double xi = 0.0;
  double gamma_max = 0.0;

  double log_amplitude(double t) const;
};

DecayPrediction ensemble_decay_predict(const FluctuatorEnsemble& e, DecayKind kind);
DecayPrediction ensemble_decay_predict(double xi, double gamma_min, double gamma_max,
                                       DecayKind kind);

// sum_k g^2 G1 / ((k delta + delta0)^2 + (G1/2)^2) over all integers k.
double resonant_tls_loss(double g, double delta, double delta0, double gamma1_tls,
                         double gamma_phi_tls = 0.0);
// Direct sum over |k| <= k_max plus the trigamma remainder of the tails.
double resonant_tls_loss_sum(double g, double delta, double delta0, double gamma1_tls,
                             double gamma_phi_tls = 0.0, long k_max = 1000000);

struct ResonantTls {
  double g = 0.0;
  double omega = 0.0;
  double gamma1 = 0.0;
  double gamma_phi = 0.0;
};

// sum_j 2 g^2 G2 / ((w_j - w_m)^2 + G2^2) tanh(hbar w_j / 2 kB T), G2 = G1/2 + Gphi; T = 0 allowed.
double resonant_tls_loss(const std::vector<ResonantTls>& tls, double omega_m, double temperature);

struct RelaxingTls {
  double g_long = 0.0;
  double omega = 0.0;
  double gamma1 = 0.0;
};

// sum 2 g_l^2 / w_m * hbar G1 / (kB T) * sech^2(hbar w / 2 kB T).
double relaxation_damping(const std::vector<RelaxingTls>& tls, double omega_m, double temperature);

// N / (delta_V mean|lambda|) in GHz^-1 with lambda in Hz/V.
double tls_density_bound(double n_observed, double delta_v, double mean_abs_lambda);

}  // namespace cqad::noisekit
