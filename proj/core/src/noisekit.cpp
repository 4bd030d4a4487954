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


#include "cqad/noisekit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <unsupported/Eigen/FFT>

#include "cqad/parallel.hpp"

namespace cqad::noisekit {

namespace {

using Mat2 = Eigen::Matrix2cd;

// exp(-gamma tau) exp(K tau) with K = [[s i nu, gamma], [gamma, -s i nu]].
Mat2 telegraph_step(double nu, double gamma, double tau, int s) {
  Mat2 K;
  K << cplx(0.0, s * nu), gamma, gamma, cplx(0.0, -s * nu);
  const cplx mu = std::sqrt(cplx(gamma * gamma - nu * nu, 0.0));
  const Mat2 I = Mat2::Identity();
  if (std::abs(mu * tau) < 1e-4) {
    const cplx m2 = mu * mu * tau * tau;
    return std::exp(-gamma * tau) * ((1.0 + 0.5 * m2) * I + tau * (1.0 + m2 / 6.0) * K);
  }
  return 0.5 * std::exp((mu - gamma) * tau) * (I + K / mu) +
         0.5 * std::exp((-mu - gamma) * tau) * (I - K / mu);
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be positive");
  }
}

}  // namespace

void Telegrapher::validate() const {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kInvalidSpec, "telegrapher gamma must be positive");
  if (!std::isfinite(nu)) throw Error(ErrorCode::kInvalidSpec, "telegrapher nu not finite");
  if (state0 != 1 && state0 != -1) throw Error(ErrorCode::kInvalidSpec, "state0 must be +1 or -1");
}

void FluctuatorEnsemble::validate() const {
  if (!(gamma_min > 0.0) || !(gamma_min <= gamma_max)) {
    throw Error(ErrorCode::kInvalidSpec, "ensemble needs 0 < gamma_min <= gamma_max");
  }
  for (const auto& m : members) m.validate();
}

double FluctuatorEnsemble::max_rate() const {
  double g = 0.0;
  for (const auto& m : members) g = std::max(g, m.gamma);
  return g;
}

double FluctuatorEnsemble::log_ratio() const { return std::log(gamma_max / gamma_min); }

FluctuatorEnsemble sample_ensemble(int count, double nu_min, double gamma_min, double gamma_max,
                                   std::uint64_t seed) {
  if (count < 0) throw Error(ErrorCode::kInvalidArgument, "negative member count");
  check_positive(nu_min, "nu_min");
  FluctuatorEnsemble e;
  e.gamma_min = gamma_min;
  e.gamma_max = gamma_max;
  e.nu_min = nu_min;
  e.seed = seed;
  e.validate();
  std::mt19937_64 rng(stream_seed(seed, 0));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double lr = e.log_ratio();
  for (int k = 0; k < count; ++k) {
    Telegrapher m;
    m.gamma = gamma_min * std::exp(lr * uni(rng));
    m.nu = nu_min / (1.0 - uni(rng));
    m.state0 = uni(rng) < 0.5 ? 1 : -1;
    e.members.push_back(m);
  }
  calibrate_xi(e);
  return e;
}

int members_for_rate(double rate, double nu_min) {
  check_positive(nu_min, "nu_min");
  return static_cast<int>(std::lround(rate / (0.5 * kPi * nu_min)));
}

cplx telegraph_coherence(const Telegrapher& m, double t, DecayKind kind) {
  if (t < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative time");
  Eigen::Vector2cd p(0.5, 0.5);
  if (kind == DecayKind::kRamsey) {
    p = telegraph_step(m.nu, m.gamma, t, 1) * p;
  } else {
    p = telegraph_step(m.nu, m.gamma, 0.5 * t, 1) * p;
    p = telegraph_step(m.nu, m.gamma, 0.5 * t, -1) * p;
  }
  return p.sum();
}

cplx ensemble_coherence(const FluctuatorEnsemble& e, double t, DecayKind kind) {
  cplx c = 1.0;
  for (const auto& m : e.members) c *= telegraph_coherence(m, t, kind);
  return c;
}

double coherence_time(const FluctuatorEnsemble& e, DecayKind kind, double t_lo, double t_hi) {
  check_positive(t_lo, "t_lo");
  if (!(t_hi > t_lo)) throw Error(ErrorCode::kInvalidArgument, "empty time bracket");
  const double target = std::exp(-1.0);
  auto f = [&](double t) { return std::abs(ensemble_coherence(e, t, kind)) - target; };
  const int n = 600;
  double a = t_lo;
  double fa = f(a);
  if (fa <= 0.0) throw Error(ErrorCode::kInvalidArgument, "coherence below 1/e at t_lo");
  for (int i = 1; i <= n; ++i) {
    double b = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / n);
    const double fb = f(b);
    if (fb <= 0.0) {
      for (int it = 0; it < 200 && (b - a) > 1e-14 * b; ++it) {
        const double m = 0.5 * (a + b);
        if (f(m) > 0.0) {
          a = m;
        } else {
          b = m;
        }
      }
      return 0.5 * (a + b);
    }
    a = b;
    fa = fb;
  }
  throw Error(ErrorCode::kFitFailure, "coherence does not reach 1/e in the bracket");
}

double calibrate_xi(FluctuatorEnsemble& e) {
  if (e.members.empty() || e.log_ratio() == 0.0) {
    e.xi = 0.0;
    return 0.0;
  }
  double guess = 0.5 * kPi * e.nu_min * static_cast<double>(e.members.size());
  if (!(guess > 0.0)) {
    for (const auto& m : e.members) guess += m.nu;
  }
  const double t = coherence_time(e, DecayKind::kRamsey, 1e-6 / guess, 1e4 / guess);
  e.xi = 1.0 / (t * e.log_ratio());
  return e.xi;
}

double scale_to_ramsey_time(FluctuatorEnsemble& e, double t2) {
  check_positive(t2, "t2");
  if (e.members.empty()) throw Error(ErrorCode::kInvalidArgument, "empty ensemble");
  double total = 1.0;
  for (int it = 0; it < 30; ++it) {
    const double t = coherence_time(e, DecayKind::kRamsey, 1e-6 * t2, 1e4 * t2);
    if (std::abs(t / t2 - 1.0) < 1e-10) break;
    const double k = t / t2;
    for (auto& m : e.members) m.nu *= k;
    e.nu_min *= k;
    total *= k;
  }
  calibrate_xi(e);
  return total;
}

namespace {

std::vector<double> switching_series(const Telegrapher& m, int state, std::size_t n, double dt,
                                     std::mt19937_64& rng) {
  std::vector<double> out(n);
  std::exponential_distribution<double> dwell(m.gamma);
  double next = dwell(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    while (next <= t) {
      state = -state;
      next += dwell(rng);
    }
    out[i] = state * m.nu;
  }
  return out;
}

std::size_t sample_count(double duration, double dt) {
  check_positive(dt, "dt");
  if (!(duration >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative duration");
  return static_cast<std::size_t>(std::floor(duration / dt * (1.0 + 1e-12))) + 1;
}

}  // namespace

std::vector<double> sample_trajectory(const Telegrapher& m, double duration, double dt,
                                      std::uint64_t seed) {
  m.validate();
  const std::size_t n = sample_count(duration, dt);
  if (dt > 0.1 / m.gamma) throw Error(ErrorCode::kTimestepTooCoarse, "dt exceeds 0.1/gamma");
  std::mt19937_64 rng(stream_seed(seed, 0));
  return switching_series(m, m.state0, n, dt, rng);
}

std::vector<double> sample_trajectory(const FluctuatorEnsemble& e, double duration, double dt,
                                      std::uint64_t seed) {
  e.validate();
  const std::size_t n = sample_count(duration, dt);
  std::vector<double> out(n, 0.0);
  if (e.members.empty()) return out;
  if (dt > 0.1 / std::max(e.gamma_max, e.max_rate())) {
    throw Error(ErrorCode::kTimestepTooCoarse, "dt exceeds 0.1/gamma_max");
  }
  for (std::size_t k = 0; k < e.members.size(); ++k) {
    std::mt19937_64 rng(stream_seed(seed, k));
    const auto s = switching_series(e.members[k], e.members[k].state0, n, dt, rng);
    for (std::size_t i = 0; i < n; ++i) out[i] += s[i];
  }
  return out;
}

std::vector<double> accumulated_phase(const FluctuatorEnsemble& e, const std::vector<double>& times,
                                      std::uint64_t seed) {
  for (double t : times) {
    if (t < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative time");
  }
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> phase(times.size(), 0.0);
  for (const auto& m : e.members) {
    int s = uni(rng) < 0.5 ? 1 : -1;
    std::exponential_distribution<double> dwell(m.gamma);
    double t = 0.0;
    double acc = 0.0;
    double next = dwell(rng);
    for (std::size_t idx : order) {
      const double tq = times[idx];
      while (next < tq) {
        acc += s * m.nu * (next - t);
        t = next;
        s = -s;
        next += dwell(rng);
      }
      phase[idx] += acc + s * m.nu * (tq - t);
    }
  }
  return phase;
}

std::vector<cplx> monte_carlo_coherence(const FluctuatorEnsemble& e,
                                        const std::vector<double>& times, DecayKind kind,
                                        int n_traj, std::uint64_t seed, unsigned workers) {
  e.validate();
  if (n_traj <= 0) throw Error(ErrorCode::kInvalidArgument, "n_traj must be positive");
  // Query points: phase integral at t (and t/2 for echo).
  std::vector<double> q = times;
  if (kind == DecayKind::kEcho) {
    for (double t : times) q.push_back(0.5 * t);
  }
  std::vector<std::vector<cplx>> per(static_cast<std::size_t>(n_traj));
  parallel_for(static_cast<std::size_t>(n_traj), workers, [&](std::size_t j) {
    const std::vector<double> phase = accumulated_phase(e, q, stream_seed(seed, j));
    std::vector<cplx> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double phi =
          kind == DecayKind::kRamsey ? phase[i] : 2.0 * phase[times.size() + i] - phase[i];
      out[i] = std::exp(cplx(0.0, phi));
    }
    per[j] = std::move(out);
  });
  std::vector<cplx> mean(times.size(), 0.0);
  for (const auto& p : per) {
    for (std::size_t i = 0; i < p.size(); ++i) mean[i] += p[i];
  }
  for (auto& v : mean) v /= static_cast<double>(n_traj);
  return mean;
}

double psd_lorentzian(double gamma1, double omega) {
  check_positive(gamma1, "gamma1");
  return 2.0 * gamma1 / (gamma1 * gamma1 + omega * omega);
}

SpectralDensity SpectralDensity::white(double s0) {
  if (s0 < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative white level");
  SpectralDensity s;
  s.kind = SpectrumKind::kWhite;
  s.S0 = s0;
  return s;
}

SpectralDensity SpectralDensity::one_over_f(double a) {
  if (a < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative 1/f amplitude");
  SpectralDensity s;
  s.kind = SpectrumKind::kOneOverF;
  s.A = a;
  return s;
}

SpectralDensity SpectralDensity::lorentzian(double gamma1, double weight) {
  check_positive(gamma1, "gamma1");
  if (weight < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative Lorentzian weight");
  SpectralDensity s;
  s.kind = SpectrumKind::kLorentzian;
  s.gamma1 = gamma1;
  s.weight = weight;
  return s;
}

SpectralDensity SpectralDensity::tabulated(std::vector<double> omega, std::vector<double> values) {
  if (omega.size() != values.size() || omega.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "tabulated spectrum needs matching grids");
  }
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (values[i] < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative spectral density");
    if (omega[i] < 0.0 || (i > 0 && omega[i] <= omega[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "tabulated omega must be increasing and >= 0");
    }
  }
  SpectralDensity s;
  s.kind = SpectrumKind::kTabulated;
  s.omega = std::move(omega);
  s.values = std::move(values);
  return s;
}

double SpectralDensity::operator()(double w) const {
  w = std::abs(w);
  switch (kind) {
    case SpectrumKind::kWhite:
      return S0;
    case SpectrumKind::kOneOverF:
      return w > 0.0 ? A / w : std::numeric_limits<double>::infinity();
    case SpectrumKind::kLorentzian:
      return weight * psd_lorentzian(gamma1, w);
    case SpectrumKind::kTabulated: {
      if (w <= omega.front()) return values.front();
      if (w > omega.back()) return 0.0;
      const auto it = std::upper_bound(omega.begin(), omega.end(), w);
      const auto i = static_cast<std::size_t>(it - omega.begin());
      const double f = (w - omega[i - 1]) / (omega[i] - omega[i - 1]);
      return values[i - 1] + f * (values[i] - values[i - 1]);
    }
  }
  return 0.0;
}

double SpectralDensity::integral() const {
  switch (kind) {
    case SpectrumKind::kLorentzian:
      return kTwoPi * weight;
    case SpectrumKind::kTabulated: {
      double s = 0.0;
      for (std::size_t i = 1; i < omega.size(); ++i) {
        s += 0.5 * (values[i] + values[i - 1]) * (omega[i] - omega[i - 1]);
      }
      return 2.0 * s;
    }
    default:
      if (kind == SpectrumKind::kWhite && S0 == 0.0) return 0.0;
      if (kind == SpectrumKind::kOneOverF && A == 0.0) return 0.0;
      throw Error(ErrorCode::kDivergent, "spectrum has infinite variance");
  }
}

void SpectralDensity::write_csv(std::ostream& os) const {
  if (kind != SpectrumKind::kTabulated) {
    throw Error(ErrorCode::kInvalidArgument, "only tabulated spectra export as CSV");
  }
  os << "omega_rad_s,S\n" << std::setprecision(12);
  for (std::size_t i = 0; i < omega.size(); ++i) os << omega[i] << ',' << values[i] << '\n';
}

SpectralDensity psd_estimate(const std::vector<double>& series, double dt,
                             const PsdOptions& options) {
  check_positive(dt, "dt");
  const std::size_t n = series.size();
  if (n < 64) throw Error(ErrorCode::kTooFewSamples, "PSD estimate needs at least 64 samples");
  std::size_t L = 16;
  if (options.segment > 0) {
    L = static_cast<std::size_t>(options.segment);
    if (L > n || L < 16) throw Error(ErrorCode::kInvalidArgument, "segment length out of range");
  } else {
    while (2 * L <= 2 * n / 9) L *= 2;
  }
  const std::size_t hop = L / 2;
  std::vector<double> w(L, 1.0);
  if (options.hann) {
    for (std::size_t i = 0; i < L; ++i) w[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / L);
  }
  double wsum2 = 0.0;
  for (double v : w) wsum2 += v * v;

  Eigen::FFT<double> fft;
  const std::size_t nf = L / 2 + 1;
  std::vector<double> acc(nf, 0.0);
  std::vector<double> seg(L);
  std::vector<cplx> spec;
  std::size_t count = 0;
  for (std::size_t start = 0; start + L <= n; start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < L; ++i) mean += series[start + i];
    mean /= static_cast<double>(L);
    for (std::size_t i = 0; i < L; ++i) seg[i] = (series[start + i] - mean) * w[i];
    fft.fwd(spec, seg);
    for (std::size_t k = 0; k < nf; ++k) acc[k] += std::norm(spec[k]);
    ++count;
  }
  std::vector<double> om(nf);
  std::vector<double> val(nf);
  for (std::size_t k = 0; k < nf; ++k) {
    om[k] = kTwoPi * static_cast<double>(k) / (static_cast<double>(L) * dt);
    val[k] = dt * acc[k] / (kTwoPi * wsum2 * static_cast<double>(count));
  }
  return SpectralDensity::tabulated(std::move(om), std::move(val));
}

std::vector<double> synthesize_power_law(std::size_t n, double dt, double alpha, double a,
                                         std::uint64_t seed) {
  check_positive(dt, "dt");
  if (n < 4 || n % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "n must be even and >= 4");
  std::mt19937_64 rng(stream_seed(seed, 0));
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<cplx> X(n, 0.0);
  const double norm = kTwoPi * static_cast<double>(n) / dt;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double w = kTwoPi * static_cast<double>(k) / (static_cast<double>(n) * dt);
    const double amp = std::sqrt(a / std::pow(w, alpha) * norm);
    if (k == n / 2) {
      X[k] = amp * std::sqrt(2.0) * gauss(rng);
    } else {
      X[k] = amp * cplx(gauss(rng), gauss(rng));
      X[n - k] = std::conj(X[k]);
    }
  }
  Eigen::FFT<double> fft;
  std::vector<double> x;
  fft.inv(x, X);
  return x;
}

double gaussian_decay(const SpectralDensity& S, double t, DecayKind kind, double omega_ir) {
  check_positive(t, "t");
  if (omega_ir < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative infrared cutoff");
  if (S.kind == SpectrumKind::kOneOverF && kind == DecayKind::kRamsey) {
    if (omega_ir == 0.0) throw Error(ErrorCode::kDivergent, "1/f Ramsey integral needs a cutoff");
    if (omega_ir * t >= 0.1) throw Error(ErrorCode::kInvalidArgument, "omega_ir * t must be < 0.1");
  }
  const double c = kind == DecayKind::kRamsey ? 2.0 : 4.0;
  // Filter in u = w t / c, normalized so that x = -c t int S(c u / t) g(u) du.
  auto g = [&](double u) {
    if (u < 1e-4) {
      const double s = 1.0 - u * u / 3.0;
      return kind == DecayKind::kRamsey ? s : u * u * s * s;
    }
    const double s = std::sin(u);
    return kind == DecayKind::kRamsey ? s * s / (u * u) : s * s * s * s / (u * u);
  };
  const double mean_sq = kind == DecayKind::kRamsey ? 0.5 : 0.375;
  const double u_lo = omega_ir * t / c;
  double u_max = std::numeric_limits<double>::infinity();
  if (S.kind == SpectrumKind::kTabulated) u_max = S.omega.back() * t / c;
  auto f = [&](double u) { return S(c * u / t) * g(u); };

  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  auto add = [&](double a, double b) {
    a = std::max(a, u_lo);
    b = std::min(b, u_max);
    if (b > a) total += GK::integrate(f, a, b, 15, 1e-12);
  };
  // Log-spaced panels up to 1, then one panel per half period.
  double a = u_lo > 0.0 ? u_lo : 1e-14;
  if (u_lo == 0.0) add(0.0, a);
  while (a < 1.0) {
    const double b = std::min(1.0, 4.0 * a);
    add(a, b);
    a = b;
  }
  add(1.0, kPi);
  const int panels = 4000;
  for (int k = 1; k < panels; ++k) add(k * kPi, (k + 1) * kPi);
  // Remainder with the filter replaced by its period average.
  const double tail_lo = std::max(panels * kPi, u_lo);
  if (u_max > tail_lo) {
    auto h = [&](double u) { return S(c * u / t) * mean_sq / (u * u); };
    total += GK::integrate(h, tail_lo, u_max, 15, 1e-12);
  }
  return -c * t * total;
}

double DecayPrediction::log_amplitude(double t) const {
  if (kind == DecayKind::kRamsey) return -t * ramsey_rate;
  if (gamma_max * t <= 1.0) return std::numeric_limits<double>::quiet_NaN();
  return -t * xi * std::log(gamma_max * t);
}

DecayPrediction ensemble_decay_predict(double xi, double gamma_min, double gamma_max,
                                       DecayKind kind) {
  check_positive(gamma_min, "gamma_min");
  if (gamma_max < gamma_min) throw Error(ErrorCode::kInvalidArgument, "gamma_max < gamma_min");
  if (xi < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative xi");
  DecayPrediction p;
  p.kind = kind;
  p.xi = xi;
  p.gamma_max = gamma_max;
  const double lr = std::log(gamma_max / gamma_min);
  p.ramsey_rate = xi * lr;
  const double inf = std::numeric_limits<double>::infinity();
  p.t2_ramsey = p.ramsey_rate > 0.0 ? 1.0 / p.ramsey_rate : inf;
  if (xi == 0.0) {
    p.t2_echo = inf;
    p.efficiency = std::numeric_limits<double>::quiet_NaN();
    return p;
  }
  // t xi ln(gamma_max t) = 1 has a single root above 1/gamma_max.
  double lo = 1.0 / gamma_max;
  double hi = 2.0 * lo;
  while (hi * xi * std::log(gamma_max * hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double m = 0.5 * (lo + hi);
    if (m * xi * std::log(gamma_max * m) < 1.0) {
      lo = m;
    } else {
      hi = m;
    }
  }
  p.t2_echo = 0.5 * (lo + hi);
  p.echo_valid = gamma_max * p.t2_echo > 1.0;
  p.efficiency = lr / std::log(gamma_max * p.t2_echo);
  return p;
}

DecayPrediction ensemble_decay_predict(const FluctuatorEnsemble& e, DecayKind kind) {
  e.validate();
  return ensemble_decay_predict(e.xi, e.gamma_min, e.gamma_max, kind);
}

namespace {

void check_resonant(double g, double delta, double delta0, double gamma1, double gamma_phi) {
  check_positive(delta, "delta");
  check_positive(gamma1, "Gamma1_tls");
  if (gamma_phi < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative Gamma_phi");
  if (delta0 < 0.0 || delta0 > 0.5 * delta) {
    throw Error(ErrorCode::kInvalidArgument, "delta0 must lie in [0, delta/2]");
  }
  if (!std::isfinite(g)) throw Error(ErrorCode::kInvalidArgument, "g not finite");
}

}  // namespace

double resonant_tls_loss(double g, double delta, double delta0, double gamma1_tls,
                         double gamma_phi_tls) {
  check_resonant(g, delta, delta0, gamma1_tls, gamma_phi_tls);
  const double g2 = 0.5 * gamma1_tls + gamma_phi_tls;
  const double x = kTwoPi * g2 / delta;
  const double y = kTwoPi * delta0 / delta;
  // sinh x / (cosh x - cos y), with cosh x - cos y = 2 sinh^2(x/2) + 2 sin^2(y/2).
  const double sx2 = std::sinh(0.5 * x);
  const double sy2 = std::sin(0.5 * y);
  const double ratio = x > 40.0 ? 1.0 : std::sinh(x) / (2.0 * (sx2 * sx2 + sy2 * sy2));
  return kTwoPi * g * g / delta * ratio;
}

double resonant_tls_loss_sum(double g, double delta, double delta0, double gamma1_tls,
                             double gamma_phi_tls, long k_max) {
  check_resonant(g, delta, delta0, gamma1_tls, gamma_phi_tls);
  if (k_max < 1) throw Error(ErrorCode::kInvalidArgument, "k_max must be >= 1");
  const double g2 = 0.5 * gamma1_tls + gamma_phi_tls;
  auto term = [&](long k) {
    const double d = static_cast<double>(k) * delta + delta0;
    return 2.0 * g * g * g2 / (d * d + g2 * g2);
  };
  // Smallest terms first.
  double s = 0.0;
  for (long k = k_max; k >= 1; --k) s += term(k) + term(-k);
  s += term(0);
  const double a = delta0 / delta;
  const double kp1 = static_cast<double>(k_max) + 1.0;
  const double tail = boost::math::trigamma(kp1 + a) + boost::math::trigamma(kp1 - a);
  return s + 2.0 * g * g * g2 / (delta * delta) * tail;
}

double resonant_tls_loss(const std::vector<ResonantTls>& tls, double omega_m, double temperature) {
  if (temperature < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative temperature");
  double s = 0.0;
  for (const auto& t : tls) {
    check_positive(t.gamma1, "Gamma1_tls");
    if (t.gamma_phi < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative Gamma_phi");
    const double g2 = 0.5 * t.gamma1 + t.gamma_phi;
    const double d = t.omega - omega_m;
    const double th =
        temperature == 0.0 ? 1.0 : std::tanh(kHbar * t.omega / (2.0 * kBoltzmann * temperature));
    s += 2.0 * t.g * t.g * g2 / (d * d + g2 * g2) * th;
  }
  return s;
}

double relaxation_damping(const std::vector<RelaxingTls>& tls, double omega_m, double temperature) {
  check_positive(temperature, "temperature");
  check_positive(omega_m, "omega_m");
  const double kt = kBoltzmann * temperature;
  double s = 0.0;
  for (const auto& t : tls) {
    if (t.gamma1 < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative Gamma1");
    const double x = std::abs(kHbar * t.omega / (2.0 * kt));
    const double e = std::exp(-2.0 * x);
    const double sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    s += 2.0 * t.g_long * t.g_long / omega_m * kHbar * t.gamma1 / kt * sech2;
  }
  return s;
}

double tls_density_bound(double n_observed, double delta_v, double mean_abs_lambda) {
  if (n_observed < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative TLS count");
  check_positive(delta_v, "delta_V");
  check_positive(mean_abs_lambda, "mean |lambda|");
  return n_observed / (delta_v * mean_abs_lambda) * 1e9;
}

}  // namespace cqad::noisekit
