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


#include "cqad/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>

#include <nlohmann/json.hpp>

#include "cqad/engine.hpp"
#include "cqad/fitkit.hpp"
#include "cqad/parallel.hpp"

namespace cqad::tomography {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void RabiTrace::validate() const {
  if (times.size() != pe.size() || times.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "Rabi trace needs matching non-empty series");
  }
  for (double v : pe) {
    if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) {
      throw Error(ErrorCode::kInvalidArgument, "P_e outside [0, 1]");
    }
  }
}

void FockDistribution::validate() const {
  double s = 0.0;
  for (double v : p) {
    if (v < 0.0) throw Error(ErrorCode::kInvalidState, "negative Fock population");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-6) throw Error(ErrorCode::kInvalidState, "Fock populations do not sum to 1");
}

void WignerTomogram::validate() const {
  if (radii.size() != w.size() || radii.size() != sigma.size()) {
    throw Error(ErrorCode::kInvalidArgument, "tomogram series lengths differ");
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) > 2.0 / kPi + 3.0 * sigma[i] + 1e-12) {
      throw Error(ErrorCode::kInvalidState, "|W| exceeds 2/pi + 3 sigma");
    }
  }
}

void WignerTomogram::write_csv(std::ostream& os) const {
  os << "r,W,sigma\n" << std::setprecision(12);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    os << radii[i] << ',' << w[i] << ',' << sigma[i] << '\n';
  }
}

RabiBasis RabiBasis::truncated(int max_fock) const {
  if (max_fock < 0 || max_fock > this->max_fock()) {
    throw Error(ErrorCode::kInvalidArgument, "truncation beyond the basis");
  }
  return {times, curves.leftCols(max_fock + 1)};
}

namespace {

model::DeviceSpec single_device(const model::DeviceSpec& dev, std::size_t mech, int fock_dim) {
  if (mech >= dev.mechanics.size()) throw Error(ErrorCode::kUnknownLabel, "no such oscillator");
  model::DeviceSpec d = dev.qubit_at(mech).with_mechanics({mech});
  d.fock_dim = fock_dim;
  return d;
}

// Qubit in equilibrium with its bath; the ground projector when the bath is cold.
Mat qubit_equilibrium(int levels, double p) {
  Mat g = Mat::Zero(levels, levels);
  const double ratio = p / (1.0 - p);
  double w = 1.0, total = 0.0;
  for (int k = 0; k < levels; ++k, w *= ratio) {
    g(k, k) = w;
    total += w;
  }
  return g / total;
}

// Re-embeds a (qubit, mode) state into a larger mode truncation.
Mat pad_joint(const Mat& rho, int levels, int f_in, int f_out) {
  Mat out = Mat::Zero(levels * f_out, levels * f_out);
  for (int q = 0; q < levels; ++q)
    for (int m = 0; m < f_in; ++m)
      for (int q2 = 0; q2 < levels; ++q2)
        for (int m2 = 0; m2 < f_in; ++m2)
          out(q * f_out + m, q2 * f_out + m2) = rho(q * f_in + m, q2 * f_in + m2);
  return out;
}

double gaussian_area(double duration) {
  const double sigma = duration / 4.0;
  return sigma * std::sqrt(kTwoPi) * std::erf(std::sqrt(2.0));
}

// Gaussian drive eps(t) (i e^{i phi} b^dag - i e^{-i phi} b) with the qubit detuned.
qops::DensityMatrix displace(const model::DeviceSpec& single, const qops::DensityMatrix& rho,
                             double eps, double phase, const PipelineOptions& o) {
  model::DeviceSpec d = single;
  d.transmon.omega_q = d.mechanics[0].omega_m + o.qubit_detuning;
  const auto space = model::make_space(d);
  const Mat b = qops::annihilation(d.fock_dim).matrix();
  const cplx e = std::polar(1.0, phase);
  const Mat local = cplx(0.0, 1.0) * e * Mat(b.adjoint()) - cplx(0.0, 1.0) * std::conj(e) * b;
  engine::Segment seg;
  seg.duration = o.drive_duration;
  seg.hamiltonian = model::build_hamiltonian(d, {d.mechanics[0].omega_m});
  seg.drive = qops::embed(local, space, model::mech_label(0)) * cplx(eps);
  seg.envelope = engine::Envelope::kGaussian;
  engine::LindbladProblem p;
  p.segments = {seg};
  p.collapse = model::collapse_ops(d);
  p.rho0 = qops::DensityMatrix::unchecked(space, rho.matrix());
  return engine::evolve(p).final_state;
}

std::vector<double> default_times() {
  std::vector<double> t(101);
  for (int i = 0; i <= 100; ++i) t[static_cast<std::size_t>(i)] = 5e-6 * i / 100.0;
  return t;
}

}  // namespace

std::vector<double> simulate_rabi(const model::DeviceSpec& single, const qops::DensityMatrix& rho,
                                  const std::vector<double>& times) {
  if (single.mechanics.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "Rabi simulation needs a single-oscillator device");
  }
  if (times.empty()) throw Error(ErrorCode::kInvalidArgument, "no sample times");
  model::DeviceSpec d = single;
  d.transmon.omega_q = d.mechanics[0].omega_m;
  const auto space = model::make_space(d);
  if (!(rho.space() == space)) throw Error(ErrorCode::kSpaceMismatch, "state does not match device");
  const qops::Operator pe = qops::embed(qops::projector(d.transmon.levels, 1), space, model::kQubit);
  const double t_end = *std::max_element(times.begin(), times.end());
  if (t_end <= 0.0) return std::vector<double>(times.size(), qops::expect(pe, rho).real());
  engine::LindbladProblem p;
  engine::Segment seg;
  seg.duration = t_end;
  seg.hamiltonian = model::build_hamiltonian(d, {d.mechanics[0].omega_m});
  p.segments = {seg};
  p.collapse = model::collapse_ops(d);
  p.rho0 = rho;
  p.observables = {{"P_e", pe}};
  p.sample_times = times;
  const engine::Trajectory tr = engine::evolve(p);
  std::vector<double> out = tr.series("P_e");
  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  return out;
}

RabiBasis rabi_basis(const model::DeviceSpec& dev, std::size_t mech,
                     const std::vector<double>& times, int max_fock) {
  if (max_fock < 0) throw Error(ErrorCode::kInvalidArgument, "negative max_fock");
  const model::DeviceSpec d = single_device(dev, mech, max_fock + 2);
  const auto space = model::make_space(d);
  RabiBasis basis;
  basis.times = times;
  basis.curves.resize(static_cast<Eigen::Index>(times.size()), max_fock + 1);
  for (int n = 0; n <= max_fock; ++n) {
    const auto rho = qops::product_state(
        space, {qubit_equilibrium(d.transmon.levels, d.transmon.thermal_pop), qops::projector(d.fock_dim, n).matrix()});
    const auto curve = simulate_rabi(d, rho, times);
    for (std::size_t i = 0; i < times.size(); ++i) basis.curves(static_cast<Eigen::Index>(i), n) = curve[i];
  }
  return basis;
}

FockDistribution decompose_rabi(const RabiTrace& trace, const RabiBasis& basis,
                                const DecomposeOptions& options) {
  trace.validate();
  if (trace.times.size() != basis.times.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "trace and basis sample counts differ");
  }
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    if (std::abs(trace.times[i] - basis.times[i]) > 1e-12 * (1.0 + std::abs(basis.times[i]))) {
      throw Error(ErrorCode::kDimensionMismatch, "trace and basis sample times differ");
    }
  }
  const MatrixXd& A = basis.curves;
  Eigen::JacobiSVD<MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  const double cond = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  if (cond > options.max_condition) {
    throw Error(ErrorCode::kIllConditioned, "Rabi basis condition number " + std::to_string(cond));
  }
  const VectorXd y = Eigen::Map<const VectorXd>(trace.pe.data(), static_cast<Eigen::Index>(trace.pe.size()));
  const fitkit::SimplexLsq fit = fitkit::nnls_simplex(A, y);
  FockDistribution out;
  out.p.assign(fit.x.data(), fit.x.data() + fit.x.size());
  const VectorXd model = A * fit.x;
  const VectorXd res = y - model;
  out.residual = res.norm();
  out.sigma.assign(out.p.size(), 0.0);
  if (options.bootstrap > 1) {
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, res.size() - 1);
    VectorXd sum = VectorXd::Zero(fit.x.size());
    VectorXd sum2 = VectorXd::Zero(fit.x.size());
    double ps = 0.0;
    double ps2 = 0.0;
    for (int b = 0; b < options.bootstrap; ++b) {
      VectorXd yb = model;
      for (Eigen::Index i = 0; i < yb.size(); ++i) yb(i) += res(pick(rng));
      const VectorXd xb = fitkit::nnls_simplex(A, yb).x;
      sum += xb;
      sum2 += xb.cwiseProduct(xb);
      double par = 0.0;
      for (Eigen::Index n = 0; n < xb.size(); ++n) par += (n % 2 == 0 ? 1.0 : -1.0) * xb(n);
      ps += par;
      ps2 += par * par;
    }
    const double nb = options.bootstrap;
    for (std::size_t n = 0; n < out.p.size(); ++n) {
      const auto k = static_cast<Eigen::Index>(n);
      out.sigma[n] = std::sqrt(std::max(0.0, (sum2(k) - sum(k) * sum(k) / nb) / (nb - 1.0)));
    }
    out.parity_sigma = std::sqrt(std::max(0.0, (ps2 - ps * ps / nb) / (nb - 1.0)));
  }
  return out;
}

double parity(const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) s += (n % 2 == 0 ? 1.0 : -1.0) * p[n];
  return s;
}

double parity(const FockDistribution& p) {
  p.validate();
  return parity(p.p);
}

double wigner_point(double parity) {
  if (std::abs(parity) > 1.0 + 1e-9) throw Error(ErrorCode::kInvalidArgument, "|parity| > 1");
  return 2.0 / kPi * parity;
}

double fock_wigner(int n, double r) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "negative Fock level");
  const double sign = n % 2 == 0 ? 1.0 : -1.0;
  return 2.0 / kPi * sign * std::exp(-2.0 * r * r) * std::laguerre(static_cast<unsigned>(n), 4.0 * r * r);
}

double wigner_at(const Mat& rho, cplx alpha) {
  const auto d = static_cast<int>(rho.rows());
  const Mat D = qops::displacement(d, -alpha);
  const Mat shifted = D * rho * D.adjoint();
  double s = 0.0;
  for (int n = 0; n < d; ++n) s += (n % 2 == 0 ? 1.0 : -1.0) * shifted(n, n).real();
  return 2.0 / kPi * s;
}

PoissonFit poisson_fit(const std::vector<double>& p) {
  double mean = 0.0;
  double total = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    mean += static_cast<double>(n) * p[n];
    total += p[n];
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kInvalidArgument, "empty distribution");
  mean /= total;
  PoissonFit f;
  f.r = std::sqrt(mean);
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (p[n] <= 0.0) continue;
    const double lq = -mean + static_cast<double>(n) * std::log(std::max(mean, 1e-300)) -
                      std::lgamma(static_cast<double>(n) + 1.0);
    f.kl += p[n] / total * (std::log(p[n] / total) - lq);
  }
  return f;
}

Mat Reconstruction::density() const {
  Mat rho = Mat::Zero(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.size()));
  for (std::size_t n = 0; n < p.size(); ++n) rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = p[n];
  return rho;
}

std::string Reconstruction::to_json() const {
  nlohmann::json j;
  j["values"] = p;
  j["sigma"] = sigma;
  j["residual"] = residual;
  j["resamples"] = resamples;
  return j.dump(2);
}

Reconstruction reconstruct(const WignerTomogram& tomogram, int max_fock,
                           const ReconstructOptions& options) {
  if (max_fock < 0) throw Error(ErrorCode::kInfeasible, "max_fock must be >= 0");
  if (tomogram.radii.size() != tomogram.w.size() || tomogram.radii.size() != tomogram.sigma.size()) {
    throw Error(ErrorCode::kInvalidArgument, "tomogram series lengths differ");
  }
  const auto m = static_cast<Eigen::Index>(tomogram.radii.size());
  const Eigen::Index k = max_fock + 1;
  if (m < k) throw Error(ErrorCode::kIllConditioned, "fewer radii than Fock levels");
  bool weighted = true;
  for (double s : tomogram.sigma) weighted = weighted && s > 0.0;
  MatrixXd A(m, k);
  VectorXd y(m);
  VectorXd wts(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    wts(i) = weighted ? 1.0 / tomogram.sigma[static_cast<std::size_t>(i)] : 1.0;
    for (Eigen::Index n = 0; n < k; ++n) {
      A(i, n) = wts(i) * fock_wigner(static_cast<int>(n), tomogram.radii[static_cast<std::size_t>(i)]);
    }
    y(i) = wts(i) * tomogram.w[static_cast<std::size_t>(i)];
  }
  Eigen::JacobiSVD<MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  if (s(k - 1) <= 1e-12 * s(0)) throw Error(ErrorCode::kIllConditioned, "rank-deficient design matrix");
  const fitkit::SimplexLsq fit = fitkit::nnls_simplex(A, y);
  Reconstruction out;
  out.p.assign(fit.x.data(), fit.x.data() + k);
  out.residual = (A * fit.x - y).norm();
  out.sigma.assign(static_cast<std::size_t>(k), 0.0);
  if (weighted && options.resamples > 1) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss;
    VectorXd sum = VectorXd::Zero(k);
    VectorXd sum2 = VectorXd::Zero(k);
    for (int b = 0; b < options.resamples; ++b) {
      VectorXd yb = y;
      for (Eigen::Index i = 0; i < m; ++i) yb(i) += gauss(rng);
      const VectorXd xb = fitkit::nnls_simplex(A, yb).x;
      sum += xb;
      sum2 += xb.cwiseProduct(xb);
    }
    const double nb = options.resamples;
    for (Eigen::Index n = 0; n < k; ++n) {
      out.sigma[static_cast<std::size_t>(n)] = std::sqrt(std::max(0.0, (sum2(n) - sum(n) * sum(n) / nb) / (nb - 1.0)));
    }
    out.resamples = options.resamples;
  }
  return out;
}

double fidelity(const Mat& rho, const Vec& target) {
  if (rho.rows() != target.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "state and target dimensions differ");
  }
  const double n = target.squaredNorm();
  const double v = (target.adjoint() * rho * target)(0, 0).real() / n;
  return std::sqrt(std::clamp(v, 0.0, 1.0));
}

double fidelity(const std::vector<double>& diagonal, const Vec& target) {
  Mat rho = Mat::Zero(static_cast<Eigen::Index>(diagonal.size()), static_cast<Eigen::Index>(diagonal.size()));
  for (std::size_t n = 0; n < diagonal.size(); ++n) rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = diagonal[n];
  return fidelity(rho, target);
}

double bootstrap_mean_sigma(const std::vector<double>& data, int resamples, std::uint64_t seed) {
  if (data.size() < 2 || resamples < 2) {
    throw Error(ErrorCode::kTooFewSamples, "bootstrap needs >= 2 points and resamples");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  double s = 0.0;
  double s2 = 0.0;
  for (int b = 0; b < resamples; ++b) {
    double mean = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) mean += data[pick(rng)];
    mean /= static_cast<double>(data.size());
    s += mean;
    s2 += mean * mean;
  }
  const double n = resamples;
  return std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1.0)));
}

std::vector<double> default_radii() {
  std::vector<double> r(12);
  for (int i = 0; i < 12; ++i) r[static_cast<std::size_t>(i)] = 2.4 * i / 11.0;
  return r;
}

double calibrate_displacement(const model::DeviceSpec& single, double eps,
                              const PipelineOptions& options) {
  const auto space = model::make_space(single);
  const auto vac = qops::product_state(
      space, {qubit_equilibrium(single.transmon.levels, single.transmon.thermal_pop), qops::projector(single.fock_dim, 0).matrix()});
  const auto rho = displace(single, vac, eps, 0.0, options);
  const Mat pm = qops::partial_trace(rho.matrix(), space, {model::mech_label(0)});
  std::vector<double> p(static_cast<std::size_t>(single.fock_dim));
  for (int n = 0; n < single.fock_dim; ++n) p[static_cast<std::size_t>(n)] = std::max(0.0, pm(n, n).real());
  return poisson_fit(p).r;
}

PipelineResult run_pipeline(const model::DeviceSpec& dev, std::size_t mech,
                            const qops::DensityMatrix& joint, const PipelineOptions& options) {
  const std::vector<double> radii = options.radii.empty() ? default_radii() : options.radii;
  const std::vector<double> times = options.rabi_times.empty() ? default_times() : options.rabi_times;
  const auto& dims = joint.space().dims();
  if (dims.size() != 2) throw Error(ErrorCode::kSpaceMismatch, "expected a qubit-oscillator state");
  const int levels = dims[0];
  const int f_in = dims[1];
  if (levels != dev.transmon.levels) throw Error(ErrorCode::kSpaceMismatch, "qubit levels differ");

  const Mat pm_in = qops::partial_trace(joint.matrix(), joint.space(), {joint.space().labels()[1]});
  double n_in = 0.0;
  for (int n = 0; n < f_in; ++n) n_in += n * pm_in(n, n).real();
  const double r_max = *std::max_element(radii.begin(), radii.end());
  // Smallest dimension holding all but tail_tol of the ideally displaced input populations.
  auto dim_for = [&](double r) {
    const double s = r + std::sqrt(n_in + 1.0);
    const int big = f_in + static_cast<int>(std::ceil(2.0 * s * s)) + 30;
    const Mat D = qops::displacement(big, r);
    Eigen::VectorXd pop = Eigen::VectorXd::Zero(big);
    for (int m = 0; m < f_in; ++m) {
      const double w = pm_in(m, m).real();
      if (w <= 0.0) continue;
      pop += w * D.col(m).cwiseAbs2();
    }
    double tail = pop.sum();
    for (int k = 0; k < big; ++k) {
      tail -= pop(k);
      if (tail < options.tail_tol) return std::max(k + 1, 2);
    }
    return big;
  };
  const int F = std::max(f_in, dim_for(r_max));
  const model::DeviceSpec single = single_device(dev, mech, F);
  const auto space = model::make_space(single);
  const qops::DensityMatrix rho0 =
      qops::DensityMatrix::unchecked(space, pad_joint(joint.matrix(), levels, f_in, F));
  const RabiBasis basis = rabi_basis(dev, mech, times, F - 1);

  PipelineResult out;
  out.fock_dim = F;
  out.target_radii = radii;
  out.tomogram.radii.assign(radii.size(), 0.0);
  out.tomogram.w.assign(radii.size(), 0.0);
  out.tomogram.sigma.assign(radii.size(), 0.0);
  out.distributions.resize(radii.size());
  const int phases = std::max(1, options.phase_samples);
  parallel_for(radii.size(), options.workers, [&](std::size_t i) {
    const double r = radii[i];
    double r_cal = r;
    Mat rho = Mat::Zero(space.total_dim(), space.total_dim());
    if (r == 0.0) {
      rho = options.ideal_displacement ? rho0.matrix()
                                       : displace(single, rho0, 0.0, 0.0, options).matrix();
      r_cal = 0.0;
    } else if (options.ideal_displacement) {
      for (int k = 0; k < phases; ++k) {
        const Mat D = qops::embed(qops::displacement(F, std::polar(r, kTwoPi * k / phases)), space,
                                  model::mech_label(0)).matrix();
        rho += D * rho0.matrix() * D.adjoint() / static_cast<double>(phases);
      }
      rho /= rho.trace().real();
    } else {
      const double eps = r / gaussian_area(options.drive_duration);
      r_cal = calibrate_displacement(single, eps, options);
      for (int k = 0; k < phases; ++k) {
        rho += displace(single, rho0, eps, kTwoPi * k / phases, options).matrix() /
               static_cast<double>(phases);
      }
    }
    RabiTrace trace;
    trace.times = times;
    trace.r = r_cal;
    trace.pe = simulate_rabi(single, qops::DensityMatrix::unchecked(space, rho), times);
    if (options.shots > 0) {
      std::mt19937_64 rng(stream_seed(options.seed, i));
      for (double& v : trace.pe) {
        std::binomial_distribution<int> shot(options.shots, std::clamp(v, 0.0, 1.0));
        v = static_cast<double>(shot(rng)) / options.shots;
      }
    }
    const int kmax = std::min(F - 1, dim_for(r) - 1);
    DecomposeOptions dopt = options.decompose;
    dopt.seed = stream_seed(options.seed ^ 0x5bd1e995ULL, i);
    FockDistribution p = decompose_rabi(trace, basis.truncated(kmax), dopt);
    out.tomogram.radii[i] = r_cal;
    out.tomogram.w[i] = wigner_point(parity(p));
    out.tomogram.sigma[i] = 2.0 / kPi * p.parity_sigma;
    out.distributions[i] = std::move(p);
  });
  out.reconstruction = reconstruct(out.tomogram, options.reconstruct_max_fock, options.reconstruct);
  return out;
}

}  // namespace cqad::tomography
