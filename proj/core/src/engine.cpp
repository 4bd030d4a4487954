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

#include "cqad/engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqad/fitkit.hpp"

namespace cqad::engine {

using qops::DensityMatrix;
using qops::Dissipator;
using qops::Operator;
using SpMat = Eigen::SparseMatrix<cplx>;

double Segment::envelope_at(double t) const {
  if (envelope == Envelope::kConstant) return 1.0;
  const double s = sigma > 0.0 ? sigma : duration / 4.0;
  const double x = t - 0.5 * duration;
  return std::exp(-x * x / (2.0 * s * s));
}

const std::vector<double>& Trajectory::series(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return values[i];
  throw Error(ErrorCode::kUnknownLabel, "no observable '" + std::string(label) + "'");
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "time_s";
  for (const auto& l : labels) os << ',' << l;
  os << '\n';
  os << std::setprecision(12);
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << times[i];
    for (const auto& v : values) os << ',' << v[i];
    os << '\n';
  }
}

namespace {

SpMat sparse(const Mat& m) {
  SpMat s = m.sparseView(cplx(1.0), 1e-300);
  s.makeCompressed();
  return s;
}

// Dense-to-sparse right-hand side dρ = Aρ + ρA† + Σ JρJ†, A = -iH - ½ΣγL†L.
class Rhs {
 public:
  Rhs(const Segment& seg, const std::vector<Dissipator>& collapse) : seg_(seg) {
    const int n = seg.hamiltonian.dim();
    Mat a = cplx(0.0, -1.0) * seg.hamiltonian.matrix();
    for (const auto& c : collapse) {
      if (c.rate == 0.0) continue;
      const Mat& L = c.op.matrix();
      a -= 0.5 * c.rate * (L.adjoint() * L);
      jumps_.push_back(sparse(std::sqrt(c.rate) * L));
      jumps_adj_.push_back(sparse(std::sqrt(c.rate) * L.adjoint()));
    }
    a0_ = sparse(a);
    a0_adj_ = sparse(a.adjoint());
    if (seg.drive) {
      const Mat d = cplx(0.0, -1.0) * seg.drive->matrix();
      ad_ = sparse(d);
      ad_adj_ = sparse(d.adjoint());
      has_drive_ = true;
    }
    tmp_.resize(n, n);
  }

  void operator()(double t, const Mat& rho, Mat& out) {
    out.noalias() = a0_ * rho;
    out.noalias() += rho * a0_adj_;
    if (has_drive_) {
      const double f = seg_.envelope_at(t);
      if (f != 0.0) {
        tmp_.noalias() = ad_ * rho;
        tmp_.noalias() += rho * ad_adj_;
        out += f * tmp_;
      }
    }
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      tmp_.noalias() = jumps_[k] * rho;
      out.noalias() += tmp_ * jumps_adj_[k];
    }
  }

 private:
  const Segment& seg_;
  SpMat a0_, a0_adj_, ad_, ad_adj_;
  std::vector<SpMat> jumps_, jumps_adj_;
  bool has_drive_ = false;
  Mat tmp_;
};

// Dormand-Prince 5(4) with steps landing exactly on each stop.
template <typename Callback>
Mat integrate_rk45(const Segment& seg, const std::vector<Dissipator>& collapse, Mat y,
                   const std::vector<double>& stops, double rtol, double atol, Callback&& on_stop) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Rhs f(seg, collapse);
  const Eigen::Index n = y.rows();
  Mat k1(n, n), k2(n, n), k3(n, n), k4(n, n), k5(n, n), k6(n, n), k7(n, n), yt(n, n), yn(n, n);
  double t = 0.0;
  const double T = seg.duration;
  f(t, y, k1);
  const double d0 = y.cwiseAbs().maxCoeff();
  const double d1 = k1.cwiseAbs().maxCoeff();
  double h = d1 > 1e-300 ? std::min(T, 0.01 * std::max(d0, atol) / d1) : T;
  std::size_t next = 0;
  while (next < stops.size() && stops[next] <= 0.0) on_stop(next++, y);
  while (t < T) {
    double target = T;
    if (next < stops.size()) target = std::min(target, stops[next]);
    bool land = false;
    double hs = h;
    if (t + hs >= target * (1.0 - 1e-14)) {
      hs = target - t;
      land = true;
    }
    if (hs < 1e-13 * std::max(T, 1e-300)) {
      if (land) {
        t = target;
      } else {
        std::ostringstream msg;
        msg << "step size underflow at t=" << t << " s (h=" << hs << " s, segment " << T << " s)";
        throw Error(ErrorCode::kIntegrationFailure, msg.str());
      }
    } else {
      yt = y + hs * a21 * k1;
      f(t + c2 * hs, yt, k2);
      yt = y + hs * (a31 * k1 + a32 * k2);
      f(t + c3 * hs, yt, k3);
      yt = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
      f(t + c4 * hs, yt, k4);
      yt = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(t + c5 * hs, yt, k5);
      yt = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(t + hs, yt, k6);
      yn = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      f(t + hs, yn, k7);
      yt = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double err = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double sc = atol + rtol * std::max(std::abs(y(i, j)), std::abs(yn(i, j)));
          err = std::max(err, std::abs(yt(i, j)) / sc);
        }
      }
      if (!std::isfinite(err)) {
        h = 0.1 * hs;
        continue;
      }
      if (err > 1.0) {
        h = hs * std::max(0.2, 0.9 * std::pow(err, -0.2));
        continue;
      }
      t = land ? target : t + hs;
      y.swap(yn);
      k1.swap(k7);
      const double grow = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
      h = land ? std::max(h, hs * grow) : hs * grow;
    }
    while (next < stops.size() && stops[next] <= t * (1.0 + 1e-14)) on_stop(next++, y);
  }
  while (next < stops.size()) on_stop(next++, y);
  return y;
}

double norm1(const Mat& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

double rate_scale(const Segment& seg, const std::vector<Dissipator>& collapse) {
  double r = norm1(seg.hamiltonian.matrix());
  if (seg.drive) r += norm1(seg.drive->matrix());
  for (const auto& c : collapse) r += c.rate * norm1(c.op.matrix().adjoint() * c.op.matrix());
  return r;
}

bool use_exponential(const Segment& seg, const std::vector<Dissipator>& collapse) {
  if (seg.method == Method::kExponential) {
    if (!seg.time_independent()) {
      throw Error(ErrorCode::kInvalidArgument, "exponential propagation needs a time-independent segment");
    }
    return true;
  }
  if (seg.method == Method::kRungeKutta || !seg.time_independent()) return false;
  return seg.hamiltonian.dim() <= 24 && seg.duration * rate_scale(seg, collapse) > 200.0;
}

Operator static_hamiltonian(const Segment& seg) {
  if (seg.drive && seg.envelope == Envelope::kConstant) return seg.hamiltonian + *seg.drive;
  return seg.hamiltonian;
}

template <typename Callback>
Mat propagate_segment(const Segment& seg, const std::vector<Dissipator>& collapse, Mat rho,
                      const std::vector<double>& stops, double rtol, double atol,
                      Callback&& on_stop) {
  if (!use_exponential(seg, collapse)) {
    return integrate_rk45(seg, collapse, std::move(rho), stops, rtol, atol, on_stop);
  }
  const Mat L = liouvillian(static_hamiltonian(seg), collapse);
  std::map<long long, Mat> cache;
  const double quantum = seg.duration * 1e-13;
  auto step = [&](const Mat& r, double dt) {
    if (dt <= 0.0) return r;
    const long long key = std::llround(dt / quantum);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, Mat((L * dt).exp())).first;
    return apply_superoperator(it->second, r);
  };
  double t = 0.0;
  for (std::size_t i = 0; i < stops.size(); ++i) {
    const double s = std::clamp(stops[i], 0.0, seg.duration);
    rho = step(rho, s - t);
    t = s;
    on_stop(i, rho);
  }
  return step(rho, seg.duration - t);
}

void check_segment(const Segment& seg, const qops::CompositeSpace& space) {
  if (!(seg.duration > 0.0)) throw Error(ErrorCode::kInvalidArgument, "segment duration must be positive");
  if (seg.hamiltonian.space() != space) throw Error(ErrorCode::kSpaceMismatch, "Hamiltonian space differs from state");
  const double scale = std::max(1.0, seg.hamiltonian.matrix().cwiseAbs().maxCoeff());
  if (!seg.hamiltonian.is_hermitian(1e-12 * scale)) throw Error(ErrorCode::kNonHermitian, "segment Hamiltonian is not Hermitian");
  if (seg.drive) {
    if (seg.drive->space() != space) throw Error(ErrorCode::kSpaceMismatch, "drive space differs from state");
    const double ds = std::max(1.0, seg.drive->matrix().cwiseAbs().maxCoeff());
    if (!seg.drive->is_hermitian(1e-12 * ds)) throw Error(ErrorCode::kNonHermitian, "drive operator is not Hermitian");
  }
}

}  // namespace

Mat liouvillian(const Operator& H, const std::vector<Dissipator>& collapse) {
  const int n = H.dim();
  const Mat I = Mat::Identity(n, n);
  const Mat& h = H.matrix();
  Mat L = cplx(0.0, -1.0) * (qops::kron(I, h) - qops::kron(h.transpose(), I));
  for (const auto& c : collapse) {
    if (c.rate == 0.0) continue;
    const Mat& A = c.op.matrix();
    const Mat AdA = A.adjoint() * A;
    L += c.rate * (qops::kron(A.conjugate(), A) - 0.5 * qops::kron(I, AdA) -
                   0.5 * qops::kron(AdA.transpose(), I));
  }
  return L;
}

Mat propagator(const Operator& H, const std::vector<Dissipator>& collapse, double t) {
  return (liouvillian(H, collapse) * t).exp();
}

Mat apply_superoperator(const Mat& S, const Mat& rho) {
  const Eigen::Index n = rho.rows();
  Vec v = Eigen::Map<const Vec>(rho.data(), n * n);
  Vec w = S * v;
  return Eigen::Map<Mat>(w.data(), n, n);
}

Mat propagate(const Mat& rho, const Segment& segment, const std::vector<Dissipator>& collapse,
              double rtol, double atol) {
  const std::vector<double> none;
  return propagate_segment(segment, collapse, rho, none, rtol, atol, [](std::size_t, const Mat&) {});
}

Trajectory evolve(const LindbladProblem& problem) {
  if (problem.segments.empty()) throw Error(ErrorCode::kInvalidArgument, "no segments");
  if (!(problem.rtol > 0.0) || !(problem.atol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerances must be positive");
  const auto& space = problem.rho0.space();
  problem.rho0.validate();
  for (const auto& s : problem.segments) check_segment(s, space);
  for (const auto& o : problem.observables)
    if (o.op.space() != space) throw Error(ErrorCode::kSpaceMismatch, "observable '" + o.label + "' space differs");

  double total = 0.0;
  for (const auto& s : problem.segments) total += s.duration;
  std::vector<double> samples = problem.sample_times;
  std::sort(samples.begin(), samples.end());
  for (double s : samples) {
    if (s < 0.0 || s > total * (1.0 + 1e-12)) throw Error(ErrorCode::kInvalidArgument, "sample time outside the sequence");
  }

  Trajectory traj;
  for (const auto& o : problem.observables) traj.labels.push_back(o.label);
  traj.values.assign(problem.observables.size(), {});
  auto record = [&](double t, const Mat& rho) {
    traj.times.push_back(t);
    for (std::size_t k = 0; k < problem.observables.size(); ++k)
      traj.values[k].push_back((problem.observables[k].op.matrix() * rho).trace().real());
  };

  Mat rho = problem.rho0.matrix();
  std::size_t si = 0;
  while (si < samples.size() && samples[si] <= 0.0) record(samples[si++], rho);
  double t0 = 0.0;
  for (std::size_t k = 0; k < problem.segments.size(); ++k) {
    const Segment& seg = problem.segments[k];
    const auto& collapse = seg.collapse ? *seg.collapse : problem.collapse;
    const double t1 = t0 + seg.duration;
    const bool last = k + 1 == problem.segments.size();
    std::vector<double> stops;
    std::vector<double> absolute;
    while (si < samples.size() && (samples[si] < t1 * (1.0 - 1e-14) || (last && samples[si] <= t1 * (1.0 + 1e-12)))) {
      absolute.push_back(samples[si]);
      stops.push_back(std::min(samples[si] - t0, seg.duration));
      ++si;
    }
    const double tr0 = rho.trace().real();
    rho = propagate_segment(seg, collapse, rho, stops, problem.rtol, problem.atol,
                            [&](std::size_t i, const Mat& r) { record(absolute[i], r); });
    const double drift = std::abs(rho.trace().real() - tr0);
    traj.max_trace_drift = std::max(traj.max_trace_drift, drift);
    if (drift > 1e-8) {
      std::ostringstream msg;
      msg << "segment " << k << ": trace drift " << drift;
      traj.warnings.push_back(msg.str());
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -1e-8) {
      std::ostringstream msg;
      msg << "segment " << k << ": eigenvalue " << lmin << " below -1e-8";
      throw Error(ErrorCode::kPositivityViolation, msg.str());
    }
    if (lmin < 0.0) {
      Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
      rho = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
      rho /= rho.trace().real();
      std::ostringstream msg;
      msg << "segment " << k << ": clipped eigenvalue " << lmin;
      traj.warnings.push_back(msg.str());
    }
    t0 = t1;
  }
  traj.final_state = DensityMatrix::unchecked(space, rho);
  return traj;
}

DensityMatrix steady_state(const Operator& H, const std::vector<Dissipator>& collapse) {
  const Mat L = liouvillian(H, collapse);
  const int n = H.dim();
  Eigen::BDCSVD<Mat> svd(L, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::Index m = s.size();
  if (m >= 2 && !(s(m - 2) > 1e3 * s(m - 1))) {
    std::ostringstream msg;
    msg << "Liouvillian null space is not unique (singular values " << s(m - 2) << ", " << s(m - 1) << ")";
    throw Error(ErrorCode::kAmbiguousSteadyState, msg.str());
  }
  Vec v = svd.matrixV().col(m - 1);
  Mat rho = Eigen::Map<Mat>(v.data(), n, n);
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  rho = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::unchecked(H.space(), rho);
}

DecayFit decay_rate_fit(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 8) {
    throw Error(ErrorCode::kFitFailure, "decay fit needs at least 8 samples");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (y[i] <= 0.0) continue;
    const double ly = std::log(y[i]);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    ++m;
  }
  if (m < 2) throw Error(ErrorCode::kFitFailure, "no positive samples to fit");
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  if (!(slope < 0.0)) throw Error(ErrorCode::kFitFailure, "data do not decay");
  const double icpt = (sy - slope * sx) / m;
  Eigen::VectorXd p0(3);
  p0 << std::exp(icpt), -1.0 / slope, 0.0;
  const fitkit::FitResult fr = fitkit::curve_fit(fitkit::exp_decay(), t, y, p0);
  DecayFit out;
  out.amplitude = fr.value("a");
  out.tau = fr.value("tau");
  out.sigma_amplitude = fr.error("a");
  out.sigma_tau = fr.error("tau");
  if (!(out.tau > 0.0) || !std::isfinite(out.tau)) throw Error(ErrorCode::kFitFailure, "non-decaying fit");
  const double span = *std::max_element(t.begin(), t.end()) - *std::min_element(t.begin(), t.end());
  if (span < out.tau) throw Error(ErrorCode::kFitFailure, "samples span less than one decay constant");
  return out;
}

DecayFit decay_rate_fit(const Trajectory& traj, std::string_view label) {
  return decay_rate_fit(traj.times, traj.series(label));
}

}  // namespace cqad::engine
