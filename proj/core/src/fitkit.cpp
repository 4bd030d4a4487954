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

#include "cqad/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <unsupported/Eigen/FFT>

#include <nlohmann/json.hpp>

namespace cqad::fitkit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double FitResult::value(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params(static_cast<Eigen::Index>(i));
  throw Error(ErrorCode::kInvalidArgument, "no fit parameter '" + std::string(name) + "'");
}

double FitResult::error(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return sigma(static_cast<Eigen::Index>(i));
  throw Error(ErrorCode::kInvalidArgument, "no fit parameter '" + std::string(name) + "'");
}

std::string FitResult::to_json() const {
  nlohmann::json j;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    j["params"][names[i]] = params(k);
    j["sigma"][names[i]] = sigma.size() > k ? sigma(k) : 0.0;
  }
  j["residual"] = residual;
  j["converged"] = converged;
  j["n_eval"] = n_eval;
  j["interval_method"] = interval_method;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Nelder-Mead

FitResult nelder_mead(const Objective& objective, const VectorXd& x0,
                      const NelderMeadOptions& options) {
  const Eigen::Index n = x0.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty parameter vector");
  VectorXd scale(n);
  for (Eigen::Index k = 0; k < n; ++k) scale(k) = x0(k) != 0.0 ? std::abs(x0(k)) : 1.0;
  VectorXd step(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (options.initial_step.size() == n) {
      step(k) = options.initial_step(k) / scale(k);
    } else {
      step(k) = x0(k) != 0.0 ? 0.05 : 2.5e-4;
    }
  }

  int evals = 0;
  auto f = [&](const VectorXd& z) {
    if (evals >= options.max_eval && options.throw_on_max_eval) {
      throw Error(ErrorCode::kMaxEvaluations,
                  "Nelder-Mead exceeded " + std::to_string(options.max_eval) + " evaluations");
    }
    ++evals;
    const double v = objective(z.cwiseProduct(scale));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  const VectorXd z0 = x0.cwiseQuotient(scale);
  const double f0 = f(z0);
  if (!std::isfinite(f0)) throw Error(ErrorCode::kInvalidArgument, "objective not finite at x0");
  const double fscale = 1e-20 * std::max(std::abs(f0), 1e-280);

  std::vector<VectorXd> pts(static_cast<std::size_t>(n + 1));
  std::vector<double> vals(static_cast<std::size_t>(n + 1));
  auto build = [&](const VectorXd& base, double fbase) {
    pts[0] = base;
    vals[0] = fbase;
    for (Eigen::Index k = 0; k < n; ++k) {
      VectorXd p = base;
      p(k) += step(k);
      pts[static_cast<std::size_t>(k + 1)] = p;
      vals[static_cast<std::size_t>(k + 1)] = f(p);
    }
  };
  build(z0, f0);

  bool restarted = !options.restart;
  bool exhausted = false;
  std::vector<std::size_t> order(pts.size());
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    {
      std::vector<VectorXd> p2;
      std::vector<double> v2;
      for (auto i : order) {
        p2.push_back(pts[i]);
        v2.push_back(vals[i]);
      }
      pts = std::move(p2);
      vals = std::move(v2);
    }
    double diameter = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      diameter = std::max(diameter, (pts[i] - pts[0]).cwiseAbs().maxCoeff());
    const double spread = vals.back() - vals.front();
    if (evals >= options.max_eval) {
      exhausted = true;
      break;
    }
    if (diameter < options.xtol && spread <= options.ftol * std::abs(vals.front()) + fscale) {
      if (restarted) break;
      restarted = true;
      build(pts[0], vals[0]);
      continue;
    }

    const std::size_t w = pts.size() - 1;
    VectorXd c = VectorXd::Zero(n);
    for (std::size_t i = 0; i < w; ++i) c += pts[i];
    c /= static_cast<double>(n);

    const VectorXd xr = c + options.reflection * (c - pts[w]);
    const double fr = f(xr);
    if (fr < vals[0]) {
      const VectorXd xe = c + options.expansion * (xr - c);
      const double fe = f(xe);
      if (fe < fr) {
        pts[w] = xe;
        vals[w] = fe;
      } else {
        pts[w] = xr;
        vals[w] = fr;
      }
      continue;
    }
    if (fr < vals[w - 1]) {
      pts[w] = xr;
      vals[w] = fr;
      continue;
    }
    bool accepted = false;
    if (fr < vals[w]) {
      const VectorXd xc = c + options.contraction * (xr - c);
      const double fc = f(xc);
      if (fc <= fr) {
        pts[w] = xc;
        vals[w] = fc;
        accepted = true;
      }
    } else {
      const VectorXd xc = c + options.contraction * (pts[w] - c);
      const double fc = f(xc);
      if (fc < vals[w]) {
        pts[w] = xc;
        vals[w] = fc;
        accepted = true;
      }
    }
    if (!accepted) {
      for (std::size_t i = 1; i < pts.size(); ++i) {
        pts[i] = pts[0] + options.shrink * (pts[i] - pts[0]);
        vals[i] = f(pts[i]);
      }
    }
  }

  FitResult r;
  for (Eigen::Index k = 0; k < n; ++k) r.names.push_back("x" + std::to_string(k));
  r.params = pts[0].cwiseProduct(scale);
  r.sigma = VectorXd::Zero(n);
  r.residual = vals[0];
  r.converged = !exhausted;
  r.n_eval = evals;
  return r;
}

// ---------------------------------------------------------------------------
// Model functions

namespace {

const std::vector<std::string>& names_for(ModelKind kind) {
  static const std::vector<std::string> exp_names{"a", "tau", "c"};
  static const std::vector<std::string> sin_names{"a", "tau", "f", "phi", "c"};
  static const std::vector<std::string> cross_names{"g", "slope", "x0", "omega_m"};
  static const std::vector<std::string> lp_names{"A", "gamma1", "B", "alpha"};
  static const std::vector<std::string> lin_names{"m", "c"};
  switch (kind) {
    case ModelKind::kExpDecay:
    case ModelKind::kGaussDecay: return exp_names;
    case ModelKind::kDampedSinusoid: return sin_names;
    case ModelKind::kAvoidedCrossing: return cross_names;
    case ModelKind::kLorentzianPlusPowerLaw: return lp_names;
    case ModelKind::kLinear: return lin_names;
  }
  return lin_names;
}

}  // namespace

const std::vector<std::string>& ModelFn::names() const { return names_for(kind); }

double ModelFn::operator()(const VectorXd& p, double x) const {
  switch (kind) {
    case ModelKind::kExpDecay: return p(0) * std::exp(-x / p(1)) + p(2);
    case ModelKind::kGaussDecay: return p(0) * std::exp(-(x / p(1)) * (x / p(1))) + p(2);
    case ModelKind::kDampedSinusoid:
      return p(0) * std::exp(-x / p(1)) * std::cos(kTwoPi * p(2) * x + p(3)) + p(4);
    case ModelKind::kAvoidedCrossing: return crossing_branch(p(0), p(1), p(2), p(3), x, +1);
    case ModelKind::kLorentzianPlusPowerLaw: {
      const double w = std::abs(x);
      return p(0) * 2.0 * p(1) / (p(1) * p(1) + w * w) + p(2) / std::pow(w, p(3));
    }
    case ModelKind::kLinear: return p(0) * x + p(1);
  }
  return 0.0;
}

ModelFn exp_decay(bool offset) {
  ModelFn m{ModelKind::kExpDecay, {}};
  if (!offset) m.fixed["c"] = 0.0;
  return m;
}

ModelFn gauss_decay(bool offset) {
  ModelFn m{ModelKind::kGaussDecay, {}};
  if (!offset) m.fixed["c"] = 0.0;
  return m;
}

ModelFn damped_sinusoid() { return {ModelKind::kDampedSinusoid, {}}; }
ModelFn lorentzian_plus_powerlaw() { return {ModelKind::kLorentzianPlusPowerLaw, {}}; }
ModelFn linear_model() { return {ModelKind::kLinear, {}}; }

// ---------------------------------------------------------------------------
// Least squares machinery

namespace {

using ResidualFn = std::function<VectorXd(const VectorXd&)>;

MatrixXd numeric_jacobian(const ResidualFn& r, const VectorXd& p, const VectorXd& scale) {
  const VectorXd r0 = r(p);
  MatrixXd J(r0.size(), p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double h = 1e-6 * std::max(std::abs(p(k)), 1e-3 * scale(k));
    VectorXd a = p;
    VectorXd b = p;
    a(k) += h;
    b(k) -= h;
    J.col(k) = (r(a) - r(b)) / (2.0 * h);
  }
  return J;
}

// Levenberg-Marquardt with Marquardt diagonal scaling.
VectorXd levenberg_marquardt(const ResidualFn& r, VectorXd p, const VectorXd& scale,
                             int max_iter = 200) {
  VectorXd res = r(p);
  double cost = res.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    const MatrixXd J = numeric_jacobian(r, p, scale);
    const MatrixXd JtJ = J.transpose() * J;
    const VectorXd g = J.transpose() * res;
    bool improved = false;
    for (int inner = 0; inner < 30; ++inner) {
      MatrixXd A = JtJ;
      for (Eigen::Index k = 0; k < A.rows(); ++k) A(k, k) += lambda * std::max(JtJ(k, k), 1e-300);
      const VectorXd dp = A.ldlt().solve(-g);
      if (!dp.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const VectorXd pn = p + dp;
      const VectorXd rn = r(pn);
      const double cn = rn.allFinite() ? rn.squaredNorm() : std::numeric_limits<double>::infinity();
      if (cn <= cost) {
        const double rel = (cost - cn) / std::max(cost, 1e-300);
        const double step = (dp.cwiseAbs().array() / (p.cwiseAbs().array() + 1e-12 * scale.array())).maxCoeff();
        p = pn;
        res = rn;
        cost = cn;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (rel < 1e-15 || step < 1e-13) return p;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return p;
}

}  // namespace

FitResult curve_fit(const ModelFn& model, const std::vector<double>& x,
                    const std::vector<double>& y, const VectorXd& p0,
                    const CurveFitOptions& options) {
  const auto& names = model.names();
  if (p0.size() != static_cast<Eigen::Index>(names.size())) {
    throw Error(ErrorCode::kInvalidArgument, "initial parameter vector has wrong length");
  }
  if (x.size() != y.size() || x.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "x and y must be nonempty and equal length");
  }
  std::vector<Eigen::Index> free;
  VectorXd full = p0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto it = model.fixed.find(names[i]);
    if (it == model.fixed.end()) {
      free.push_back(static_cast<Eigen::Index>(i));
    } else {
      full(static_cast<Eigen::Index>(i)) = it->second;
    }
  }
  const auto nf = static_cast<Eigen::Index>(free.size());
  auto expand = [&](const VectorXd& q) {
    VectorXd p = full;
    for (Eigen::Index k = 0; k < nf; ++k) p(free[static_cast<std::size_t>(k)]) = q(k);
    return p;
  };
  auto make_residual = [&](const std::vector<double>& yy) -> ResidualFn {
    return [&, yy](const VectorXd& q) {
      const VectorXd p = expand(q);
      VectorXd r(static_cast<Eigen::Index>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) r(static_cast<Eigen::Index>(i)) = model(p, x[i]) - yy[i];
      return r;
    };
  };
  const ResidualFn residual = make_residual(y);

  VectorXd q0(nf);
  VectorXd scale(nf);
  for (Eigen::Index k = 0; k < nf; ++k) {
    q0(k) = p0(free[static_cast<std::size_t>(k)]);
    scale(k) = q0(k) != 0.0 ? std::abs(q0(k)) : 1.0;
  }
  // The simplex runs on parameters normalized by their initial magnitudes; the
  // Levenberg-Marquardt polish follows even when it stops at max_eval.
  NelderMeadOptions nm = options.simplex;
  nm.xtol = std::max(nm.xtol, 1e-9);
  nm.throw_on_max_eval = false;
  if (nm.initial_step.size() == nf) nm.initial_step = nm.initial_step.cwiseQuotient(scale);
  FitResult simplex = nelder_mead(
      [&](const VectorXd& u) { return residual(u.cwiseProduct(scale)).squaredNorm(); },
      q0.cwiseQuotient(scale), nm);
  VectorXd q = levenberg_marquardt(residual, simplex.params.cwiseProduct(scale), scale);
  const VectorXd r = residual(q);
  const double ssr = r.squaredNorm();

  FitResult out;
  out.names = names;
  out.params = expand(q);
  out.sigma = VectorXd::Zero(static_cast<Eigen::Index>(names.size()));
  out.residual = ssr;
  out.converged = true;
  out.n_eval = simplex.n_eval;

  const auto m = static_cast<Eigen::Index>(x.size());
  const double s2 = m > nf ? ssr / static_cast<double>(m - nf) : 0.0;
  const MatrixXd J = numeric_jacobian(residual, q, scale);
  Eigen::JacobiSVD<MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  const bool singular = sv.size() == 0 || sv(sv.size() - 1) <= 1e-10 * sv(0);
  if (!singular) {
    const MatrixXd cov = s2 * (J.transpose() * J).inverse();
    for (Eigen::Index k = 0; k < nf; ++k)
      out.sigma(free[static_cast<std::size_t>(k)]) = std::sqrt(std::max(cov(k, k), 0.0));
    out.interval_method = "jacobian";
  } else {
    std::mt19937_64 rng(options.bootstrap_seed);
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    std::vector<VectorXd> draws;
    VectorXd fitted(m);
    const VectorXd pf = expand(q);
    for (Eigen::Index i = 0; i < m; ++i) fitted(i) = model(pf, x[static_cast<std::size_t>(i)]);
    for (int b = 0; b < options.bootstrap_resamples; ++b) {
      std::vector<double> yb(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) yb[i] = fitted(static_cast<Eigen::Index>(i)) - r(static_cast<Eigen::Index>(pick(rng)));
      draws.push_back(levenberg_marquardt(make_residual(yb), q, scale, 50));
    }
    for (Eigen::Index k = 0; k < nf; ++k) {
      double mean = 0.0;
      for (const auto& d : draws) mean += d(k);
      mean /= static_cast<double>(draws.size());
      double var = 0.0;
      for (const auto& d : draws) var += (d(k) - mean) * (d(k) - mean);
      var /= static_cast<double>(std::max<std::size_t>(draws.size() - 1, 1));
      out.sigma(free[static_cast<std::size_t>(k)]) = std::sqrt(var);
    }
    out.interval_method = "bootstrap";
  }
  return out;
}

LinearFit linear_least_squares(const MatrixXd& A, const VectorXd& y) {
  if (A.rows() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "design rows != data length");
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
  LinearFit f;
  f.coef = qr.solve(y);
  const VectorXd r = A * f.coef - y;
  f.residual = r.squaredNorm();
  const double dof = static_cast<double>(std::max<Eigen::Index>(A.rows() - A.cols(), 1));
  f.covariance = (f.residual / dof) * (A.transpose() * A).inverse();
  return f;
}

VectorXd nnls(const MatrixXd& A, const VectorXd& y, int max_iter) {
  const Eigen::Index n = A.cols();
  if (A.rows() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "design rows != data length");
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 10);
  VectorXd x = VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff()) *
                     static_cast<double>(A.rows());
  auto solve_passive = [&](VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < n; ++k)
      if (passive[static_cast<std::size_t>(k)]) idx.push_back(k);
    MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) Ap.col(static_cast<Eigen::Index>(i)) = A.col(idx[i]);
    const VectorXd s = Ap.colPivHouseholderQr().solve(y);
    z = VectorXd::Zero(n);
    for (std::size_t i = 0; i < idx.size(); ++i) z(idx[i]) = s(static_cast<Eigen::Index>(i));
  };
  for (int it = 0; it < max_iter; ++it) {
    const VectorXd w = A.transpose() * (y - A * x);
    Eigen::Index t = -1;
    double best = tol;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!passive[static_cast<std::size_t>(k)] && w(k) > best) {
        best = w(k);
        t = k;
      }
    }
    if (t < 0) break;
    passive[static_cast<std::size_t>(t)] = true;
    VectorXd z;
    for (int inner = 0; inner < max_iter; ++inner) {
      solve_passive(z);
      bool ok = true;
      for (Eigen::Index k = 0; k < n; ++k)
        if (passive[static_cast<std::size_t>(k)] && z(k) <= 0.0) ok = false;
      if (ok) break;
      double alpha = 1.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (passive[static_cast<std::size_t>(k)] && z(k) <= 0.0) {
          alpha = std::min(alpha, x(k) / (x(k) - z(k)));
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index k = 0; k < n; ++k) {
        if (passive[static_cast<std::size_t>(k)] && x(k) <= 1e-15) {
          passive[static_cast<std::size_t>(k)] = false;
          x(k) = 0.0;
        }
      }
    }
    x = z;
  }
  return x;
}

SimplexLsq nnls_simplex(const MatrixXd& A, const VectorXd& y) {
  const Eigen::Index n = A.cols();
  if (A.rows() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "design rows != data length");
  if (n == 0) throw Error(ErrorCode::kInfeasible, "no variables");

  // Equality-constrained least squares on the passive set by eliminating one variable.
  auto solve_passive = [&](const std::vector<Eigen::Index>& P) {
    VectorXd z = VectorXd::Zero(n);
    if (P.size() == 1) {
      z(P[0]) = 1.0;
      return z;
    }
    const VectorXd ap = A.col(P[0]);
    MatrixXd B(A.rows(), static_cast<Eigen::Index>(P.size() - 1));
    for (std::size_t i = 1; i < P.size(); ++i) B.col(static_cast<Eigen::Index>(i - 1)) = A.col(P[i]) - ap;
    const VectorXd s = B.colPivHouseholderQr().solve(y - ap);
    z(P[0]) = 1.0 - s.sum();
    for (std::size_t i = 1; i < P.size(); ++i) z(P[i]) = s(static_cast<Eigen::Index>(i - 1));
    return z;
  };

  Eigen::Index j0 = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r = (A.col(k) - y).squaredNorm();
    if (r < best) {
      best = r;
      j0 = k;
    }
  }
  VectorXd x = VectorXd::Zero(n);
  x(j0) = 1.0;
  std::vector<Eigen::Index> P{j0};
  const double tol = 1e-13 * std::max(1.0, A.cwiseAbs().maxCoeff()) *
                     std::max(1.0, A.cwiseAbs().maxCoeff() + y.cwiseAbs().maxCoeff()) *
                     static_cast<double>(A.rows());
  int iterations = 0;
  std::vector<bool> blocked(static_cast<std::size_t>(n), false);
  const int max_outer = static_cast<int>(4 * n + 20);
  for (int outer = 0; outer < max_outer; ++outer) {
    ++iterations;
    const VectorXd w = A.transpose() * (y - A * x);
    double mu = 0.0;
    for (auto p : P) mu += w(p);
    mu /= static_cast<double>(P.size());
    Eigen::Index t = -1;
    double gain = tol;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::find(P.begin(), P.end(), k) != P.end() || blocked[static_cast<std::size_t>(k)]) continue;
      if (w(k) - mu > gain) {
        gain = w(k) - mu;
        t = k;
      }
    }
    if (t < 0) break;
    P.push_back(t);
    bool added = true;
    for (int inner = 0; inner < max_outer; ++inner) {
      const VectorXd z = solve_passive(P);
      bool ok = true;
      for (auto p : P)
        if (z(p) <= 0.0) ok = false;
      if (ok) {
        x = z;
        break;
      }
      if (added && z(t) <= 0.0) {
        // Round-off rejected the entering variable; exclude it for this sweep.
        P.pop_back();
        blocked[static_cast<std::size_t>(t)] = true;
        break;
      }
      added = false;
      double alpha = 1.0;
      for (auto p : P)
        if (z(p) <= 0.0) alpha = std::min(alpha, x(p) / (x(p) - z(p)));
      x += alpha * (z - x);
      std::vector<Eigen::Index> keep;
      for (auto p : P) {
        if (x(p) > 1e-15) {
          keep.push_back(p);
        } else {
          x(p) = 0.0;
        }
      }
      P = keep;
      x /= x.sum();
    }
    if (!added) std::fill(blocked.begin(), blocked.end(), false);
  }
  for (Eigen::Index k = 0; k < n; ++k) x(k) = std::max(0.0, x(k));
  x /= x.sum();
  SimplexLsq out;
  out.x = x;
  out.residual = (A * x - y).norm();
  out.iterations = iterations;
  return out;
}

// ---------------------------------------------------------------------------
// Avoided crossing

double crossing_branch(double g, double slope, double x0, double omega_m, double x, int sign) {
  const double wt = omega_m + kTwoPi * slope * (x - x0);
  const double half = 0.5 * (wt - omega_m);
  return 0.5 * (omega_m + wt) + (sign >= 0 ? 1.0 : -1.0) * std::sqrt(half * half + g * g);
}

AvoidedCrossingFit fit_avoided_crossing(const std::vector<CrossingPoint>& points) {
  if (points.size() < 5) throw Error(ErrorCode::kUnidentifiable, "too few crossing points");
  double xmin = points[0].control;
  double xmax = xmin;
  for (const auto& p : points) {
    xmin = std::min(xmin, p.control);
    xmax = std::max(xmax, p.control);
  }
  const double xspan = xmax - xmin;
  if (xspan <= 0.0) throw Error(ErrorCode::kUnidentifiable, "no control spread");

  // Group by control value.
  std::vector<CrossingPoint> sorted = points;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.control < b.control; });
  struct Group {
    double x;
    double lo;
    double hi;
    int count;
  };
  std::vector<Group> groups;
  for (const auto& p : sorted) {
    if (!groups.empty() && std::abs(p.control - groups.back().x) <= 1e-12 * xspan) {
      auto& g = groups.back();
      g.lo = std::min(g.lo, p.omega);
      g.hi = std::max(g.hi, p.omega);
      ++g.count;
    } else {
      groups.push_back({p.control, p.omega, p.omega, 1});
    }
  }
  std::vector<double> om;
  for (const auto& p : points) om.push_back(p.omega);
  std::nth_element(om.begin(), om.begin() + static_cast<long>(om.size() / 2), om.end());
  double wc0 = om[om.size() / 2];
  double x00 = 0.5 * (xmin + xmax);
  double g0 = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& g : groups) {
    if (g.count >= 2 && g.hi - g.lo < min_gap) {
      min_gap = g.hi - g.lo;
      x00 = g.x;
      wc0 = 0.5 * (g.hi + g.lo);
    }
  }
  if (std::isfinite(min_gap)) g0 = 0.5 * min_gap;
  auto far = [&](const Group& g) { return std::abs(g.hi - wc0) > std::abs(g.lo - wc0) ? g.hi : g.lo; };
  double s0 = (far(groups.back()) - far(groups.front())) / (kTwoPi * xspan);
  if (s0 == 0.0) s0 = 1.0;
  const double wscale = std::max({std::abs(g0), std::abs(kTwoPi * s0 * xspan) * 0.01, 1.0});

  auto objective = [&](const VectorXd& p) {
    double s = 0.0;
    for (const auto& q : points) {
      const double up = crossing_branch(p(0), p(1), p(2), p(3), q.control, +1) - q.omega;
      const double dn = crossing_branch(p(0), p(1), p(2), p(3), q.control, -1) - q.omega;
      const double r = std::min(std::abs(up), std::abs(dn)) / wscale;
      s += r * r;
    }
    return s;
  };

  FitResult best;
  best.residual = std::numeric_limits<double>::infinity();
  NelderMeadOptions nm;
  nm.xtol = 1e-11;
  nm.max_eval = 40000;
  nm.throw_on_max_eval = false;
  for (double gf : {1.0, 0.5, 2.0}) {
    const double gs = g0 > 0.0 ? g0 * gf : wscale * gf;
    VectorXd p0(4);
    p0 << gs, s0, x00, wc0;
    nm.initial_step = VectorXd(4);
    nm.initial_step << 0.2 * gs, 0.1 * std::abs(s0), 0.02 * xspan, 0.2 * gs;
    FitResult r = nelder_mead(objective, p0, nm);
    if (r.residual < best.residual) best = r;
  }
  VectorXd p = best.params;
  p(0) = std::abs(p(0));

  // Fixed branch assignment at the optimum for the covariance.
  std::vector<int> branch;
  int nup = 0;
  int ndn = 0;
  bool left = false;
  bool right = false;
  for (const auto& q : points) {
    const double up = std::abs(crossing_branch(p(0), p(1), p(2), p(3), q.control, +1) - q.omega);
    const double dn = std::abs(crossing_branch(p(0), p(1), p(2), p(3), q.control, -1) - q.omega);
    branch.push_back(up <= dn ? 1 : -1);
    (up <= dn ? nup : ndn)++;
    if (q.control < p(2)) left = true;
    if (q.control > p(2)) right = true;
  }
  if (nup < 2 || ndn < 2 || !left || !right) {
    throw Error(ErrorCode::kUnidentifiable, "data do not cover both branches on both sides of the crossing");
  }
  const ResidualFn res = [&](const VectorXd& v) {
    VectorXd r(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i)
      r(static_cast<Eigen::Index>(i)) =
          crossing_branch(v(0), v(1), v(2), v(3), points[i].control, branch[i]) - points[i].omega;
    return r;
  };
  VectorXd scale(4);
  scale << wscale, std::abs(s0), xspan, std::abs(wc0) > 0 ? std::abs(wc0) : 1.0;
  if (p(0) > 1e-6 * wscale) p = levenberg_marquardt(res, p, scale);
  p(0) = std::abs(p(0));
  const VectorXd r = res(p);
  const double ssr = r.squaredNorm();
  const auto m = static_cast<double>(points.size());
  const double s2 = ssr / std::max(m - 4.0, 1.0);
  const MatrixXd J = numeric_jacobian(res, p, scale);
  Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd sv = svd.singularValues();
  // Pseudo-inverse covariance; directions with vanishing curvature get the bootstrap-free bound.
  MatrixXd cov = MatrixXd::Zero(4, 4);
  bool singular = false;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > 1e-10 * sv(0)) {
      cov += svd.matrixV().col(k) * svd.matrixV().col(k).transpose() * (s2 / (sv(k) * sv(k)));
    } else {
      singular = true;
    }
  }
  AvoidedCrossingFit out;
  out.g = p(0);
  out.slope = p(1);
  out.x0 = p(2);
  out.omega_m = p(3);
  out.sigma_slope = std::sqrt(std::max(cov(1, 1), 0.0));
  out.sigma_x0 = std::sqrt(std::max(cov(2, 2), 0.0));
  if (singular) {
    // Residual bootstrap with label-free refits.
    std::mt19937_64 rng(0);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::vector<VectorXd> draws;
    NelderMeadOptions bnm = nm;
    bnm.max_eval = 8000;
    bnm.initial_step = VectorXd(4);
    bnm.initial_step << 0.2 * std::max(p(0), 0.1 * wscale), 0.01 * std::abs(p(1)), 0.01 * xspan,
        0.2 * std::max(p(0), 0.1 * wscale);
    for (int b = 0; b < 100; ++b) {
      std::vector<CrossingPoint> pb = points;
      for (std::size_t i = 0; i < pb.size(); ++i) pb[i].omega = points[i].omega - r(static_cast<Eigen::Index>(i)) + r(static_cast<Eigen::Index>(pick(rng)));
      auto ob = [&](const VectorXd& v) {
        double s = 0.0;
        for (const auto& q : pb) {
          const double up = crossing_branch(v(0), v(1), v(2), v(3), q.control, +1) - q.omega;
          const double dn = crossing_branch(v(0), v(1), v(2), v(3), q.control, -1) - q.omega;
          const double e = std::min(std::abs(up), std::abs(dn)) / wscale;
          s += e * e;
        }
        return s;
      };
      VectorXd pp = p;
      if (pp(0) == 0.0) pp(0) = 0.1 * wscale;
      VectorXd d = nelder_mead(ob, pp, bnm).params;
      d(0) = std::abs(d(0));
      draws.push_back(d);
    }
    VectorXd mean = VectorXd::Zero(4);
    for (const auto& d : draws) mean += d;
    mean /= static_cast<double>(draws.size());
    cov.setZero();
    for (const auto& d : draws) cov += (d - mean) * (d - mean).transpose();
    cov /= static_cast<double>(draws.size() - 1);
    // Root-mean-square spread about zero for the coupling, which is bounded below by 0.
    double g2 = 0.0;
    for (const auto& d : draws) g2 += d(0) * d(0);
    out.sigma_g = std::sqrt(g2 / static_cast<double>(draws.size()));
    out.sigma_slope = std::sqrt(std::max(cov(1, 1), 0.0));
    out.sigma_x0 = std::sqrt(std::max(cov(2, 2), 0.0));
    out.fit.interval_method = "bootstrap";
  } else {
    out.sigma_g = std::sqrt(std::max(cov(0, 0), 0.0));
    out.fit.interval_method = "jacobian";
  }
  out.fit.names = names_for(ModelKind::kAvoidedCrossing);
  out.fit.params = p;
  out.fit.sigma = VectorXd(4);
  out.fit.sigma << out.sigma_g, out.sigma_slope, out.sigma_x0, std::sqrt(std::max(cov(3, 3), 0.0));
  out.fit.residual = ssr;
  out.fit.converged = true;
  out.fit.n_eval = best.n_eval;
  return out;
}

// ---------------------------------------------------------------------------
// Fringes

FringeFit fit_fringes(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n < 8 || y.size() != n) throw Error(ErrorCode::kTooFewSamples, "fringe fit needs >= 8 samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * dt) {
      throw Error(ErrorCode::kInvalidArgument, "fringe samples must be uniformly spaced");
    }
  }
  const double span = t.back() - t.front();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  FringeFit out;
  if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
    out.offset = mean;
    out.amplitude = 0.0;
    out.frequency_identifiable = false;
    return out;
  }

  std::size_t npad = 1;
  while (npad < 8 * n) npad <<= 1;
  std::vector<double> buf(npad, 0.0);
  for (std::size_t i = 0; i < n; ++i) buf[i] = y[i] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, buf);
  std::size_t k = 1;
  double peak = 0.0;
  for (std::size_t i = 1; i < npad / 2; ++i) {
    if (std::abs(spec[i]) > peak) {
      peak = std::abs(spec[i]);
      k = i;
    }
  }
  double kk = static_cast<double>(k);
  if (k > 1 && k + 1 < npad / 2) {
    const double a = std::abs(spec[k - 1]);
    const double b = std::abs(spec[k]);
    const double c = std::abs(spec[k + 1]);
    const double den = a - 2.0 * b + c;
    if (den != 0.0) kk += 0.5 * (a - c) / den;
  }
  const double f0 = kk / (static_cast<double>(npad) * dt);
  if (f0 * span < 3.0 || f0 > 0.45 / dt) {
    throw Error(ErrorCode::kUndersampled, "fewer than 3 resolved periods below Nyquist");
  }

  MatrixXd A(static_cast<Eigen::Index>(n), 3);
  VectorXd yy(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    A(r, 0) = 1.0;
    A(r, 1) = std::cos(kTwoPi * f0 * (t[i] - t[0]));
    A(r, 2) = std::sin(kTwoPi * f0 * (t[i] - t[0]));
    yy(r) = y[i];
  }
  const VectorXd c = A.colPivHouseholderQr().solve(yy);
  const double amp = std::hypot(c(1), c(2));
  const double phi = std::atan2(-c(2), c(1)) - kTwoPi * f0 * t[0];

  VectorXd p0(5);
  p0 << amp, 2.0 * span, f0, std::remainder(phi, kTwoPi), c(0);
  if (p0(3) == 0.0) p0(3) = 1e-3;
  if (p0(4) == 0.0) p0(4) = 1e-3 * amp;
  CurveFitOptions opt;
  FitResult fr = curve_fit(damped_sinusoid(), t, y, p0, opt);
  double a = fr.params(0);
  double ph = fr.params(3);
  double f = fr.params(2);
  if (f < 0) {
    f = -f;
    ph = -ph;
  }
  if (a < 0) {
    a = -a;
    ph += kPi;
  }
  out.frequency = f;
  out.decay = fr.params(1);
  out.phase = std::remainder(ph, kTwoPi);
  out.amplitude = a;
  out.offset = fr.params(4);
  out.sigma_frequency = fr.sigma(2);
  out.fit = fr;
  return out;
}

DecayShape select_decay_model(const std::vector<double>& t, const std::vector<double>& y) {
  const double span = t.back() - t.front();
  VectorXd p0(3);
  p0 << std::max(y.front(), 1e-12), 0.5 * span, 0.0;
  const double re = curve_fit(exp_decay(), t, y, p0).residual;
  const double rg = curve_fit(gauss_decay(), t, y, p0).residual;
  return re <= rg ? DecayShape::kExponential : DecayShape::kGaussian;
}

namespace {

// Averages log S in logarithmically spaced bins.
void log_bins(const std::vector<double>& omega, const std::vector<double>& S, double lo,
              double hi, int per_decade, std::vector<double>& lw, std::vector<double>& ls) {
  const int nb = std::max(1, static_cast<int>(std::ceil(per_decade * std::log10(hi / lo))));
  std::vector<double> sw(static_cast<std::size_t>(nb), 0.0);
  std::vector<double> ss(static_cast<std::size_t>(nb), 0.0);
  std::vector<int> cnt(static_cast<std::size_t>(nb), 0);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] < lo || omega[i] > hi || S[i] <= 0.0) continue;
    int b = static_cast<int>(std::floor(nb * std::log(omega[i] / lo) / std::log(hi / lo)));
    b = std::clamp(b, 0, nb - 1);
    sw[static_cast<std::size_t>(b)] += std::log(omega[i]);
    ss[static_cast<std::size_t>(b)] += std::log(S[i]);
    ++cnt[static_cast<std::size_t>(b)];
  }
  for (int b = 0; b < nb; ++b) {
    const auto u = static_cast<std::size_t>(b);
    if (cnt[u] == 0) continue;
    lw.push_back(sw[u] / cnt[u]);
    ls.push_back(ss[u] / cnt[u]);
  }
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<double>& omega, const std::vector<double>& S,
                          double omega_lo, double omega_hi) {
  std::vector<double> lw;
  std::vector<double> ls;
  log_bins(omega, S, omega_lo, omega_hi, 10, lw, ls);
  if (lw.size() < 3) throw Error(ErrorCode::kTooFewSamples, "power-law band holds too few points");
  MatrixXd A(static_cast<Eigen::Index>(lw.size()), 2);
  VectorXd yv(static_cast<Eigen::Index>(lw.size()));
  for (std::size_t i = 0; i < lw.size(); ++i) {
    A(static_cast<Eigen::Index>(i), 0) = lw[i];
    A(static_cast<Eigen::Index>(i), 1) = 1.0;
    yv(static_cast<Eigen::Index>(i)) = ls[i];
  }
  const LinearFit lf = linear_least_squares(A, yv);
  PowerLawFit out;
  out.alpha = -lf.coef(0);
  out.sigma_alpha = std::sqrt(std::max(lf.covariance(0, 0), 0.0));
  out.amplitude = std::exp(lf.coef(1));
  return out;
}

LorentzianFit fit_lorentzian(const std::vector<double>& omega, const std::vector<double>& S) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] > 0.0 && S[i] > 0.0) {
      lo = std::min(lo, omega[i]);
      hi = std::max(hi, omega[i]);
    }
  }
  std::vector<double> lw;
  std::vector<double> ls;
  log_bins(omega, S, lo, hi * (1.0 + 1e-12), 12, lw, ls);
  if (lw.size() < 5) throw Error(ErrorCode::kTooFewSamples, "Lorentzian fit needs a wider band");
  const double plateau = std::exp(ls.front());
  double gamma0 = std::exp(lw.back());
  for (std::size_t i = 0; i < lw.size(); ++i) {
    if (std::exp(ls[i]) < 0.5 * plateau) {
      gamma0 = std::exp(lw[i]);
      break;
    }
  }
  const double floor0 = std::max(std::exp(ls.back()) * 0.5, plateau * 1e-8);
  auto objective = [&](const VectorXd& p) {
    const double A = std::exp(p(0));
    const double g = std::exp(p(1));
    const double fl = std::exp(p(2));
    double s = 0.0;
    for (std::size_t i = 0; i < lw.size(); ++i) {
      const double w = std::exp(lw[i]);
      const double model = A * 2.0 * g / (g * g + w * w) + fl;
      const double r = std::log(model) - ls[i];
      s += r * r;
    }
    return s;
  };
  VectorXd p0(3);
  p0 << std::log(plateau * gamma0 / 2.0), std::log(gamma0), std::log(floor0);
  NelderMeadOptions nm;
  nm.initial_step = VectorXd::Constant(3, 0.5);
  nm.xtol = 1e-9;
  FitResult r = nelder_mead(objective, p0, nm);
  LorentzianFit out;
  out.amplitude = std::exp(r.params(0));
  out.gamma1 = std::exp(r.params(1));
  out.floor = std::exp(r.params(2));
  r.names = {"log_A", "log_gamma1", "log_floor"};
  out.fit = r;
  return out;
}

}  // namespace cqad::fitkit
