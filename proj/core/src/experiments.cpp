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


#include "cqad/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqad/fitkit.hpp"
#include "cqad/parallel.hpp"
#include "cqad/tomography.hpp"

namespace cqad::experiments {

using model::DeviceSpec;
using qops::DensityMatrix;
using qops::Operator;

std::vector<std::size_t> ScanResult::shape() const {
  std::vector<std::size_t> s;
  for (const auto& a : axes) s.push_back(a.values.size());
  return s;
}

std::vector<std::size_t> ScanResult::unravel(std::size_t flat) const {
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t k = axes.size(); k-- > 0;) {
    const std::size_t n = axes[k].values.size();
    idx[k] = flat % n;
    flat /= n;
  }
  return idx;
}

void ScanResult::validate() const {
  std::size_t n = 1;
  for (const auto& a : axes) {
    if (a.values.empty()) throw Error(ErrorCode::kInvalidArgument, "axis " + a.name + " is empty");
    n *= a.values.size();
  }
  if (values.size() != n) throw Error(ErrorCode::kDimensionMismatch, "values do not match the grid");
  if (seed_map.size() != n) throw Error(ErrorCode::kDimensionMismatch, "seed map does not match the grid");
}

void ScanResult::write_csv(std::ostream& os) const {
  validate();
  for (const auto& a : axes) os << a.name << ',';
  os << value_name << ",seed\n";
  os << std::setprecision(12);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto idx = unravel(i);
    for (std::size_t k = 0; k < axes.size(); ++k) os << axes[k].values[idx[k]] << ',';
    os << values[i] << ',' << seed_map[i] << '\n';
  }
}

ScanResult run_scan(std::vector<Axis> axes, std::uint64_t master_seed, unsigned workers,
                    const PointFn& fn, std::string value_name) {
  ScanResult out;
  out.axes = std::move(axes);
  out.value_name = std::move(value_name);
  std::size_t n = 1;
  for (const auto& a : out.axes) {
    if (a.values.empty()) throw Error(ErrorCode::kInvalidArgument, "axis " + a.name + " is empty");
    n *= a.values.size();
  }
  out.values.assign(n, 0.0);
  out.seed_map.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.seed_map[i] = stream_seed(master_seed, i);
  parallel_for(n, workers, [&](std::size_t i) { out.values[i] = fn(out.unravel(i), out.seed_map[i]); });
  return out;
}

const char* to_string(StepKind kind) {
  switch (kind) {
    case StepKind::kSetDetuning: return "set_detuning";
    case StepKind::kPiPulse: return "pi_pulse";
    case StepKind::kHalfPiPulse: return "half_pi_pulse";
    case StepKind::kWait: return "wait";
    case StepKind::kSwap: return "swap";
    case StepKind::kDisplace: return "displace";
    case StepKind::kMeasure: return "measure";
  }
  return "unknown";
}

PulseSequence& PulseSequence::set_detuning(double detuning) {
  Step s;
  s.kind = StepKind::kSetDetuning;
  s.amplitude = detuning;
  steps.push_back(s);
  return *this;
}

PulseSequence& PulseSequence::pi_pulse(double phase, std::string target) {
  Step s;
  s.kind = StepKind::kPiPulse;
  s.phase = phase;
  s.target = std::move(target);
  steps.push_back(s);
  return *this;
}

PulseSequence& PulseSequence::half_pi_pulse(double phase, std::string target) {
  Step s;
  s.kind = StepKind::kHalfPiPulse;
  s.phase = phase;
  s.target = std::move(target);
  steps.push_back(s);
  return *this;
}

PulseSequence& PulseSequence::wait(double duration) {
  Step s;
  s.kind = StepKind::kWait;
  s.duration = duration;
  steps.push_back(s);
  return *this;
}

PulseSequence& PulseSequence::swap(double duration) {
  Step s;
  s.kind = StepKind::kSwap;
  s.duration = duration;
  steps.push_back(s);
  return *this;
}

PulseSequence& PulseSequence::displace(cplx alpha) {
  Step s;
  s.kind = StepKind::kDisplace;
  s.amplitude = std::abs(alpha);
  s.phase = std::arg(alpha);
  s.target = model::mech_label(0);
  steps.push_back(s);
  return *this;
}

PulseSequence& PulseSequence::measure() {
  Step s;
  s.kind = StepKind::kMeasure;
  steps.push_back(s);
  return *this;
}

void PulseSequence::validate() const {
  if (steps.empty()) throw Error(ErrorCode::kInvalidArgument, "empty pulse sequence");
  if (steps.back().kind != StepKind::kMeasure) {
    throw Error(ErrorCode::kInvalidArgument, "pulse sequence must end with measure");
  }
  for (const auto& s : steps) {
    if (!(s.duration >= 0.0) || !std::isfinite(s.duration)) {
      throw Error(ErrorCode::kInvalidArgument, std::string(to_string(s.kind)) + ": invalid duration");
    }
    if ((s.kind == StepKind::kPiPulse || s.kind == StepKind::kHalfPiPulse) &&
        s.target != model::kQubit && s.target != "qubit_ef") {
      throw Error(ErrorCode::kUnknownLabel, "pulse target " + s.target);
    }
  }
}

DeviceSpec single_device(const DeviceSpec& dev, std::size_t mech) {
  if (mech >= dev.mechanics.size()) throw Error(ErrorCode::kInvalidArgument, "oscillator index out of range");
  return dev.qubit_at(mech).with_mechanics({mech});
}

double swap_time(const DeviceSpec& dev, std::size_t mech) {
  const double g = model::g_em(dev.mechanics.at(mech), dev.V_dc);
  if (g <= 0.0) throw Error(ErrorCode::kInvalidArgument, "swap needs a nonzero coupling");
  return kPi / (2.0 * g);
}

namespace {

Mat qubit_thermal(int levels, double p) {
  Mat r = Mat::Zero(levels, levels);
  if (levels == 2) {
    r(0, 0) = 1.0 - p;
    r(1, 1) = p;
    return r;
  }
  const double q = p / (1.0 - p);
  const double z = 1.0 + q + q * q;
  r(0, 0) = 1.0 / z;
  r(1, 1) = q / z;
  r(2, 2) = q * q / z;
  return r;
}

// exp(-i theta/2 (e^{i phi}|hi><lo| + h.c.)) on the qubit ladder.
Mat qubit_rotation(int levels, int lo, double theta, double phi) {
  Mat u = Mat::Identity(levels, levels);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const cplx e = std::polar(1.0, phi);
  u(lo, lo) = c;
  u(lo + 1, lo + 1) = c;
  u(lo + 1, lo) = cplx(0.0, -1.0) * s * e;
  u(lo, lo + 1) = cplx(0.0, -1.0) * s * std::conj(e);
  return u;
}

DensityMatrix default_initial(const DeviceSpec& single, const RunOptions& o) {
  const auto space = model::make_space(single);
  const double p = o.initial_qubit_pop.value_or(single.transmon.thermal_pop);
  return qops::product_state(space, {qubit_thermal(single.transmon.levels, p),
                                     qops::thermal_state(single.fock_dim, single.mechanics[0].thermal_pop)});
}

class Executor {
 public:
  Executor(const DeviceSpec& single, const RunOptions& o)
      : dev_(single), space_(model::make_space(single)), omega_ref_(single.mechanics[0].omega_m + o.frame_offset) {
    model::CollapseOptions co;
    co.qubit_thermal_pop = o.qubit_bath_pop;
    collapse_ = model::collapse_ops(single, co);
    swap_ = swap_time(single, 0);
    pe_ = qops::embed(qops::projector(single.transmon.levels, 1), space_, model::kQubit).matrix();
  }

  enum class OpKind { kSuper, kUnitary, kNoise, kMeasure };
  struct Op {
    OpKind kind;
    const Mat* super = nullptr;
    Mat unitary;
    std::size_t interval = 0;
  };

  struct Program {
    std::vector<Op> ops;
    std::vector<double> query;  // interval start/end times for the noise phase
  };

  Program compile(const PulseSequence& seq) {
    seq.validate();
    Program prog;
    double detuning = 0.0;
    double t = 0.0;
    const int nq = dev_.transmon.levels;
    for (const auto& s : seq.steps) {
      switch (s.kind) {
        case StepKind::kSetDetuning: detuning = s.amplitude; break;
        case StepKind::kWait:
          if (s.duration > 0.0) {
            prog.ops.push_back({OpKind::kSuper, &evolution(detuning, s.duration), {}, 0});
            prog.ops.push_back({OpKind::kNoise, nullptr, {}, prog.query.size() / 2});
            prog.query.push_back(t);
            prog.query.push_back(t + s.duration);
            t += s.duration;
          }
          break;
        case StepKind::kSwap: {
          const double d = s.duration > 0.0 ? s.duration : swap_;
          prog.ops.push_back({OpKind::kSuper, &evolution(0.0, d), {}, 0});
          t += d;
          break;
        }
        case StepKind::kPiPulse:
        case StepKind::kHalfPiPulse: {
          const int lo = s.target == "qubit_ef" ? 1 : 0;
          if (lo + 1 >= nq) throw Error(ErrorCode::kInvalidArgument, "e-f pulse needs a three-level transmon");
          const double theta = s.kind == StepKind::kPiPulse ? kPi : 0.5 * kPi;
          prog.ops.push_back({OpKind::kUnitary, nullptr,
                              qops::embed(qubit_rotation(nq, lo, theta, s.phase), space_, model::kQubit).matrix(), 0});
          break;
        }
        case StepKind::kDisplace:
          prog.ops.push_back({OpKind::kUnitary, nullptr,
                              qops::embed(qops::displacement(dev_.fock_dim, std::polar(s.amplitude, s.phase)),
                                          space_, model::mech_label(0))
                                  .matrix(),
                              0});
          break;
        case StepKind::kMeasure: prog.ops.push_back({OpKind::kMeasure, nullptr, {}, 0}); break;
      }
    }
    return prog;
  }

  // Runs the program; `phases` holds one oscillator phase per wait interval (or is empty).
  std::pair<std::vector<double>, Mat> run(const Program& prog, const Mat& rho0,
                                          const std::vector<double>& phases) const {
    Mat rho = rho0;
    std::vector<double> pe;
    const int F = dev_.fock_dim;
    const int d = static_cast<int>(rho.rows());
    for (const auto& op : prog.ops) {
      switch (op.kind) {
        case OpKind::kSuper: rho = engine::apply_superoperator(*op.super, rho); break;
        case OpKind::kUnitary: rho = op.unitary * rho * op.unitary.adjoint(); break;
        case OpKind::kNoise: {
          if (phases.empty()) break;
          const double phi = phases[op.interval];
          for (int j = 0; j < d; ++j) {
            for (int i = 0; i < d; ++i) {
              rho(i, j) *= std::polar(1.0, -phi * static_cast<double>(i % F - j % F));
            }
          }
          break;
        }
        case OpKind::kMeasure: pe.push_back(std::clamp((pe_ * rho).trace().real(), 0.0, 1.0)); break;
      }
    }
    return {pe, rho};
  }

  const qops::CompositeSpace& space() const { return space_; }

 private:
  const Mat& evolution(double detuning, double duration) {
    const auto key = std::make_pair(detuning, duration);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    DeviceSpec d = dev_;
    d.transmon.omega_q = d.mechanics[0].omega_m + detuning;
    const Operator H = model::build_hamiltonian(d, {omega_ref_});
    return cache_.emplace(key, engine::propagator(H, collapse_, duration)).first->second;
  }

  DeviceSpec dev_;
  qops::CompositeSpace space_;
  double omega_ref_;
  std::vector<qops::Dissipator> collapse_;
  double swap_;
  Mat pe_;
  std::map<std::pair<double, double>, Mat> cache_;
};

}  // namespace

SequenceResult run_sequence(const DeviceSpec& dev, const PulseSequence& seq, const RunOptions& options) {
  const DeviceSpec single = single_device(dev, options.mech);
  Executor ex(single, options);
  const Executor::Program prog = ex.compile(seq);
  const DensityMatrix rho0 = options.initial ? *options.initial : default_initial(single, options);
  if (!(rho0.space() == ex.space())) throw Error(ErrorCode::kSpaceMismatch, "initial state does not match device");

  SequenceResult out;
  if (!options.noise || options.noise->ensemble.members.empty()) {
    auto [pe, rho] = ex.run(prog, rho0.matrix(), {});
    out.pe = std::move(pe);
    out.final_state = DensityMatrix::unchecked(ex.space(), rho);
    return out;
  }
  const NoiseModel& noise = *options.noise;
  noise.ensemble.validate();
  if (noise.shots <= 0) throw Error(ErrorCode::kInvalidArgument, "noise shots must be positive");
  const auto shots = static_cast<std::size_t>(noise.shots);
  std::vector<std::pair<std::vector<double>, Mat>> per(shots);
  parallel_for(shots, options.workers, [&](std::size_t k) {
    const std::vector<double> phi =
        noisekit::accumulated_phase(noise.ensemble, prog.query, stream_seed(noise.seed, k));
    std::vector<double> inc(phi.size() / 2);
    for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = phi[2 * i + 1] - phi[2 * i];
    per[k] = ex.run(prog, rho0.matrix(), inc);
  });
  out.pe.assign(per[0].first.size(), 0.0);
  Mat rho = Mat::Zero(rho0.dim(), rho0.dim());
  for (const auto& [pe, r] : per) {
    for (std::size_t i = 0; i < pe.size(); ++i) out.pe[i] += pe[i];
    rho += r;
  }
  for (double& v : out.pe) v /= static_cast<double>(shots);
  rho /= static_cast<double>(shots);
  out.final_state = DensityMatrix::unchecked(ex.space(), rho);
  return out;
}

engine::Trajectory vacuum_rabi(const DeviceSpec& dev, double duration, const VacuumRabiOptions& options) {
  if (!(duration > 0.0)) throw Error(ErrorCode::kInvalidArgument, "duration must be positive");
  if (options.samples < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 samples");
  DeviceSpec d = single_device(dev, options.mech);
  d.transmon.omega_q = d.mechanics[0].omega_m;
  const auto space = model::make_space(d);
  Vec psi = qops::kron(qops::basis(d.transmon.levels, 1), qops::basis(d.fock_dim, 0));
  engine::LindbladProblem p;
  engine::Segment seg;
  seg.duration = duration;
  seg.hamiltonian = model::build_hamiltonian(d, {d.mechanics[0].omega_m});
  p.segments = {seg};
  if (!options.lossless) p.collapse = model::collapse_ops(d);
  p.rho0 = DensityMatrix::pure(space, psi);
  p.observables = {{"P_e", qops::embed(qops::projector(d.transmon.levels, 1), space, model::kQubit)},
                   {"n_mech", qops::embed(qops::number(d.fock_dim), space, model::mech_label(0))}};
  for (int i = 0; i < options.samples; ++i) {
    p.sample_times.push_back(duration * i / (options.samples - 1));
  }
  return engine::evolve(p);
}

ScanResult mech_lifetime(const DeviceSpec& dev, const std::vector<double>& delays, double park_detuning,
                         const LifetimeOptions& options) {
  if (delays.empty()) throw Error(ErrorCode::kInvalidArgument, "no delays");
  const double g = model::g_em(dev.mechanics.at(options.mech), dev.V_dc);
  ScanResult out = run_scan({{"delay_s", delays}}, options.seed, options.workers,
                            [&](const std::vector<std::size_t>& idx, std::uint64_t) {
                              PulseSequence seq;
                              seq.pi_pulse().swap().set_detuning(park_detuning).wait(delays[idx[0]]).swap().measure();
                              RunOptions ro;
                              ro.mech = options.mech;
                              return run_sequence(dev, seq, ro).pe.back();
                            },
                            "P_e");
  if (std::abs(park_detuning) < 5.0 * g) {
    out.warnings.push_back("park detuning below 5 g_em: decay is Purcell-dominated");
  }
  return out;
}

LifetimeFit fit_lifetime(const ScanResult& scan) {
  scan.validate();
  if (scan.axes.size() != 1) throw Error(ErrorCode::kInvalidArgument, "lifetime fit needs a 1-D scan");
  const auto& t = scan.axes[0].values;
  const auto& y = scan.values;
  Eigen::VectorXd p0(3);
  p0 << y.front() - y.back(), std::max(1e-12, 0.3 * (t.back() - t.front())), y.back();
  const fitkit::FitResult f = fitkit::curve_fit(fitkit::exp_decay(true), t, y, p0);
  return {f.value("tau"), f.error("tau"), f.value("a"), f.value("c")};
}

double predicted_lifetime(const DeviceSpec& dev, std::size_t mech, double park_detuning) {
  const DeviceSpec d = dev.qubit_at(mech);
  const auto& m = d.mechanics.at(mech);
  const double g = model::g_em(m, d.V_dc);
  const double r = g / park_detuning;
  return 1.0 / (1.0 / m.T1 + r * r / d.transmon.T1);
}

int CoherenceProtocol::refocusing_pulses() const {
  switch (kind) {
    case CoherenceKind::kRamsey: return 0;
    case CoherenceKind::kEcho: return 1;
    case CoherenceKind::kCarrPurcell:
      if (pulses < 1) throw Error(ErrorCode::kInvalidArgument, "cp(n) needs n >= 1");
      return pulses;
  }
  return 0;
}

double dressed_shift(double g, double detuning) {
  if (detuning == 0.0) throw Error(ErrorCode::kInvalidArgument, "dressed shift needs a detuning");
  const double h = 0.5 * detuning;
  return -std::copysign(std::sqrt(h * h + g * g) - std::abs(h), detuning);
}

ScanResult coherence_sequence(const DeviceSpec& dev, const CoherenceProtocol& protocol,
                              const std::vector<double>& delays, double detuning,
                              const std::optional<NoiseModel>& noise, const CoherenceOptions& options) {
  if (delays.empty()) throw Error(ErrorCode::kInvalidArgument, "no delays");
  for (double t : delays) {
    if (!(t >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative delay");
  }
  const int n = protocol.refocusing_pulses();
  const double g = model::g_em(dev.mechanics.at(options.mech), dev.V_dc);
  const double ts = options.swap_duration > 0.0 ? options.swap_duration : swap_time(dev, options.mech);
  const double park = options.park_detuning;

  auto build = [&](double tau) {
    PulseSequence seq;
    seq.set_detuning(park);
    if (options.strategy == MechPulse::kQubitThenSwap) {
      seq.half_pi_pulse().swap(ts);
    } else {
      seq.pi_pulse().swap(0.5 * ts);
    }
    if (n == 0) {
      seq.wait(tau);
    } else {
      const double unit = tau / (2.0 * n);
      seq.wait(unit);
      for (int k = 0; k < n; ++k) {
        seq.swap(ts).pi_pulse().swap(ts);
        seq.wait(k + 1 < n ? 2.0 * unit : unit);
      }
    }
    if (options.strategy == MechPulse::kQubitThenSwap) {
      seq.swap(ts).half_pi_pulse(options.final_phase);
    } else {
      seq.swap(0.5 * ts);
    }
    return seq.measure();
  };

  RunOptions ro;
  ro.mech = options.mech;
  ro.frame_offset = dressed_shift(g, park) + detuning;
  ro.noise = noise;
  ro.workers = options.workers;
  std::vector<double> values(delays.size());
  for (std::size_t i = 0; i < delays.size(); ++i) values[i] = run_sequence(dev, build(delays[i]), ro).pe.back();
  ScanResult out;
  out.axes = {{"delay_s", delays}};
  out.values = std::move(values);
  out.value_name = "P_e";
  const std::uint64_t seed = noise ? noise->seed : options.seed;
  out.seed_map.assign(delays.size(), seed);
  return out;
}

double contrast_decay_time(const ScanResult& scan) {
  scan.validate();
  const auto& t = scan.axes.at(0).values;
  const double c0 = std::abs(2.0 * scan.values[0] - 1.0);
  if (c0 <= 0.0) throw Error(ErrorCode::kFitFailure, "no initial contrast");
  double prev = 1.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double c = std::abs(2.0 * scan.values[i] - 1.0) / c0;
    if (c < std::exp(-1.0)) {
      const double f = (prev - std::exp(-1.0)) / (prev - c);
      return t[i - 1] + f * (t[i] - t[i - 1]);
    }
    prev = c;
  }
  throw Error(ErrorCode::kFitFailure, "contrast never falls below 1/e");
}

namespace {

// Free oscillator decay under thermal relaxation and pure dephasing. The generator is
// phase covariant, so each coherence order rho(n + k, n) evolves in its own block.
Mat free_decay(const Mat& rho, const model::MechSpec& m, double t) {
  const int F = static_cast<int>(rho.rows());
  const double down = (1.0 + m.thermal_pop) / m.T1;
  const double up = m.thermal_pop / m.T1;
  const double dephase = 2.0 * std::max(0.0, 1.0 / m.effective_T2_star() - 0.5 / m.T1);
  Mat out = Mat::Zero(F, F);
  for (int k = 0; k < F; ++k) {
    const int n = F - k;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      const double p = j + k;
      const double q = j;
      M(j, j) = -0.5 * down * (p + q) - 0.5 * up * (p + q + 2.0) - 0.5 * dephase * k * k;
      if (j + 1 < n) M(j, j + 1) = down * std::sqrt((p + 1.0) * (q + 1.0));
      if (j > 0) M(j, j - 1) = up * std::sqrt(p * q);
    }
    const Eigen::MatrixXd E = (M * t).exp();
    Vec x(n);
    for (int j = 0; j < n; ++j) x(j) = rho(j + k, j);
    const Vec y = E.cast<cplx>() * x;
    for (int j = 0; j < n; ++j) {
      out(j + k, j) = y(j);
      out(j, j + k) = std::conj(y(j));
    }
  }
  return out;
}

struct RpmBranches {
  double with = 0.0;
  double without = 0.0;
};

// Amplitude of the e-f Rabi oscillation in P_e, with and without a leading g-e pi pulse.
RpmBranches rpm_branches(const DeviceSpec& dev, const DensityMatrix& rho, const RpmOptions& o) {
  if (dev.transmon.levels != 3) throw Error(ErrorCode::kInvalidArgument, "RPM needs a three-level transmon");
  if (o.points < 8) throw Error(ErrorCode::kInvalidArgument, "RPM needs at least 8 points");
  const auto& space = rho.space();
  const Operator sm = qops::embed(model::qubit_lowering(3), space, model::kQubit);
  Mat ef = Mat::Zero(3, 3);
  ef(1, 2) = 1.0;
  ef(2, 1) = 1.0;
  const Operator H = qops::embed(Mat(0.5 * o.ef_rabi * ef), space, model::kQubit);
  const Operator pe = qops::embed(qops::projector(3, 1), space, model::kQubit);
  const double T = o.cycles * kTwoPi / o.ef_rabi;
  std::vector<double> times(static_cast<std::size_t>(o.points));
  for (int i = 0; i < o.points; ++i) times[static_cast<std::size_t>(i)] = T * i / (o.points - 1);
  const auto collapse = model::collapse_ops(dev);
  const Mat pi = qops::embed(qubit_rotation(3, 0, kPi, 0.0), space, model::kQubit).matrix();

  auto amplitude = [&](const Mat& r0) {
    engine::LindbladProblem p;
    engine::Segment seg;
    seg.duration = T;
    seg.hamiltonian = H;
    p.segments = {seg};
    p.collapse = collapse;
    p.rho0 = DensityMatrix::unchecked(space, r0);
    p.observables = {{"P_e", pe}};
    p.sample_times = times;
    const auto y = engine::evolve(p).series("P_e");
    Eigen::MatrixXd A(o.points, 3);
    Eigen::VectorXd yy(o.points);
    for (int i = 0; i < o.points; ++i) {
      const double ph = o.ef_rabi * times[static_cast<std::size_t>(i)];
      A(i, 0) = 1.0;
      A(i, 1) = std::cos(ph);
      A(i, 2) = std::sin(ph);
      yy(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd c = fitkit::linear_least_squares(A, yy).coef;
    return std::hypot(c(1), c(2));
  };
  return {amplitude(pi * rho.matrix() * pi.adjoint()), amplitude(rho.matrix())};
}

DeviceSpec qubit_only(const DeviceSpec& single) { return single.with_mechanics({}); }

DensityMatrix swapped_thermal(const DeviceSpec& single, double nbar, double pq, int fock) {
  DeviceSpec d = single;
  d.fock_dim = fock;
  d.transmon.omega_q = d.mechanics[0].omega_m;
  const auto space = model::make_space(d);
  const DensityMatrix rho0 = qops::product_state(space, {qubit_thermal(3, pq), qops::thermal_state(fock, nbar)});
  engine::Segment seg;
  seg.duration = swap_time(d, 0);
  seg.hamiltonian = model::build_hamiltonian(d, {d.mechanics[0].omega_m});
  const Mat r = engine::propagate(rho0.matrix(), seg, model::collapse_ops(d));
  const Mat q = qops::partial_trace(r, space, {model::kQubit});
  return DensityMatrix::unchecked(model::make_space(qubit_only(d)), 0.5 * (q + q.adjoint()));
}

double rpm_population(const RpmBranches& b) { return b.without / (b.with + b.without); }

}  // namespace

double mech_thermometry_map(const DeviceSpec& dev, double nbar, const RpmOptions& options) {
  if (nbar < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative occupation");
  const DeviceSpec single = single_device(dev, options.mech);
  const double pq = options.stark_pop.value_or(single.transmon.stark_thermal_pop.value_or(single.transmon.thermal_pop));
  const int fock = std::max(6, model::required_fock_dim(nbar, 1e-8));
  const DensityMatrix q = swapped_thermal(single, nbar, pq, fock);
  return rpm_population(rpm_branches(qubit_only(single), q, options));
}

RpmResult rpm_thermometry(const DeviceSpec& dev, RpmTarget target, const RpmOptions& options) {
  const DeviceSpec single = single_device(dev, options.mech);
  if (single.transmon.levels != 3) throw Error(ErrorCode::kInvalidArgument, "RPM needs a three-level transmon");
  const DeviceSpec q = qubit_only(single);
  RpmResult out;
  RpmBranches b;
  double omega = single.transmon.omega_q;
  if (target == RpmTarget::kQubit) {
    const auto space = model::make_space(q);
    const DensityMatrix rho = qops::product_state(space, {qubit_thermal(3, q.transmon.thermal_pop)});
    b = rpm_branches(q, rho, options);
  } else {
    const auto& m = single.mechanics[0];
    omega = m.omega_m;
    const double pq = options.stark_pop.value_or(single.transmon.stark_thermal_pop.value_or(single.transmon.thermal_pop));
    const int fock = std::max(6, model::required_fock_dim(m.thermal_pop, 1e-8));
    b = rpm_branches(q, swapped_thermal(single, m.thermal_pop, pq, fock), options);
  }
  out.amp_with = b.with;
  out.amp_without = b.without;
  out.p_excited = rpm_population(b);
  out.p_ground = 1.0 - out.p_excited;
  if (!(b.without > 1e-12 * std::max(1.0, b.with))) {
    throw Error(ErrorCode::kNoTemperature, "excited population is zero");
  }
  if (target == RpmTarget::kQubit) {
    out.temperature = model::temperature_from_ratio(omega, out.p_ground, out.p_excited);
    return out;
  }
  // Invert the monotone swap map for the oscillator occupation.
  const double p = out.p_excited;
  auto residual = [&](double n) { return mech_thermometry_map(dev, n, options) - p; };
  const double r0 = residual(0.0);
  if (r0 > 0.0) throw Error(ErrorCode::kNoTemperature, "population below the zero-occupation swap floor");
  double hi = 0.5;
  double rhi = residual(hi);
  while (rhi < 0.0) {
    hi *= 2.0;
    if (hi > 64.0) throw Error(ErrorCode::kFitFailure, "swap map cannot reach the measured population");
    rhi = residual(hi);
  }
  std::uintmax_t iters = 60;
  const auto bracket = boost::math::tools::toms748_solve(residual, 0.0, hi, r0, rhi,
                                                         boost::math::tools::eps_tolerance<double>(40), iters);
  out.mech_occupation = 0.5 * (bracket.first + bracket.second);
  if (!(out.mech_occupation > 0.0)) throw Error(ErrorCode::kNoTemperature, "oscillator occupation is zero");
  out.temperature = kHbar * omega / (kBoltzmann * std::log1p(1.0 / out.mech_occupation));
  return out;
}

double stark_shift(double g, double detuning, double nbar, std::optional<double> anharmonicity) {
  if (detuning == 0.0) throw Error(ErrorCode::kInvalidArgument, "Stark shift needs a detuning");
  if (anharmonicity) return -2.0 * g * g * *anharmonicity * nbar / (detuning * (detuning - *anharmonicity));
  return 2.0 * g * g * nbar / detuning;
}

double phonons_from_shift(double g, double detuning, double shift, std::optional<double> anharmonicity) {
  return shift / stark_shift(g, detuning, 1.0, anharmonicity);
}

double measure_stark_shift(const DeviceSpec& dev, const Mat& rho_mech, const StarkOptions& options) {
  DeviceSpec d = single_device(dev, options.mech);
  d.fock_dim = static_cast<int>(rho_mech.rows());
  const double wm = d.mechanics[0].omega_m;
  d.transmon.omega_q = wm + options.qubit_detuning;
  const auto space = model::make_space(d);
  const int nq = d.transmon.levels;
  Mat q0 = Mat::Zero(nq, nq);
  q0(0, 0) = 0.5;
  q0(0, 1) = 0.5;
  q0(1, 0) = 0.5;
  q0(1, 1) = 0.5;
  const Mat sm = model::qubit_lowering(nq);
  const Mat x = sm + sm.adjoint();
  const Mat y = cplx(0.0, 1.0) * (sm.adjoint() - sm);
  engine::LindbladProblem p;
  engine::Segment seg;
  seg.duration = options.ramsey_span;
  seg.hamiltonian = model::build_hamiltonian(d, {d.transmon.omega_q});
  p.segments = {seg};
  p.collapse = model::collapse_ops(d);
  p.rho0 = DensityMatrix::unchecked(space, qops::kron(q0, rho_mech));
  p.observables = {{"X", qops::embed(x, space, model::kQubit)}, {"Y", qops::embed(y, space, model::kQubit)}};
  const int n = options.ramsey_points;
  if (n < 8) throw Error(ErrorCode::kTooFewSamples, "Ramsey needs at least 8 points");
  for (int i = 0; i < n; ++i) p.sample_times.push_back(options.ramsey_span * i / (n - 1));
  const auto tr = engine::evolve(p);
  const auto& X = tr.series("X");
  const auto& Y = tr.series("Y");
  std::vector<double> pe(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < pe.size(); ++i) {
    const cplx c = cplx(X[i], Y[i]) * std::polar(1.0, -options.ramsey_detuning * p.sample_times[i]);
    pe[i] = 0.5 * (1.0 + c.real());
  }
  const fitkit::FringeFit f = fitkit::fit_fringes(p.sample_times, pe);
  if (!f.frequency_identifiable) throw Error(ErrorCode::kFitFailure, "no Ramsey fringes");
  return kTwoPi * f.frequency - options.ramsey_detuning;
}

ScanResult stark_phonon_readout(const DeviceSpec& dev, cplx init_drive, const std::vector<double>& delays,
                                const StarkOptions& options) {
  if (delays.empty()) throw Error(ErrorCode::kInvalidArgument, "no delays");
  const DeviceSpec single = single_device(dev, options.mech);
  const auto& m = single.mechanics[0];
  const double g = model::g_em(m, single.V_dc);
  if (std::abs(options.qubit_detuning) < 5.0 * g) {
    throw Error(ErrorCode::kInvalidArgument, "Stark readout needs |Delta| >= 5 g_em");
  }
  const int F = options.fock_dim > 0 ? options.fock_dim
                                     : model::required_fock_dim(std::pow(std::abs(init_drive) + std::sqrt(m.thermal_pop + 1.0), 2), 1e-6);
  const Mat D = qops::displacement(F, init_drive);
  const Mat rho0 = D * qops::thermal_state(F, m.thermal_pop) * D.adjoint();

  std::vector<double> shift(delays.size());
  parallel_for(delays.size(), options.workers, [&](std::size_t i) {
    shift[i] = measure_stark_shift(dev, free_decay(rho0, m, delays[i]), options);
  });
  const double ref = options.subtract_final ? shift.back() : 0.0;
  std::optional<double> alpha;
  if (options.alpha_corrected) alpha = single.transmon.anharmonicity;
  ScanResult out;
  out.axes = {{"delay_s", delays}};
  out.value_name = "nbar";
  for (double s : shift) out.values.push_back(phonons_from_shift(g, options.qubit_detuning, s - ref, alpha));
  out.seed_map.assign(delays.size(), options.seed);
  return out;
}

ScanResult spectroscopy_scan(const DeviceSpec& dev, const Axis& probe, const Axis& control,
                             ControlKind control_kind, const SpectroscopyOptions& options) {
  dev.validate();
  const double omega_drive = options.probe_amplitude > 0.0 ? options.probe_amplitude : 0.01 / dev.transmon.T2_star;
  const std::string control_name = control.name.empty()
                                       ? (control_kind == ControlKind::kOmegaQ ? "omega_q_hz" : "V_dc")
                                       : control.name;
  const std::string probe_name = probe.name.empty() ? "probe_hz" : probe.name;
  return run_scan({{control_name, control.values}, {probe_name, probe.values}}, options.seed, options.workers,
                  [&](const std::vector<std::size_t>& idx, std::uint64_t) {
                    DeviceSpec d = dev;
                    if (control_kind == ControlKind::kOmegaQ) {
                      d.transmon.omega_q = angular(control.values[idx[0]]);
                    } else {
                      d.V_dc = control.values[idx[0]];
                    }
                    model::Frame fr;
                    fr.omega_ref = angular(probe.values[idx[1]]);
                    fr.drive_amplitude = omega_drive;
                    const Operator H = model::build_hamiltonian(d, fr);
                    const DensityMatrix ss = engine::steady_state(H, model::collapse_ops(d));
                    const Operator pe = qops::embed(qops::projector(d.transmon.levels, 1), H.space(), model::kQubit);
                    return qops::expect(pe, ss).real();
                  },
                  "P_e");
}

std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y, double min_fraction) {
  if (x.size() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "x and y differ in length");
  std::vector<Peak> out;
  if (y.size() < 3) return out;
  const double base = *std::min_element(y.begin(), y.end());
  const double top = *std::max_element(y.begin(), y.end()) - base;
  if (!(top > 0.0)) return out;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] >= y[i - 1] && y[i] > y[i + 1]) || y[i] - base < min_fraction * top) continue;
    const double half = base + 0.5 * (y[i] - base);
    double left = inf;
    for (std::size_t j = i; j-- > 0;) {
      if (y[j] < half) {
        left = x[i] - (x[j] + (half - y[j]) / (y[j + 1] - y[j]) * (x[j + 1] - x[j]));
        break;
      }
    }
    double right = inf;
    for (std::size_t j = i + 1; j < y.size(); ++j) {
      if (y[j] < half) {
        right = (x[j - 1] + (y[j - 1] - half) / (y[j - 1] - y[j]) * (x[j] - x[j - 1])) - x[i];
        break;
      }
    }
    double xp = x[i];
    const double den = y[i - 1] - 2.0 * y[i] + y[i + 1];
    if (den < 0.0) xp += 0.25 * (y[i - 1] - y[i + 1]) / den * (x[i + 1] - x[i - 1]);
    out.push_back({xp, y[i] - base, 2.0 * std::min(left, right)});
  }
  return out;
}

bool resolved_doublet(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<Peak> p = find_peaks(x, y, 0.1);
  if (p.size() < 2) return false;
  std::sort(p.begin(), p.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
  const double base = *std::min_element(y.begin(), y.end());
  // Half width at half height on the side facing away from the other peak.
  auto outer = [&](const Peak& a, const Peak& b) {
    const double half = base + 0.5 * a.height;
    const auto i = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), a.x) - x.begin());
    if (b.x > a.x) {
      for (std::size_t j = std::min(i, x.size() - 1); j-- > 0;) {
        if (y[j] < half) return a.x - x[j];
      }
    } else {
      for (std::size_t j = i; j < x.size(); ++j) {
        if (y[j] < half) return x[j] - a.x;
      }
    }
    return std::numeric_limits<double>::infinity();
  };
  const double width = outer(p[0], p[1]) + outer(p[1], p[0]);
  return std::abs(p[0].x - p[1].x) > width;
}

StatePrepResult prepare_fock_states(const DeviceSpec& dev, const StatePrepOptions& options) {
  DeviceSpec d = dev;
  auto& m = d.mechanics.at(options.mech);
  m.thermal_pop = model::bose_occupation(m.omega_m, options.mech_temperature);
  const double bath = model::excited_population(m.omega_m, options.qubit_bath_temperature);
  const DeviceSpec single = single_device(d, options.mech);
  const auto space = model::make_space(single);
  RunOptions ro;
  ro.mech = options.mech;
  ro.qubit_bath_pop = bath;
  ro.initial = qops::product_state(space, {qubit_thermal(single.transmon.levels, options.qubit_initial_pop),
                                           qops::thermal_state(single.fock_dim, m.thermal_pop)});
  PulseSequence cool;
  cool.wait(options.ground_wait).measure();
  StatePrepResult out;
  out.ground = run_sequence(d, cool, ro).final_state;
  ro.initial = out.ground;
  PulseSequence one;
  one.pi_pulse().swap(options.swap_duration).measure();
  out.one = run_sequence(d, one, ro).final_state;
  const std::string l = model::mech_label(0);
  const Mat pg = qops::partial_trace(out.ground.matrix(), space, {l});
  const Mat p1 = qops::partial_trace(out.one.matrix(), space, {l});
  for (int n = 0; n < single.fock_dim; ++n) {
    out.p_ground.push_back(pg(n, n).real());
    out.p_one.push_back(p1(n, n).real());
  }
  out.fidelity_ground = tomography::fidelity(pg, qops::basis(single.fock_dim, 0));
  out.fidelity_one = tomography::fidelity(p1, qops::basis(single.fock_dim, 1));
  return out;
}

}  // namespace cqad::experiments
