#include "pronk/control/ilc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pronk/simd/kernels.hpp"

namespace pronk {
namespace {

const char* const kJointNames[kJointDofs] = {"thigh_front", "calf_front", "thigh_rear", "calf_rear"};

Signal4 resample(const std::vector<double>& s, const std::vector<Vec4>& v,
                 const std::vector<std::size_t>& keep, const std::vector<double>& grid) {
  Signal4 out(kJointDofs, static_cast<Eigen::Index>(grid.size()));
  std::size_t j = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    while (j + 1 < keep.size() && s[keep[j + 1]] <= x) ++j;
    const std::size_t a = keep[j];
    if (x <= s[a] || j + 1 == keep.size()) {
      out.col(static_cast<Eigen::Index>(g)) = v[a];
      continue;
    }
    const std::size_t b = keep[j + 1];
    const double w = (x - s[a]) / (s[b] - s[a]);
    out.col(static_cast<Eigen::Index>(g)) = (1.0 - w) * v[a] + w * v[b];
  }
  return out;
}

}  // namespace

ControllerGains ControllerGains::paper() {
  ControllerGains g;
  g.kp_b << 60.0, 90.0, 60.0, 90.0;
  g.kd_b << 6.0, 2.0, 6.0, 2.0;
  g.kp_f = g.kp_b;
  g.kd_f = g.kd_b;
  return g;
}

ControllerGains ControllerGains::lumped() {
  ControllerGains g = paper();
  g.kp_b *= 2.0;
  g.kd_b *= 2.0;
  g.kp_f = 0.3 * g.kp_b;
  g.kd_f = 0.3 * g.kd_b;
  return g;
}

void ControllerGains::validate() const {
  for (int j = 0; j < kJointDofs; ++j) {
    const std::string joint = kJointNames[j];
    if (!(kp_b[j] > 0.0) || !std::isfinite(kp_b[j])) throw ContractViolation("kp_b." + joint + " must be > 0");
    if (!(kd_b[j] > 0.0) || !std::isfinite(kd_b[j])) throw ContractViolation("kd_b." + joint + " must be > 0");
    if (!(kp_f[j] >= 0.0) || !std::isfinite(kp_f[j])) throw ContractViolation("kp_f." + joint + " must be >= 0");
    if (!(kd_f[j] >= 0.0) || !std::isfinite(kd_f[j])) throw ContractViolation("kd_f." + joint + " must be >= 0");
  }
}

TrackingError tracking_error(const BezierPhase& ref, const Vec4& q, const Vec4& qd, double s) {
  TrackingError t;
  t.e = ref.eval(s) - q;
  t.ed = ref.derivative(s) / ref.duration - qd;
  return t;
}

Vec4 feedback_torque(const ControllerGains& gains, const Vec4& e, const Vec4& ed) {
  const Vec4 zero = Vec4::Zero();
  Vec4 out;
  simd::affine4(zero.data(), e.data(), ed.data(), gains.kp_b.data(), gains.kd_b.data(), out.data(), 1);
  return out;
}

std::vector<double> phase_grid(int n) {
  if (n < 2) throw ContractViolation("phase grid needs at least 2 points");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = static_cast<double>(i) / (n - 1);
  g.back() = 1.0;
  return g;
}

Vec4 sample_grid(const Signal4& values, double s) {
  const Eigen::Index n = values.cols();
  if (n < 2) throw ContractViolation("grid signal needs at least 2 points");
  const double x = std::clamp(s, 0.0, 1.0) * static_cast<double>(n - 1);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9) return values.col(static_cast<Eigen::Index>(nearest));
  const Eigen::Index i = static_cast<Eigen::Index>(std::floor(x));
  const double w = x - static_cast<double>(i);
  return (1.0 - w) * values.col(i) + w * values.col(i + 1);
}

IterationBuffer IterationBuffer::empty(int grid_size, Phase phase) {
  IterationBuffer b;
  b.grid = phase_grid(grid_size);
  b.tau = Signal4::Zero(kJointDofs, grid_size);
  b.e = Signal4::Zero(kJointDofs, grid_size);
  b.ed = Signal4::Zero(kJointDofs, grid_size);
  b.phase = phase;
  return b;
}

void IterationBuffer::validate() const {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  if (n < 2 || tau.cols() != n || e.cols() != n || ed.cols() != n) {
    throw ContractViolation("iteration buffer arrays must share the grid length");
  }
  if (grid.front() != 0.0 || grid.back() != 1.0) throw ContractViolation("phase grid must span [0, 1]");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(grid[i] > grid[i - 1])) throw ContractViolation("phase grid must be strictly increasing");
  }
}

Vec4 feedforward_torque(const IterationBuffer& buffer, const ControllerGains& gains, double s,
                        double lookahead) {
  if (buffer.k == 0) return Vec4::Zero();
  const double ahead = std::min(1.0, s + lookahead);
  const Vec4 base = sample_grid(buffer.tau, s);
  const Vec4 e = sample_grid(buffer.e, ahead);
  const Vec4 ed = sample_grid(buffer.ed, ahead);
  Vec4 out;
  simd::affine4(base.data(), e.data(), ed.data(), gains.kp_f.data(), gains.kd_f.data(), out.data(), 1);
  return out;
}

Signal4 feedforward_profile(const IterationBuffer& buffer, const ControllerGains& gains,
                            double lookahead) {
  const Eigen::Index n = static_cast<Eigen::Index>(buffer.grid.size());
  if (buffer.k == 0) return Signal4::Zero(kJointDofs, n);
  Signal4 e(kJointDofs, n), ed(kJointDofs, n), out(kJointDofs, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ahead = std::min(1.0, buffer.grid[i] + lookahead);
    e.col(i) = sample_grid(buffer.e, ahead);
    ed.col(i) = sample_grid(buffer.ed, ahead);
  }
  simd::affine4(buffer.tau.data(), e.data(), ed.data(), gains.kp_f.data(), gains.kd_f.data(),
                out.data(), static_cast<std::size_t>(n));
  return out;
}

TotalTorque total_torque(const Vec4& tau_b, const Vec4& tau_f, const Vec4& tau_max) {
  TotalTorque t;
  t.unsaturated = tau_b + tau_f;
  for (int j = 0; j < kJointDofs; ++j) {
    const double v = t.unsaturated[j];
    t.saturated[j] = std::abs(v) > tau_max[j];
    t.applied[j] = std::clamp(v, -tau_max[j], tau_max[j]);
  }
  return t;
}

void PhaseLog::push(double phase, const Vec4& torque, const Vec4& error, const Vec4& error_rate) {
  s.push_back(phase);
  tau.push_back(torque);
  e.push_back(error);
  ed.push_back(error_rate);
}

void PhaseLog::clear() {
  s.clear();
  tau.clear();
  e.clear();
  ed.clear();
}

IterationBuffer end_of_stride_update(const PhaseLog& log, const IIRCoefficients& filter,
                                     const IterationBuffer& previous) {
  previous.validate();
  if (log.size() == 0) throw ContractViolation("end_of_stride_update needs a non-empty stance log");
  std::vector<std::size_t> keep{0};
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log.s[i] < log.s[i - 1]) throw ContractViolation("stance log phases must be nondecreasing");
    if (log.s[i] > log.s[keep.back()]) keep.push_back(i);
  }
  IterationBuffer next;
  next.grid = previous.grid;
  next.phase = previous.phase;
  next.k = previous.k + 1;
  next.tau = resample(log.s, log.tau, keep, next.grid);
  next.e = resample(log.s, log.e, keep, next.grid);
  next.ed = resample(log.s, log.ed, keep, next.grid);
  // Grid points past the last logged phase (early liftoff) keep the previous
  // torque and hold the last logged error.
  const double s_last = log.s[keep.back()];
  if (previous.k > 0) {
    for (Eigen::Index g = 0; g < next.tau.cols(); ++g) {
      if (next.grid[static_cast<std::size_t>(g)] <= s_last) continue;
      next.tau.col(g) = previous.tau.col(g);
    }
  }
  next.filtered = log.size() >= static_cast<std::size_t>(3 * filter.order());
  if (next.filtered) {
    next.tau = zero_phase_filter(filter, next.tau);
    next.e = zero_phase_filter(filter, next.e);
    next.ed = zero_phase_filter(filter, next.ed);
  }
  return next;
}

bool detect_convergence(const std::vector<Signal4>& history, int window, double tol) {
  if (window < 1) throw ContractViolation("convergence window must be >= 1");
  if (!(tol > 0.0)) throw ContractViolation("convergence tolerance must be > 0");
  if (history.size() < static_cast<std::size_t>(window) + 1) return false;
  for (std::size_t i = history.size() - window; i < history.size(); ++i) {
    if (history[i].cols() != history[i - 1].cols()) return false;
    if ((history[i] - history[i - 1]).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace pronk
