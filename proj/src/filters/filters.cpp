#include "pronk/filters/filters.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "pronk/simd/kernels.hpp"

namespace pronk {
namespace {

using cplx = std::complex<double>;

// Coefficients of prod (z - r_k), highest power first.
std::vector<cplx> poly_from_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> p{1.0};
  for (const cplx& r : roots) {
    std::vector<cplx> next(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      next[i] += p[i];
      next[i + 1] -= r * p[i];
    }
    p = std::move(next);
  }
  return p;
}

double pole_radius(const std::vector<double>& a) {
  const int n = static_cast<int>(a.size()) - 1;
  if (n == 0) return 0.0;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) companion(0, i) = -a[i + 1];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd eig = companion.eigenvalues();
  return eig.cwiseAbs().maxCoeff();
}

Signal4 odd_extend(const Signal4& x, int pad) {
  const Eigen::Index n = x.cols();
  Signal4 ext(kJointDofs, n + 2 * pad);
  for (int i = 0; i < pad; ++i) {
    ext.col(i) = 2.0 * x.col(0) - x.col(pad - i);
    ext.col(n + pad + i) = 2.0 * x.col(n - 1) - x.col(n - 2 - i);
  }
  ext.middleCols(pad, n) = x;
  return ext;
}

// Causal filtering of interleaved 4-lane samples; order 0 is a pure gain.
void run_iir(const IIRCoefficients& c, const double* x, double* y, std::size_t n, double* state) {
  if (c.order() == 0) {
    for (std::size_t i = 0; i < n * kJointDofs; ++i) y[i] = c.b()[0] * x[i];
    return;
  }
  simd::iir4(c.b().data(), c.a().data(), c.order(), x, y, n, state);
}

// One causal pass starting from the steady state for the first sample.
Signal4 pass(const IIRCoefficients& c, const std::vector<double>& zi, const Signal4& x) {
  const int order = c.order();
  std::vector<double> state(static_cast<std::size_t>(order) * kJointDofs);
  for (int i = 0; i < order; ++i) {
    for (int l = 0; l < kJointDofs; ++l) state[i * kJointDofs + l] = zi[i] * x(l, 0);
  }
  Signal4 y(kJointDofs, x.cols());
  run_iir(c, x.data(), y.data(), static_cast<std::size_t>(x.cols()), state.data());
  return y;
}

}  // namespace

IIRCoefficients::IIRCoefficients(std::vector<double> b, std::vector<double> a)
    : b_(std::move(b)), a_(std::move(a)) {
  if (a_.size() != b_.size() || a_.empty()) {
    throw ContractViolation("IIR coefficients need non-empty b and a of equal length");
  }
  if (order() > simd::kMaxFilterOrder) throw ContractViolation("IIR order too large");
  if (a_[0] != 1.0) throw ContractViolation("IIR coefficient a0 must be 1");
  for (double v : b_) {
    if (!std::isfinite(v)) throw ContractViolation("non-finite IIR coefficient");
  }
  for (double v : a_) {
    if (!std::isfinite(v)) throw ContractViolation("non-finite IIR coefficient");
  }
  max_pole_radius_ = pole_radius(a_);
  if (!(max_pole_radius_ < 1.0)) {
    throw ContractViolation("unstable IIR filter: pole radius " + std::to_string(max_pole_radius_));
  }
}

IIRCoefficients IIRCoefficients::paper_verbatim() {
  return IIRCoefficients({0.003, 0.009, 0.009, 0.003}, {1.00, -2.37, 1.93, -0.53});
}

IIRCoefficients IIRCoefficients::butterworth(int order, double cutoff_hz, double sample_hz) {
  if (order < 1 || !(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_hz)) {
    throw ContractViolation("Butterworth design needs order >= 1 and 0 < cutoff < Nyquist");
  }
  const double fs2 = 2.0 * sample_hz;
  const double warped = fs2 * std::tan(std::numbers::pi * cutoff_hz / sample_hz);
  std::vector<cplx> poles, zeros;
  for (int k = 1; k <= order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order - 1) / (2.0 * order);
    const cplx analog = warped * std::exp(cplx(0.0, theta));
    poles.push_back((fs2 + analog) / (fs2 - analog));
    zeros.push_back(-1.0);
  }
  const std::vector<cplx> num = poly_from_roots(zeros);
  const std::vector<cplx> den = poly_from_roots(poles);
  std::vector<double> b(order + 1), a(order + 1);
  double sum_b = 0.0, sum_a = 0.0;
  for (int i = 0; i <= order; ++i) {
    b[i] = num[i].real();
    a[i] = den[i].real();
    sum_b += b[i];
    sum_a += a[i];
  }
  const double gain = sum_a / sum_b;
  for (double& v : b) v *= gain;
  return IIRCoefficients(std::move(b), std::move(a));
}

IIRCoefficients IIRCoefficients::butter3_25hz_unity() { return butterworth(3, 25.0, 1000.0); }

IIRCoefficients IIRCoefficients::preset(const std::string& name) {
  if (name == "paper-verbatim") return paper_verbatim();
  if (name == "butter3-25hz-unity") return butter3_25hz_unity();
  throw ContractViolation("unknown filter preset '" + name + "'");
}

double IIRCoefficients::dc_gain() const {
  double sb = 0.0, sa = 0.0;
  for (double v : b_) sb += v;
  for (double v : a_) sa += v;
  return sb / sa;
}

std::vector<double> IIRCoefficients::steady_state() const {
  const int n = order();
  const double k = dc_gain();
  std::vector<double> z(n);
  if (n == 0) return z;
  z[n - 1] = b_[n] - a_[n] * k;
  for (int i = n - 2; i >= 0; --i) z[i] = (b_[i + 1] - a_[i + 1] * k) + z[i + 1];
  return z;
}

std::vector<double> iir_forward(const IIRCoefficients& c, std::span<const double> x) {
  if (x.empty()) throw FilterLengthError("iir_forward needs at least one sample");
  Signal4 in = Signal4::Zero(kJointDofs, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) in(0, i) = x[i];
  Signal4 out(kJointDofs, in.cols());
  std::vector<double> state(static_cast<std::size_t>(c.order()) * kJointDofs, 0.0);
  run_iir(c, in.data(), out.data(), x.size(), state.data());
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = out(0, i);
  return y;
}

Signal4 zero_phase_filter(const IIRCoefficients& c, const Signal4& x) {
  const Eigen::Index n = x.cols();
  const int min_len = 3 * c.order();
  if (n < min_len || n < 2) {
    throw FilterLengthError("zero-phase filter needs at least " + std::to_string(min_len) +
                            " samples, got " + std::to_string(n));
  }
  const int pad = static_cast<int>(std::min<Eigen::Index>(min_len, n - 1));
  const std::vector<double> zi = c.steady_state();
  const Signal4 forward = pass(c, zi, odd_extend(x, pad));
  const Signal4 backward = pass(c, zi, forward.rowwise().reverse());
  return backward.rowwise().reverse().middleCols(pad, n);
}

std::vector<double> zero_phase_filter(const IIRCoefficients& c, std::span<const double> x) {
  Signal4 in = Signal4::Zero(kJointDofs, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) in(0, i) = x[i];
  const Signal4 out = zero_phase_filter(c, in);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = out(0, i);
  return y;
}

double low_pass_step(VelocityEstimatorState& state, double raw) {
  if (!(state.alpha > 0.0 && state.alpha <= 1.0)) {
    throw ContractViolation("low-pass smoothing factor must be in (0, 1]");
  }
  state.velocity = (1.0 - state.alpha) * state.velocity + state.alpha * raw;
  return state.velocity;
}

Vec2 leg_odometry_velocity(const RobotModel& model, const GeneralizedState& state,
                           const ContactSet& contacts) {
  if (!contacts.any()) throw EstimatorError("leg odometry needs at least one stance leg");
  Vec6 joint_rates = state.qd;
  joint_rates.head<kBaseDofs>().setZero();
  Vec2 sum = Vec2::Zero();
  for (Leg l : kAllLegs) {
    if (!contacts.in_contact(l)) continue;
    // Pinned foot: v_base + J_joint qd_joint = 0.
    sum -= foot_jacobian(model, state.q, l) * joint_rates;
  }
  return sum / static_cast<double>(contacts.count());
}

}  // namespace pronk
