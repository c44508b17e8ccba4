#include "pronk/gait/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pronk/simd/kernels.hpp"

namespace pronk {
namespace {

void check_phase(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw DomainError("phase variable " + std::to_string(s) + " outside [0, 1]");
  }
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

double de_casteljau(std::vector<double> work, double s) {
  const double t = 1.0 - s;
  for (std::size_t r = work.size() - 1; r > 0; --r) {
    for (std::size_t i = 0; i < r; ++i) work[i] = t * work[i] + s * work[i + 1];
  }
  return work[0];
}

void check_samples(std::span<const PhaseSample> samples, int order) {
  if (order < 1 || order > simd::kMaxBezierOrder) {
    throw FitError("Bezier order " + std::to_string(order) + " unsupported");
  }
  if (samples.size() < static_cast<std::size_t>(order + 1)) {
    throw FitError("need at least " + std::to_string(order + 1) + " samples, got " +
                   std::to_string(samples.size()));
  }
  for (const PhaseSample& p : samples) {
    if (!(p.s >= 0.0 && p.s <= 1.0) || !std::isfinite(p.value)) {
      throw FitError("sample outside [0, 1] or non-finite");
    }
  }
}

Eigen::MatrixXd design_matrix(std::span<const PhaseSample> samples, int order) {
  Eigen::MatrixXd a(samples.size(), order + 1);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    for (int i = 0; i <= order; ++i) a(r, i) = bernstein(order, i, samples[r].s);
  }
  return a;
}

Eigen::VectorXd solve_ls(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < a.cols()) {
    throw FitError("rank-deficient Bezier fit (rank " + std::to_string(qr.rank()) + " < " +
                   std::to_string(a.cols()) + "); phase samples not distinct enough");
  }
  return qr.solve(y);
}

}  // namespace

double bernstein(int order, int i, double s) {
  if (i < 0 || i > order) return 0.0;
  return binomial(order, i) * std::pow(s, i) * std::pow(1.0 - s, order - i);
}

double bezier_eval(std::span<const double> row, double s) {
  check_phase(s);
  if (row.empty()) throw ContractViolation("empty Bezier row");
  return de_casteljau({row.begin(), row.end()}, s);
}

double bezier_derivative(std::span<const double> row, double s) {
  check_phase(s);
  if (row.empty()) throw ContractViolation("empty Bezier row");
  if (row.size() == 1) return 0.0;
  std::vector<double> diff(row.size() - 1);
  for (std::size_t i = 0; i + 1 < row.size(); ++i) diff[i] = row[i + 1] - row[i];
  return static_cast<double>(diff.size()) * de_casteljau(std::move(diff), s);
}

BezierFit fit_bezier(std::span<const PhaseSample> samples, int order) {
  check_samples(samples, order);
  const Eigen::MatrixXd a = design_matrix(samples, order);
  Eigen::VectorXd y(samples.size());
  for (std::size_t r = 0; r < samples.size(); ++r) y[r] = samples[r].value;
  const Eigen::VectorXd c = solve_ls(a, y);
  BezierFit fit;
  fit.coeffs.assign(c.data(), c.data() + c.size());
  fit.residual_rms = std::sqrt((a * c - y).squaredNorm() / static_cast<double>(y.size()));
  return fit;
}

BezierFit fit_bezier_pinned(std::span<const PhaseSample> samples, int order) {
  check_samples(samples, order);
  const auto first = std::find_if(samples.begin(), samples.end(), [](auto& p) { return p.s == 0.0; });
  const auto last = std::find_if(samples.begin(), samples.end(), [](auto& p) { return p.s == 1.0; });
  if (first == samples.end() || last == samples.end()) {
    throw FitError("pinned Bezier fit needs samples at s = 0 and s = 1");
  }
  const double a0 = first->value;
  const double an = last->value;

  const Eigen::MatrixXd a = design_matrix(samples, order);
  Eigen::VectorXd y(samples.size());
  for (std::size_t r = 0; r < samples.size(); ++r) y[r] = samples[r].value;

  BezierFit fit;
  fit.coeffs.assign(order + 1, 0.0);
  fit.coeffs.front() = a0;
  fit.coeffs.back() = an;
  if (order >= 2) {
    const Eigen::VectorXd rhs = y - a.col(0) * a0 - a.col(order) * an;
    const Eigen::VectorXd inner = solve_ls(a.middleCols(1, order - 1), rhs);
    for (int i = 1; i < order; ++i) fit.coeffs[i] = inner[i - 1];
  }
  const Eigen::Map<const Eigen::VectorXd> c(fit.coeffs.data(), order + 1);
  fit.residual_rms = std::sqrt((a * c - y).squaredNorm() / static_cast<double>(y.size()));
  return fit;
}

BezierFit fit_bezier_clamped(std::span<const PhaseSample> samples, int order, double slope0,
                             double slope1) {
  if (order < 3) throw FitError("clamped Bezier fit needs order >= 3");
  check_samples(samples, order);
  const auto first = std::find_if(samples.begin(), samples.end(), [](auto& p) { return p.s == 0.0; });
  const auto last = std::find_if(samples.begin(), samples.end(), [](auto& p) { return p.s == 1.0; });
  if (first == samples.end() || last == samples.end()) {
    throw FitError("clamped Bezier fit needs samples at s = 0 and s = 1");
  }
  if (!std::isfinite(slope0) || !std::isfinite(slope1)) throw FitError("end slopes must be finite");

  BezierFit fit;
  fit.coeffs.assign(order + 1, 0.0);
  fit.coeffs[0] = first->value;
  fit.coeffs[order] = last->value;
  fit.coeffs[1] = first->value + slope0 / order;
  fit.coeffs[order - 1] = last->value - slope1 / order;

  const Eigen::MatrixXd a = design_matrix(samples, order);
  Eigen::VectorXd y(samples.size());
  for (std::size_t r = 0; r < samples.size(); ++r) y[r] = samples[r].value;
  if (order > 3) {
    Eigen::VectorXd rhs = y;
    for (int i : {0, 1, order - 1, order}) rhs -= a.col(i) * fit.coeffs[i];
    const Eigen::VectorXd inner = solve_ls(a.middleCols(2, order - 3), rhs);
    for (int i = 2; i < order - 1; ++i) fit.coeffs[i] = inner[i - 2];
  }
  const Eigen::Map<const Eigen::VectorXd> c(fit.coeffs.data(), order + 1);
  fit.residual_rms = std::sqrt((a * c - y).squaredNorm() / static_cast<double>(y.size()));
  return fit;
}

Vec4 BezierPhase::eval(double s) const {
  check_phase(s);
  Vec4 out;
  simd::bezier4(coeffs.data(), static_cast<int>(coeffs.cols()), s, out.data());
  return out;
}

Vec4 BezierPhase::derivative(double s) const {
  check_phase(s);
  Vec4 out;
  simd::bezier_derivative4(coeffs.data(), static_cast<int>(coeffs.cols()), s, out.data());
  return out;
}

std::vector<double> BezierPhase::row(int joint) const {
  std::vector<double> r(coeffs.cols());
  for (Eigen::Index i = 0; i < coeffs.cols(); ++i) r[i] = coeffs(joint, i);
  return r;
}

}  // namespace pronk
