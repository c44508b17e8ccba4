#pragma once

#include <span>
#include <vector>

#include "pronk/types.hpp"

namespace pronk {

// Binomial-form Bernstein basis polynomial b_{i,n}(s).
double bernstein(int order, int i, double s);

// Value of a Bezier row at phase s in [0, 1] (de Casteljau). Throws DomainError
// outside [0, 1]; callers clamp.
double bezier_eval(std::span<const double> row, double s);

// d/ds of the Bezier row: order * sum (a_{i+1} - a_i) b_{i,order-1}(s).
double bezier_derivative(std::span<const double> row, double s);

struct PhaseSample {
  double s = 0.0;
  double value = 0.0;
};

struct BezierFit {
  std::vector<double> coeffs;
  double residual_rms = 0.0;
};

// Least-squares Bernstein fit of the given order. Needs at least order+1
// distinct samples in [0, 1]; a rank-deficient design throws FitError.
BezierFit fit_bezier(std::span<const PhaseSample> samples, int order);

// As fit_bezier, but the first and last coefficients are pinned to the
// samples at s = 0 and s = 1 (both must be present), so the curve reproduces
// the boundary samples exactly.
BezierFit fit_bezier_pinned(std::span<const PhaseSample> samples, int order);

// As fit_bezier_pinned, and the end slopes d/ds are pinned to slope0 and
// slope1 through the second and second-to-last coefficients. Needs order >= 3.
BezierFit fit_bezier_clamped(std::span<const PhaseSample> samples, int order, double slope0,
                             double slope1);

// One phase of a reference: n_L x (order+1) coefficients, column-major so
// each column is one SIMD lane block.
struct BezierPhase {
  Eigen::Matrix<double, kJointDofs, Eigen::Dynamic> coeffs;
  double duration = 0.0;  // s

  int order() const { return static_cast<int>(coeffs.cols()) - 1; }
  // Joint values at phase s (s must be in [0, 1]).
  Vec4 eval(double s) const;
  // Joint rates d/ds; divide by duration for rad/s.
  Vec4 derivative(double s) const;
  std::vector<double> row(int joint) const;
};

}  // namespace pronk
