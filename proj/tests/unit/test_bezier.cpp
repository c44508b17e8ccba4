#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pronk/gait/bezier.hpp"
#include "pronk/gait/gait_library.hpp"

using namespace pronk;

namespace {

std::vector<PhaseSample> sample_row(const std::vector<double>& row, int n) {
  std::vector<PhaseSample> out;
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    out.push_back({s, bezier_eval(row, s)});
  }
  return out;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

BezierPhase constant_phase(double c, int order = 6, double duration = 0.2) {
  BezierPhase p;
  p.coeffs = Eigen::Matrix<double, kJointDofs, Eigen::Dynamic>::Constant(kJointDofs, order + 1, c);
  p.duration = duration;
  return p;
}

GaitEntry constant_entry(double speed, double c) {
  GaitEntry e;
  e.speed = speed;
  e.stride_time = 0.4;
  e.stance = constant_phase(c);
  e.flight = constant_phase(c);
  return e;
}

}  // namespace

TEST(Bezier, BernsteinMatchesClosedForm) {
  for (int n : {1, 3, 6, 10}) {
    for (double s : {0.0, 0.25, 0.6, 1.0}) {
      for (int i = 0; i <= n; ++i) {
        const double expect = binomial(n, i) * std::pow(s, i) * std::pow(1.0 - s, n - i);
        EXPECT_NEAR(bernstein(n, i, s), expect, 1e-14);
      }
    }
  }
}

TEST(Bezier, PartitionOfUnity) {
  for (int n = 0; n <= 15; ++n) {
    for (int k = 0; k <= 100; ++k) {
      const double s = k / 100.0;
      double sum = 0.0;
      for (int i = 0; i <= n; ++i) sum += bernstein(n, i, s);
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Bezier, EndpointInterpolation) {
  const std::vector<double> row = {0.3, -1.0, 2.0, 0.7, -0.4, 1.1, 0.9};
  EXPECT_EQ(bezier_eval(row, 0.0), row.front());
  EXPECT_EQ(bezier_eval(row, 1.0), row.back());
  EXPECT_NEAR(bezier_derivative(row, 0.0), 6.0 * (row[1] - row[0]), 1e-12);
  EXPECT_NEAR(bezier_derivative(row, 1.0), 6.0 * (row[6] - row[5]), 1e-12);
}

TEST(Bezier, ConstantCoefficientsGiveConstantCurve) {
  const std::vector<double> row(7, 2.5);
  for (double s : {0.0, 0.3, 0.9}) {
    EXPECT_NEAR(bezier_eval(row, s), 2.5, 1e-14);
    EXPECT_NEAR(bezier_derivative(row, s), 0.0, 1e-13);
  }
}

TEST(Bezier, DerivativeMatchesFiniteDifferences) {
  const std::vector<double> row = {0.3, -1.0, 2.0, 0.7, -0.4, 1.1, 0.9};
  for (double s : {0.1, 0.4, 0.8}) {
    const double h = 1e-6;
    const double fd = (bezier_eval(row, s + h) - bezier_eval(row, s - h)) / (2.0 * h);
    EXPECT_NEAR(bezier_derivative(row, s), fd, 1e-7);
  }
}

TEST(Bezier, OutOfRangePhaseThrows) {
  const std::vector<double> row = {0.0, 1.0};
  EXPECT_THROW(bezier_eval(row, -0.01), std::exception);
  EXPECT_THROW(bezier_eval(row, 1.01), std::exception);
}

TEST(Bezier, FitRoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int order : {3, 6, 8}) {
    std::vector<double> row(order + 1);
    for (double& c : row) c = u(rng);
    const auto samples = sample_row(row, 21);
    const BezierFit free = fit_bezier(samples, order);
    const BezierFit pinned = fit_bezier_pinned(samples, order);
    const BezierFit clamped = fit_bezier_clamped(samples, order, bezier_derivative(row, 0.0),
                                                 bezier_derivative(row, 1.0));
    for (int i = 0; i <= order; ++i) {
      EXPECT_NEAR(free.coeffs[i], row[i], 1e-9);
      EXPECT_NEAR(pinned.coeffs[i], row[i], 1e-9);
      EXPECT_NEAR(clamped.coeffs[i], row[i], 1e-9);
    }
    EXPECT_LE(free.residual_rms, 1e-9);
  }
}

TEST(Bezier, PinnedFitHitsEndpointsExactly) {
  std::vector<PhaseSample> samples;
  for (int i = 0; i <= 20; ++i) {
    const double s = i / 20.0;
    samples.push_back({s, std::sin(3.0 * s) + 0.1 * std::cos(11.0 * s)});
  }
  const BezierFit fit = fit_bezier_pinned(samples, 5);
  EXPECT_EQ(fit.coeffs.front(), samples.front().value);
  EXPECT_EQ(fit.coeffs.back(), samples.back().value);
  const BezierFit clamped = fit_bezier_clamped(samples, 6, 0.5, -1.5);
  EXPECT_NEAR(bezier_derivative(clamped.coeffs, 0.0), 0.5, 1e-12);
  EXPECT_NEAR(bezier_derivative(clamped.coeffs, 1.0), -1.5, 1e-12);
}

TEST(Bezier, FitRejectsTooFewSamples) {
  const std::vector<PhaseSample> samples = {{0.0, 1.0}, {0.5, 2.0}, {1.0, 0.0}};
  EXPECT_THROW(fit_bezier(samples, 6), std::exception);
}

TEST(GaitInterpolation, LeftKnotIsBitIdentical) {
  GaitEntry a = constant_entry(0.1, 1.0);
  a.stance.coeffs(2, 3) = 0.123456789;
  const GaitLibrary lib({a, constant_entry(0.2, 3.0)});
  const InterpolatedGait g = lib.interpolate(0.1);
  EXPECT_EQ(g.stance.coeffs, a.stance.coeffs);
  EXPECT_EQ(g.flight.coeffs, a.flight.coeffs);
  EXPECT_FALSE(g.clamped);
}

TEST(GaitInterpolation, MidpointIsConvexCombination) {
  const GaitLibrary lib({constant_entry(0.1, 1.0), constant_entry(0.2, 3.0)});
  const InterpolatedGait g = lib.interpolate(0.15);
  EXPECT_LE((g.stance.coeffs.array() - 2.0).abs().maxCoeff(), 1e-12);
  EXPECT_LE((g.flight.coeffs.array() - 2.0).abs().maxCoeff(), 1e-12);
}

TEST(GaitInterpolation, AffineInSpeed) {
  const GaitLibrary lib({constant_entry(0.0, -1.0), constant_entry(0.5, 4.0)});
  const double a = lib.interpolate(0.1).stance.coeffs(1, 1);
  const double b = lib.interpolate(0.2).stance.coeffs(1, 1);
  const double c = lib.interpolate(0.3).stance.coeffs(1, 1);
  EXPECT_NEAR(b - a, c - b, 1e-12);
  EXPECT_LT(a, b);
}

TEST(GaitInterpolation, OutOfRangeClampsWithFlag) {
  const GaitLibrary lib({constant_entry(0.1, 1.0), constant_entry(0.2, 3.0)});
  const InterpolatedGait lo = lib.interpolate(-5.0);
  EXPECT_TRUE(lo.clamped);
  EXPECT_EQ(lo.speed, 0.1);
  const InterpolatedGait hi = lib.interpolate(5.0);
  EXPECT_TRUE(hi.clamped);
  EXPECT_EQ(hi.stance.coeffs(0, 0), 3.0);
}
