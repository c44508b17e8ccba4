#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pronk/dynamics/dynamics.hpp"
#include "pronk/filters/filters.hpp"

using namespace pronk;

namespace {

std::vector<double> test_signal() {
  std::vector<double> x(40);
  for (int i = 0; i < 40; ++i) x[i] = std::sin(0.05 * i) + 0.3 * std::cos(0.31 * i) + 0.01 * i;
  return x;
}

// Reference values from scipy.signal (butter, lfilter, filtfilt with
// padtype="odd", padlen = 3 * order).
constexpr double kButterB[] = {0.0004165461390757476, 0.0012496384172272427, 0.0012496384172272427,
                               0.0004165461390757476};
constexpr double kButterA[] = {1.0, -2.686157396548143, 2.4196551109664717, -0.7301653453057226};

}  // namespace

TEST(Filters, ButterworthMatchesReferenceDesign) {
  const IIRCoefficients c = IIRCoefficients::butter3_25hz_unity();
  ASSERT_EQ(c.order(), 3);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(c.b()[i], kButterB[i], 1e-15);
    EXPECT_NEAR(c.a()[i], kButterA[i], 1e-14);
  }
  EXPECT_NEAR(c.dc_gain(), 1.0, 1e-12);
  EXPECT_LT(c.max_pole_radius(), 1.0);
}

TEST(Filters, PaperPresetDcGain) {
  const IIRCoefficients c = IIRCoefficients::paper_verbatim();
  EXPECT_NEAR(c.dc_gain(), 0.8, 1e-12);
  EXPECT_NEAR(c.max_pole_radius(), 0.8892094913422018, 1e-9);
}

TEST(Filters, PresetLookup) {
  for (const std::string& n : kFilterPresets) EXPECT_NO_THROW(IIRCoefficients::preset(n));
  EXPECT_THROW(IIRCoefficients::preset("nope"), ContractViolation);
}

TEST(Filters, CausalPassMatchesReference) {
  const auto y = iir_forward(IIRCoefficients::butter3_25hz_unity(), test_signal());
  EXPECT_NEAR(y[0], 0.00012496384172272428, 1e-15);
  EXPECT_NEAR(y[1], 0.000854555425791847, 1e-15);
  EXPECT_NEAR(y[5], 0.023096060545104023, 1e-14);
  EXPECT_NEAR(y[20], 0.33942095478543793, 1e-13);
  EXPECT_NEAR(y[39], 1.206813418262829, 1e-13);
}

TEST(Filters, ZeroPhaseMatchesReferenceUnity) {
  const auto y = zero_phase_filter(IIRCoefficients::butter3_25hz_unity(), test_signal());
  EXPECT_NEAR(y[0], 0.2902841011353247, 1e-12);
  EXPECT_NEAR(y[1], 0.3014357727576312, 1e-12);
  EXPECT_NEAR(y[5], 0.3779380911877631, 1e-12);
  EXPECT_NEAR(y[20], 0.9924871075611604, 1e-12);
  EXPECT_NEAR(y[38], 1.3914008284554649, 1e-12);
  EXPECT_NEAR(y[39], 1.398384921641275, 1e-12);
}

TEST(Filters, ZeroPhaseMatchesReferencePaperPreset) {
  const auto y = zero_phase_filter(IIRCoefficients::paper_verbatim(), test_signal());
  EXPECT_NEAR(y[0], 0.19127202511468924, 1e-12);
  EXPECT_NEAR(y[1], 0.17666123145426285, 1e-12);
  EXPECT_NEAR(y[5], 0.10218069719563586, 1e-12);
  EXPECT_NEAR(y[20], 0.9066410073772527, 1e-12);
  EXPECT_NEAR(y[38], 0.9604707405409547, 1e-12);
  EXPECT_NEAR(y[39], 1.0249888641401768, 1e-12);
}

TEST(Filters, IdentityFilterPassesThrough) {
  const IIRCoefficients id({1.0}, {1.0});
  const auto x = test_signal();
  EXPECT_EQ(iir_forward(id, x), x);
}

TEST(Filters, ConstantSignalPassesUnityPreset) {
  const std::vector<double> x(60, 2.5);
  for (double v : zero_phase_filter(IIRCoefficients::butter3_25hz_unity(), x)) EXPECT_NEAR(v, 2.5, 1e-9);
}

TEST(Filters, RejectsShortSignalsAndBadCoefficients) {
  const std::vector<double> x(8, 1.0);
  EXPECT_THROW(zero_phase_filter(IIRCoefficients::butter3_25hz_unity(), x), FilterLengthError);
  EXPECT_THROW(IIRCoefficients({1.0}, {0.0, 1.0}), std::exception);
  EXPECT_THROW(IIRCoefficients({1.0}, {1.0, -1.5}), std::exception);  // unstable pole
}

TEST(Filters, ZeroPhaseHasNoLag) {
  const int n = 2000;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * 5.0 * i / 1000.0);
  const auto y = zero_phase_filter(IIRCoefficients::butter3_25hz_unity(), x);
  int best = 0;
  double best_c = -1e300;
  for (int lag = -20; lag <= 20; ++lag) {
    double c = 0.0;
    for (int i = 200; i < n - 200; ++i) c += x[i] * y[i + lag];
    if (c > best_c) {
      best_c = c;
      best = lag;
    }
  }
  EXPECT_EQ(best, 0);
}

TEST(Filters, VelocityLowPassConvergesGeometrically) {
  VelocityEstimatorState s;
  s.alpha = 0.25;
  for (int k = 1; k <= 10; ++k) {
    low_pass_step(s, 1.0);
    EXPECT_NEAR(s.velocity, 1.0 - std::pow(0.75, k), 1e-14);
  }
  s.alpha = 0.0;
  EXPECT_THROW(low_pass_step(s, 1.0), ContractViolation);
}

TEST(Filters, LegOdometryRecoversTorsoVelocity) {
  const RobotModel m = RobotModel::a1_planar();
  GeneralizedState s;
  s.q << 0.1, 0.3, 0.6, -1.3, 0.6, -1.3;
  // Choose joint rates that keep the feet pinned while the torso moves.
  const Vec2 v_torso(0.4, -0.2);
  for (Leg l : kAllLegs) {
    const Mat26 j = foot_jacobian(m, s.q, l);
    const Mat2 jj = j.middleCols<2>(thigh_slot(l));
    s.qd.segment<2>(thigh_slot(l)) = jj.inverse() * (-v_torso);
  }
  s.qd.head<2>() = v_torso;
  const ContactSet c = ContactSet::both(foot_position(m, s.q, Leg::kFront), foot_position(m, s.q, Leg::kRear));
  EXPECT_LE((leg_odometry_velocity(m, s, c) - v_torso).norm(), 1e-12);
  EXPECT_THROW(leg_odometry_velocity(m, s, ContactSet{}), EstimatorError);
}
