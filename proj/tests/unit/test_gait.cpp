#include <gtest/gtest.h>

#include <cmath>

#include "pronk/dynamics/dynamics.hpp"
#include "pronk/gait/gait_constraints.hpp"
#include "pronk/gait/gait_generator.hpp"
#include "pronk/sim/export.hpp"
#include "pronk/sim/simulator.hpp"

using namespace pronk;

namespace {

const RobotModel kModel = RobotModel::a1_planar();

const GaitLibrary& library() {
  static const GaitLibrary lib =
      generate_gait_library(kModel, default_library_speeds(), 0.34, 0.4, 0.5);
  return lib;
}

GaitRollout flat_rollout(const GaitEntry& e, int n, double vx) {
  GaitRollout r;
  for (int i = 0; i < n; ++i) {
    RolloutSample s;
    s.time = i * 0.01;
    const StrideReference ref = stride_reference(e, static_cast<double>(i) / (n - 1));
    s.q << vx * s.time, 0.30, ref.q;
    s.mode = ref.phase;
    if (s.mode == Phase::kStance) s.lam_n = Vec2(50.0, 50.0);
    if (s.mode == Phase::kFlight) s.q[1] = 0.34;
    r.samples.push_back(s);
  }
  return r;
}

}  // namespace

TEST(GaitGenerator, DefaultSpeedSweep) {
  const auto v = default_library_speeds();
  ASSERT_EQ(v.size(), 14u);
  EXPECT_NEAR(v.front(), -0.5, 1e-12);
  EXPECT_NEAR(v.back(), 0.8, 1e-12);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_NEAR(v[i] - v[i - 1], 0.1, 1e-12);
}

TEST(GaitGenerator, EntriesAreValidAndContinuous) {
  for (const GaitEntry& e : library().entries()) {
    EXPECT_NO_THROW(e.validate(&kModel));
    EXPECT_NEAR(e.stance.duration, 0.2, 1e-12);
    EXPECT_NEAR(e.flight.duration, 0.2, 1e-12);
    EXPECT_LE((e.stance.eval(1.0) - e.flight.eval(0.0)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(e.stance.order(), 6);
    EXPECT_TRUE(bilateral_symmetric(e));
  }
}

TEST(GaitGenerator, StanceFootStaysPlanted) {
  // The stance reference keeps the foot at the template's foothold.
  const GaitEntry& e = library().at_speed(0.3);
  const TorsoTemplate t = reference_torso(kModel, 0.3, 0.34, 0.4, 0.5);
  for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double time = s * e.stance.duration;
    Vec6 q;
    q << t.stance_forward(time), t.stance_height(time), e.stance.eval(s);
    const Vec2 foot = foot_position(kModel, q, Leg::kFront) - Vec2(q[0], 0.0);
    const Vec2 foot0 = foot_position(kModel, (Vec6() << 0.0, t.stance_height(0.0), e.stance.eval(0.0)).finished(), Leg::kFront);
    EXPECT_NEAR(foot.x() + q[0], foot0.x(), 2e-3) << "s=" << s;
    EXPECT_NEAR(foot.y(), 0.0, 2e-3) << "s=" << s;
  }
}

TEST(GaitGenerator, TorsoTemplateBoundaryConsistency) {
  for (double v : {-0.3, 0.0, 0.5}) {
    const TorsoTemplate t = reference_torso(kModel, v, 0.34, 0.4, 0.5);
    const double ts = t.stance_time;
    EXPECT_NEAR(t.touchdown_height, 0.34 - t.gravity * t.flight_time * t.flight_time / 8.0, 1e-12);
    EXPECT_NEAR(t.stance_height(0.0), t.touchdown_height, 1e-12);
    EXPECT_NEAR(t.stance_height(ts), t.liftoff_height(), 1e-12);
    EXPECT_NEAR(t.stance_vertical_speed(0.0), -t.touchdown_vz, 1e-12);
    EXPECT_NEAR(t.stance_vertical_speed(ts), t.liftoff_vz, 1e-9);
    EXPECT_NEAR(t.stance_forward_speed(0.0), t.touchdown_vx, 1e-12);
    EXPECT_NEAR(t.stance_forward_speed(ts), t.liftoff_vx, 1e-12);
    for (double time : {0.03, 0.1, 0.17}) {
      const double h = 1e-6;
      EXPECT_NEAR((t.stance_height(time + h) - t.stance_height(time - h)) / (2 * h),
                  t.stance_vertical_speed(time), 1e-7);
      EXPECT_NEAR((t.stance_forward(time + h) - t.stance_forward(time - h)) / (2 * h),
                  t.stance_forward_speed(time), 1e-7);
      // Foothold fixed in the world during stance.
      const Vec2 foot = t.stance_foot(time);
      EXPECT_NEAR(t.stance_forward(time) + foot.x(), 0.5 * t.stance_travel(), 1e-12);
      EXPECT_NEAR(t.stance_height(time) + t.hip_z + foot.y(), 0.0, 1e-12);
    }
    // Flight foot starts at the liftoff foothold and ends at the next one.
    EXPECT_LE((t.flight_foot(0.0) - t.stance_foot(ts)).norm(), 1e-12);
    EXPECT_LE((t.flight_foot(1.0) - t.stance_foot(0.0)).norm(), 1e-12);
  }
}

TEST(GaitGenerator, RejectsUnreachableApex) {
  EXPECT_THROW(generate_reference_gait(kModel, 0.3, 2.0, 0.4, 0.5), GaitGenerationError);
  EXPECT_THROW(generate_reference_gait(kModel, 0.3, 0.34, 0.1, 0.5), std::exception);
}

TEST(GaitLibrary, RejectsUnsortedOrTooSmall) {
  const GaitEntry a = library().entries()[0];
  const GaitEntry b = library().entries()[1];
  EXPECT_THROW(GaitLibrary({a}), ContractViolation);
  EXPECT_THROW(GaitLibrary({b, a}), ContractViolation);
  EXPECT_NO_THROW(GaitLibrary({a, b}));
}

TEST(GaitLibrary, AtSpeedLookup) {
  EXPECT_TRUE(library().contains_speed(0.3));
  EXPECT_FALSE(library().contains_speed(0.35));
  EXPECT_THROW(library().at_speed(0.35), LibraryError);
}

TEST(GaitLibrary, JsonRoundTripIsExact) {
  const std::string text = gait_library_to_json(library(), R"({"k":1})");
  const GaitLibrary back = gait_library_from_json(text);
  ASSERT_EQ(back.size(), library().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const GaitEntry& a = library().entries()[i];
    const GaitEntry& b = back.entries()[i];
    EXPECT_EQ(a.speed, b.speed);
    EXPECT_EQ(a.stride_time, b.stride_time);
    EXPECT_EQ(a.stance.coeffs, b.stance.coeffs);
    EXPECT_EQ(a.flight.coeffs, b.flight.coeffs);
  }
  EXPECT_EQ(gait_library_to_json(back, R"({"k":1})"), text);
}

TEST(GaitLibrary, JsonRejectsGarbage) {
  EXPECT_THROW(gait_library_from_json("{"), std::exception);
  EXPECT_THROW(gait_library_from_json(R"({"format":"other"})"), std::exception);
}

TEST(GaitCost, ZeroTorqueStandingGaitCostsZero) {
  GaitEntry e = library().at_speed(0.0);
  for (BezierPhase* p : {&e.stance, &e.flight}) {
    for (Eigen::Index c = 0; c < p->coeffs.cols(); ++c) p->coeffs.col(c) = Vec4(0.5, -1.0, 0.5, -1.0);
  }
  const Signal4 tau = Signal4::Zero(kJointDofs, 11);
  EXPECT_NEAR(evaluate_gait_cost(e, tau, GaitCostWeights{}), 0.0, 1e-15);
  const Signal4 ones = Signal4::Ones(kJointDofs, 11);
  // Integral of 4 * 1 N^2 m^2 over 0.4 s.
  EXPECT_NEAR(evaluate_gait_cost(e, ones, GaitCostWeights{}), 1.6, 1e-12);
}

TEST(GaitConstraints, SyntheticRolloutPassesAll) {
  const GaitEntry& e = library().at_speed(0.3);
  const GaitRollout r = flat_rollout(e, 41, 0.3);
  ConstraintTolerances tol;
  tol.periodicity = 1.0;
  tol.clearance = 1.0;
  const FeasibilityReport rep = check_gait_constraints(e, kModel, r, tol);
  EXPECT_TRUE(rep.at("average_speed").pass);
  EXPECT_NEAR(rep.at("average_speed").margin, 0.05, 1e-9);
  EXPECT_TRUE(rep.at("apex_height").pass);
  EXPECT_TRUE(rep.at("configuration_limits").pass);
  EXPECT_TRUE(rep.at("friction_cone").pass);
  EXPECT_THROW(rep.at("nope"), ContractViolation);
}

TEST(GaitConstraints, ZeroTangentialForcePassesFrictionCone) {
  const GaitEntry& e = library().at_speed(0.0);
  GaitRollout r = flat_rollout(e, 21, 0.0);
  for (auto& s : r.samples) s.lam_t.setZero();
  EXPECT_TRUE(check_gait_constraints(e, kModel, r).at("friction_cone").pass);
  for (auto& s : r.samples) s.lam_t = Vec2(100.0, 0.0);
  const ConstraintCheck c = check_gait_constraints(e, kModel, r).at("friction_cone");
  EXPECT_FALSE(c.pass);
  EXPECT_NEAR(c.margin, 0.6 * 50.0 - 100.0, 1e-9);
}

TEST(GaitConstraints, DetectsViolations) {
  const GaitEntry& e = library().at_speed(0.3);
  GaitRollout r = flat_rollout(e, 41, 0.5);
  r.samples[5].tau = Vec4(100.0, 0.0, 0.0, 0.0);
  r.samples[6].qd[kBaseDofs] = 50.0;
  const FeasibilityReport rep = check_gait_constraints(e, kModel, r);
  EXPECT_FALSE(rep.feasible());
  EXPECT_FALSE(rep.at("average_speed").pass);
  EXPECT_FALSE(rep.at("torque_limits").pass);
  EXPECT_NEAR(rep.at("torque_limits").margin, 67.0 - 100.0, 1e-12);
  EXPECT_FALSE(rep.at("velocity_limits").pass);
}

TEST(GaitConstraints, EmptyRolloutFailsEveryRow) {
  const FeasibilityReport rep = check_gait_constraints(library().at_speed(0.3), kModel, GaitRollout{});
  EXPECT_EQ(rep.checks.size(), 8u);
  for (const auto& c : rep.checks) EXPECT_FALSE(c.pass);
}

TEST(GaitConstraints, SimulatedPdStrideIsPeriodicAndNearSpeed) {
  ExperimentPlan plan;
  plan.desired_speed = 0.0;
  plan.strides = 8;
  const ExperimentRecord rec = run_experiment(kModel, library(), ControllerConfig{}, SimConfig{}, plan);
  ASSERT_EQ(rec.failure, FailureCause::kNone);
  const GaitRollout r = rollout_from_ticks(rec.log.ticks, 6);
  const FeasibilityReport rep = check_gait_constraints(library().at_speed(0.0), kModel, r);
  EXPECT_TRUE(rep.at("periodicity").pass);
  EXPECT_TRUE(rep.at("configuration_limits").pass);
  EXPECT_TRUE(rep.at("torque_limits").pass);
  EXPECT_TRUE(rep.at("apex_height").pass);
}
