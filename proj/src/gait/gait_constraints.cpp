#include "pronk/gait/gait_constraints.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pronk/dynamics/dynamics.hpp"

namespace pronk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ConstraintCheck make(const std::string& name, double margin, bool pass, std::string detail) {
  return {name, pass, margin, std::move(detail)};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

bool FeasibilityReport::feasible() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.pass; });
}

const ConstraintCheck& FeasibilityReport::at(const std::string& name) const {
  for (const ConstraintCheck& c : checks) {
    if (c.name == name) return c;
  }
  throw ContractViolation("no constraint named '" + name + "'");
}

FeasibilityReport check_gait_constraints(const GaitEntry& entry, const RobotModel& model,
                                         const GaitRollout& rollout,
                                         const ConstraintTolerances& tol) {
  FeasibilityReport report;
  const auto& xs = rollout.samples;
  if (xs.size() < 2) {
    for (const char* n : {"average_speed", "apex_height", "configuration_limits", "velocity_limits",
                          "torque_limits", "friction_cone", "flight_clearance", "periodicity"}) {
      report.checks.push_back(make(n, -kInf, false, "rollout has fewer than two samples"));
    }
    return report;
  }
  const RolloutSample& first = xs.front();
  const RolloutSample& last = xs.back();

  const double duration = last.time - first.time;
  const double v = duration > 0.0 ? (last.q[0] - first.q[0]) / duration : 0.0;
  const double speed_margin = tol.speed - std::abs(v - entry.speed);
  report.checks.push_back(make("average_speed", speed_margin, duration > 0.0 && speed_margin >= 0.0,
                               "achieved " + fmt(v) + " m/s for " + fmt(entry.speed)));

  double apex = -kInf;
  for (const RolloutSample& s : xs) {
    if (s.mode == Phase::kFlight) apex = std::max(apex, s.q[1]);
  }
  const double apex_margin = apex - entry.apex_height;
  report.checks.push_back(make("apex_height", apex_margin, apex_margin >= -tol.apex,
                               "apex " + fmt(apex) + " m for " + fmt(entry.apex_height)));

  double q_margin = kInf, qd_margin = kInf, tau_margin = kInf;
  for (const RolloutSample& s : xs) {
    for (int j = 0; j < kJointDofs; ++j) {
      const double q = s.q[kBaseDofs + j];
      q_margin = std::min({q_margin, q - model.q_min[j], model.q_max[j] - q});
      qd_margin = std::min(qd_margin, model.qd_max[j] - std::abs(s.qd[kBaseDofs + j]));
      tau_margin = std::min(tau_margin, model.tau_max[j] - std::abs(s.tau[j]));
    }
  }
  report.checks.push_back(make("configuration_limits", q_margin, q_margin >= 0.0, "rad"));
  report.checks.push_back(make("velocity_limits", qd_margin, qd_margin >= 0.0, "rad/s"));
  report.checks.push_back(make("torque_limits", tau_margin, tau_margin >= 0.0, "N m"));

  double cone = kInf;
  for (const RolloutSample& s : xs) {
    if (s.mode != Phase::kStance) continue;
    for (int l = 0; l < kLegs; ++l) {
      cone = std::min(cone, model.friction_mu * std::abs(s.lam_n[l]) - std::abs(s.lam_t[l]));
    }
  }
  report.checks.push_back(make("friction_cone", cone, cone >= 0.0, "N"));

  double clearance = kInf;
  for (const RolloutSample& s : xs) {
    if (s.mode != Phase::kFlight) continue;
    for (Leg l : kAllLegs) clearance = std::min(clearance, foot_position(model, s.q, l).y());
  }
  report.checks.push_back(make("flight_clearance", clearance, clearance >= -tol.clearance, "m"));

  const double drift = (last.q.tail<kDofs - 1>() - first.q.tail<kDofs - 1>()).norm();
  report.checks.push_back(make("periodicity", tol.periodicity - drift, drift <= tol.periodicity,
                               "|q(t_f) - q(t_0)| = " + fmt(drift)));
  return report;
}

bool bilateral_symmetric(const GaitEntry& entry, double tol) {
  for (const BezierPhase* p : {&entry.stance, &entry.flight}) {
    const auto front = p->coeffs.middleRows(thigh_joint(Leg::kFront), 2);
    const auto rear = p->coeffs.middleRows(thigh_joint(Leg::kRear), 2);
    if ((front - rear).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace pronk
