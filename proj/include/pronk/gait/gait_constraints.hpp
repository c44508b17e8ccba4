#pragma once

// Post-hoc feasibility check of a gait against a simulated rollout.

#include <string>
#include <vector>

#include "pronk/gait/gait_library.hpp"

namespace pronk {

struct RolloutSample {
  double time = 0.0;
  Vec6 q = Vec6::Zero();
  Vec6 qd = Vec6::Zero();
  Vec4 tau = Vec4::Zero();  // N m, applied joint torques
  Vec2 lam_t = Vec2::Zero();
  Vec2 lam_n = Vec2::Zero();
  Phase mode = Phase::kStance;
};

// One stride of samples, first sample at t_0 and last at t_f.
struct GaitRollout {
  std::vector<RolloutSample> samples;
};

struct ConstraintTolerances {
  double speed = 0.05;        // m/s
  double apex = 0.0;          // m below the target apex
  double periodicity = 0.05;  // norm of q(t_f) - q(t_0) without x
  double clearance = 1e-9;    // m below ground accepted in flight
};

// Margin is positive when satisfied; a failed check reports its worst violation.
struct ConstraintCheck {
  std::string name;
  bool pass = true;
  double margin = 0.0;
  std::string detail;
};

struct FeasibilityReport {
  std::vector<ConstraintCheck> checks;
  bool feasible() const;
  // Throws ContractViolation for an unknown name.
  const ConstraintCheck& at(const std::string& name) const;
};

// Rows: average_speed, apex_height, configuration_limits, velocity_limits,
// torque_limits, friction_cone, flight_clearance, periodicity. An empty
// rollout fails every row.
FeasibilityReport check_gait_constraints(const GaitEntry& entry, const RobotModel& model,
                                         const GaitRollout& rollout,
                                         const ConstraintTolerances& tol = {});

// Same reference for the front and rear legs to within tol in every coefficient.
bool bilateral_symmetric(const GaitEntry& entry, double tol = 1e-9);

}  // namespace pronk
