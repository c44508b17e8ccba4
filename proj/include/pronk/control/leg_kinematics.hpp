#pragma once

#include "pronk/dynamics/robot_model.hpp"

namespace pronk {

struct LegJoints {
  double thigh = 0.0;
  double calf = 0.0;
};

// theta = q_thigh + q_calf / 2; the hip-to-foot direction from vertical when
// both links have equal length.
double leg_angle(double q_thigh, double q_calf);

// Closed-form two-link IK for a foot target relative to the hip, knee-backward
// branch (calf <= 0). Throws WorkspaceError when the target lies outside the
// annulus [|L1 - L2|, L1 + L2]; distance_to_boundary() reports how far.
LegJoints leg_ik(const LegParams& leg, const Vec2& foot_rel);

}  // namespace pronk
