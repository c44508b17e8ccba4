#include "pronk/control/leg_kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pronk {

double leg_angle(double q_thigh, double q_calf) { return q_thigh + 0.5 * q_calf; }

LegJoints leg_ik(const LegParams& leg, const Vec2& foot_rel) {
  const double l1 = leg.thigh.length;
  const double l2 = leg.calf.length;
  const double r = foot_rel.norm();
  const double r_min = std::abs(l1 - l2);
  const double r_max = l1 + l2;
  // Allow a few ulps so that exactly-reachable targets on the boundary pass.
  const double slack = 1e-12 * r_max;
  if (!std::isfinite(r) || r > r_max + slack || r < r_min - slack) {
    const double dist = r > r_max ? r - r_max : r_min - r;
    throw WorkspaceError("foot target at distance " + std::to_string(r) +
                             " outside leg workspace [" + std::to_string(r_min) + ", " +
                             std::to_string(r_max) + "], off by " + std::to_string(dist),
                         dist);
  }
  const double cos_calf = std::clamp((r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  LegJoints j;
  j.calf = -std::acos(cos_calf);
  // Foot direction measured like the joints: zero straight down, positive backward.
  const double foot_dir = std::atan2(-foot_rel.x(), -foot_rel.y());
  const double offset = std::atan2(l2 * std::sin(j.calf), l1 + l2 * std::cos(j.calf));
  j.thigh = foot_dir - offset;
  return j;
}

}  // namespace pronk
