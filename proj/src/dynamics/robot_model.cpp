#include "pronk/dynamics/robot_model.hpp"

#include <cmath>
#include <string>

namespace pronk {
namespace {

LinkParams uniform_rod(double mass, double length) {
  return {mass, length, 0.5 * length, mass * length * length / 12.0};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation("robot model: " + what);
}

}  // namespace

RobotModel RobotModel::a1_planar() {
  RobotModel m;
  m.torso_mass = 6.0;
  m.torso_inertia = 0.05;
  for (Leg l : kAllLegs) {
    LegParams& leg = m.legs[index(l)];
    leg.thigh = uniform_rod(2 * 1.0, 0.2);
    leg.calf = uniform_rod(2 * 0.2, 0.2);
    leg.hip_x = l == Leg::kFront ? 0.18 : -0.18;
    leg.hip_z = 0.0;
  }
  m.q_min << -1.5, -2.7, -1.5, -2.7;
  m.q_max << 2.5, -0.3, 2.5, -0.3;
  m.qd_max = Vec4::Constant(21.0);
  // Two physical motors per lumped joint.
  m.tau_max = Vec4::Constant(2 * 33.5);
  m.friction_mu = 0.6;
  m.gravity = 9.81;
  return m;
}

double RobotModel::total_mass() const {
  double m = torso_mass;
  for (const LegParams& leg : legs) m += leg.thigh.mass + leg.calf.mass;
  return m;
}

void RobotModel::validate(bool allow_massless_legs) const {
  require(torso_mass > 0.0, "torso_mass must be positive");
  require(torso_inertia > 0.0, "torso_inertia must be positive");
  for (Leg l : kAllLegs) {
    const LegParams& leg = legs[index(l)];
    const std::string who = std::string(name(l)) + " ";
    for (const auto& [link, tag] : {std::pair{leg.thigh, "thigh"}, std::pair{leg.calf, "calf"}}) {
      const std::string field = who + tag;
      require(link.length > 0.0, field + " length must be positive");
      require(std::isfinite(link.com_offset), field + " com_offset must be finite");
      if (allow_massless_legs) {
        require(link.mass >= 0.0 && link.inertia >= 0.0, field + " mass/inertia must be >= 0");
      } else {
        require(link.mass > 0.0, field + " mass must be positive");
        require(link.inertia > 0.0, field + " inertia must be positive");
      }
    }
  }
  for (int j = 0; j < kJointDofs; ++j) {
    require(q_min[j] < q_max[j], "q_min < q_max violated at joint " + std::to_string(j));
    require(qd_max[j] > 0.0, "qd_max must be positive");
    require(tau_max[j] > 0.0, "tau_max must be positive");
  }
  require(friction_mu > 0.0, "friction_mu must be positive");
  require(gravity > 0.0, "gravity must be positive");
}

}  // namespace pronk
