#pragma once

#include <array>

#include "pronk/types.hpp"

namespace pronk {

struct LinkParams {
  double mass = 0.0;        // kg (lumped left+right pair)
  double length = 0.0;      // m
  double com_offset = 0.0;  // m, from the proximal joint along the link
  double inertia = 0.0;     // kg m^2 about the link COM
};

struct LegParams {
  LinkParams thigh;
  LinkParams calf;
  double hip_x = 0.0;  // m, hip offset from the torso origin
  double hip_z = 0.0;
};

// Planar sagittal quadruped with left/right legs lumped into a front and a
// rear pair and torso pitch locked.
//
// Joint angle convention: both joints at zero put the leg straight down. A
// positive thigh angle swings the foot backward (foot x = -L1 sin(q_t) - ...),
// and the knee-backward posture has calf <= 0.
struct RobotModel {
  double torso_mass = 6.0;
  double torso_inertia = 0.05;  // unused while pitch is locked
  std::array<LegParams, kLegs> legs{};

  Vec4 q_min = Vec4::Zero();
  Vec4 q_max = Vec4::Zero();
  Vec4 qd_max = Vec4::Zero();
  Vec4 tau_max = Vec4::Zero();
  double friction_mu = 0.6;
  double gravity = 9.81;

  static constexpr int n_base = kBaseDofs;
  static constexpr int n_joints = kJointDofs;
  static constexpr int n_dofs = kDofs;

  // A1-scale defaults for the lumped planar model.
  static RobotModel a1_planar();

  const LegParams& leg(Leg l) const { return legs[index(l)]; }
  double total_mass() const;

  // Throws ContractViolation naming the first offending field. Zero leg mass
  // is accepted only when allow_massless_legs is set (test fixtures).
  void validate(bool allow_massless_legs = false) const;
};

// Positions and velocities in the ordering x, z, thigh_F, calf_F, thigh_R, calf_R.
struct GeneralizedState {
  Vec6 q = Vec6::Zero();
  Vec6 qd = Vec6::Zero();

  Vec4 joints() const { return q.tail<kJointDofs>(); }
  Vec4 joint_rates() const { return qd.tail<kJointDofs>(); }
  bool finite() const { return q.allFinite() && qd.allFinite(); }
};

}  // namespace pronk
