#pragma once

// Floating-base planar dynamics
//
//   M(q) qdd + h(q, qd) = S tau + J^T lambda
//
// with h the Coriolis/centrifugal plus gravity vector and S = [0; I] mapping
// the four joint torques into generalized forces. In stance the feet are
// pinned (J qdd + sigma = 0) and accelerations and contact forces come from
// one dense KKT solve.
//
// All functions are pure. Inputs taking Eigen::Ref<const Eigen::VectorXd> are
// dimension-checked and throw ContractViolation on mismatch.

#include <array>
#include <optional>

#include "pronk/dynamics/robot_model.hpp"

namespace pronk {

using VecRef = Eigen::Ref<const Eigen::VectorXd>;

struct ContactSet {
  // Anchored world foot position per leg; present iff the leg is in contact.
  std::array<std::optional<Vec2>, kLegs> anchor{};

  bool in_contact(Leg l) const { return anchor[index(l)].has_value(); }
  int count() const;
  bool any() const { return count() > 0; }
  static ContactSet both(const Vec2& front, const Vec2& rear);
};

struct ContactForce {
  double tangential = 0.0;  // N, along +x
  double normal = 0.0;      // N, along +z (positive pushes the robot up)
};

struct GroundReaction {
  std::array<std::optional<ContactForce>, kLegs> force{};

  double total_normal() const;
  double total_tangential() const;
};

struct MassMatrix {
  Mat6 matrix = Mat6::Zero();
  bool regularized = false;  // joint block was singular; 1e-9 added to the diagonal
};

using SaturationFlags = std::array<bool, kJointDofs>;

struct FlightResult {
  Vec6 qdd = Vec6::Zero();
  SaturationFlags saturated{};
};

struct StanceResult {
  Vec6 qdd = Vec6::Zero();
  GroundReaction grf;
  SaturationFlags saturated{};
  double rcond = 0.0;  // reciprocal condition estimate of the KKT matrix
};

inline constexpr double kMassRegularization = 1e-9;
inline constexpr double kMinKktRcond = 1e-12;

MassMatrix mass_matrix(const RobotModel& model, const VecRef& q);

// h(q, qd) = H(q, qd) qd + G(q).
Vec6 bias_forces(const RobotModel& model, const GeneralizedState& state);

// Potential plus kinetic energy; used by the energy-drift checks.
double total_energy(const RobotModel& model, const GeneralizedState& state);

// Horizontal linear momentum of the whole system.
double horizontal_momentum(const RobotModel& model, const GeneralizedState& state);

Vec2 foot_position(const RobotModel& model, const VecRef& q, Leg leg);
// Foot relative to its hip; depends only on that leg's two joint angles.
Vec2 foot_relative(const LegParams& leg, double q_thigh, double q_calf);

// Sum of link mass times link COM position relative to the hip.
Vec2 leg_mass_moment(const LegParams& leg, double q_thigh, double q_calf);

Mat26 foot_jacobian(const RobotModel& model, const VecRef& q, Leg leg);

// sigma = Jdot qd.
Vec2 bias_acceleration(const RobotModel& model, const GeneralizedState& state, Leg leg);

// Clamp to +/- tau_max, reporting which joints saturated.
Vec4 saturate(const RobotModel& model, const Vec4& tau, SaturationFlags* flags);

FlightResult flight_dynamics(const RobotModel& model, const GeneralizedState& state,
                             const VecRef& tau);

// Solves the stance KKT system. With baumgarte_omega > 0 the contact rows
// become J qdd + sigma + 2 w (J qd) + w^2 (c - anchor) = 0, critically damping
// numerical drift of the anchored feet.
StanceResult stance_dynamics(const RobotModel& model, const GeneralizedState& state,
                             const VecRef& tau, const ContactSet& contacts,
                             double baumgarte_omega = 0.0);

// Perfectly plastic touchdown impact: projects qd onto the velocities that
// keep the contacting feet at rest, qd+ = qd- - M^-1 J^T (J M^-1 J^T)^-1 J qd-.
Vec6 contact_impulse_velocity(const RobotModel& model, const GeneralizedState& state,
                              const ContactSet& contacts);

}  // namespace pronk
