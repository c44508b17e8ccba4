#include "pronk/dynamics/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pronk {
namespace {

constexpr int kMaxKkt = kDofs + 2 * kLegs;
using KktMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxKkt, kMaxKkt>;
using KktVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxKkt, 1>;

// A point on one leg: position relative to the hip, its Jacobian w.r.t. the
// leg's (thigh, calf) angles, and the velocity-product acceleration Jdot*qd.
struct PointKinematics {
  Vec2 rel;
  Mat2 jac;  // columns: d/dq_thigh, d/dq_calf
  Vec2 bias;
};

// Point at distance `along_calf` down the calf (or along the thigh when
// on_calf is false).
PointKinematics leg_point(const LegParams& leg, double qt, double qc, double qtd, double qcd,
                          double along, bool on_calf) {
  const double phi = qt + qc;
  const double phid = qtd + qcd;
  const double st = std::sin(qt), ct = std::cos(qt);
  const double sp = std::sin(phi), cp = std::cos(phi);
  PointKinematics k;
  if (!on_calf) {
    k.rel = along * Vec2(-st, -ct);
    k.jac.col(0) = along * Vec2(-ct, st);
    k.jac.col(1).setZero();
    k.bias = along * qtd * qtd * Vec2(st, ct);
    return k;
  }
  const double l1 = leg.thigh.length;
  k.rel = l1 * Vec2(-st, -ct) + along * Vec2(-sp, -cp);
  k.jac.col(1) = along * Vec2(-cp, sp);
  k.jac.col(0) = l1 * Vec2(-ct, st) + k.jac.col(1);
  k.bias = l1 * qtd * qtd * Vec2(st, ct) + along * phid * phid * Vec2(sp, cp);
  return k;
}

// Embed a per-leg point Jacobian into the full 2 x 6 generalized Jacobian.
Mat26 embed(const Mat2& leg_jac, Leg leg) {
  Mat26 j = Mat26::Zero();
  j.leftCols<2>().setIdentity();
  j.middleCols<2>(thigh_slot(leg)) = leg_jac;
  return j;
}

void check_q(const VecRef& q) {
  if (q.size() != kDofs) {
    throw ContractViolation("expected " + std::to_string(kDofs) + " generalized coordinates, got " +
                            std::to_string(q.size()));
  }
  if (!q.allFinite()) throw ContractViolation("generalized coordinates must be finite");
}

void check_state(const GeneralizedState& s) {
  if (!s.finite()) throw ContractViolation("state must be finite");
}

Vec4 check_tau(const VecRef& tau) {
  if (tau.size() != kJointDofs) {
    throw ContractViolation("expected " + std::to_string(kJointDofs) + " joint torques, got " +
                            std::to_string(tau.size()));
  }
  if (!tau.allFinite()) throw ContractViolation("joint torques must be finite");
  return tau;
}

Vec6 select(const Vec4& tau) {
  Vec6 g = Vec6::Zero();
  g.tail<kJointDofs>() = tau;
  return g;
}

struct ContactRows {
  Eigen::Matrix<double, 2 * kLegs, kDofs> jac;
  Eigen::Matrix<double, 2 * kLegs, 1> rhs;  // -(sigma + stabilization)
  std::array<Leg, kLegs> legs{};
  int count = 0;
};

ContactRows contact_rows(const RobotModel& model, const GeneralizedState& state,
                         const ContactSet& contacts, double omega) {
  ContactRows rows;
  rows.jac.setZero();
  rows.rhs.setZero();
  for (Leg l : kAllLegs) {
    if (!contacts.in_contact(l)) continue;
    const int r = 2 * rows.count;
    const Mat26 j = foot_jacobian(model, state.q, l);
    rows.jac.middleRows<2>(r) = j;
    Vec2 rhs = -bias_acceleration(model, state, l);
    if (omega > 0.0) {
      const Vec2 drift = foot_position(model, state.q, l) - *contacts.anchor[index(l)];
      rhs -= 2.0 * omega * (j * state.qd) + omega * omega * drift;
    }
    rows.rhs.segment<2>(r) = rhs;
    rows.legs[rows.count++] = l;
  }
  return rows;
}

std::string leg_list(const ContactRows& rows) {
  std::string s;
  for (int i = 0; i < rows.count; ++i) {
    if (i) s += ", ";
    s += name(rows.legs[i]);
  }
  return s;
}

}  // namespace

int ContactSet::count() const {
  int n = 0;
  for (const auto& a : anchor) n += a.has_value() ? 1 : 0;
  return n;
}

ContactSet ContactSet::both(const Vec2& front, const Vec2& rear) {
  ContactSet c;
  c.anchor[index(Leg::kFront)] = front;
  c.anchor[index(Leg::kRear)] = rear;
  return c;
}

double GroundReaction::total_normal() const {
  double n = 0.0;
  for (const auto& f : force) n += f ? f->normal : 0.0;
  return n;
}

double GroundReaction::total_tangential() const {
  double t = 0.0;
  for (const auto& f : force) t += f ? f->tangential : 0.0;
  return t;
}

MassMatrix mass_matrix(const RobotModel& model, const VecRef& q) {
  check_q(q);
  MassMatrix out;
  Mat6& m = out.matrix;
  m.setZero();
  m(0, 0) = m(1, 1) = model.torso_mass;
  for (Leg l : kAllLegs) {
    const LegParams& leg = model.leg(l);
    const int t = thigh_slot(l);
    const double qt = q[t], qc = q[t + 1];
    const PointKinematics thigh = leg_point(leg, qt, qc, 0, 0, leg.thigh.com_offset, false);
    const PointKinematics calf = leg_point(leg, qt, qc, 0, 0, leg.calf.com_offset, true);
    const Mat26 jt = embed(thigh.jac, l);
    const Mat26 jc = embed(calf.jac, l);
    m.noalias() += leg.thigh.mass * jt.transpose() * jt + leg.calf.mass * jc.transpose() * jc;
    // Thigh spins at qt_dot, calf at qt_dot + qc_dot.
    m(t, t) += leg.thigh.inertia + leg.calf.inertia;
    m(t, t + 1) += leg.calf.inertia;
    m(t + 1, t) += leg.calf.inertia;
    m(t + 1, t + 1) += leg.calf.inertia;
  }
  // Guard exact symmetry against rounding in the outer products.
  m = 0.5 * (m + m.transpose()).eval();

  const Eigen::Matrix4d joint_block = m.bottomRightCorner<kJointDofs, kJointDofs>();
  if (joint_block.ldlt().vectorD().minCoeff() <= 0.0 || joint_block.diagonal().minCoeff() <= 0.0) {
    m.diagonal().tail<kJointDofs>().array() += kMassRegularization;
    out.regularized = true;
  }
  return out;
}

Vec6 bias_forces(const RobotModel& model, const GeneralizedState& state) {
  check_state(state);
  const Vec6& q = state.q;
  const Vec6& qd = state.qd;
  Vec6 h = Vec6::Zero();
  const double g = model.gravity;
  h[1] += model.torso_mass * g;
  for (Leg l : kAllLegs) {
    const LegParams& leg = model.leg(l);
    const int t = thigh_slot(l);
    const PointKinematics pts[2] = {
        leg_point(leg, q[t], q[t + 1], qd[t], qd[t + 1], leg.thigh.com_offset, false),
        leg_point(leg, q[t], q[t + 1], qd[t], qd[t + 1], leg.calf.com_offset, true)};
    const double masses[2] = {leg.thigh.mass, leg.calf.mass};
    for (int i = 0; i < 2; ++i) {
      const Mat26 j = embed(pts[i].jac, l);
      // m J^T (Jdot qd) plus gravity m g dz/dq.
      h.noalias() += masses[i] * j.transpose() * (pts[i].bias + Vec2(0.0, g));
    }
  }
  return h;
}

double total_energy(const RobotModel& model, const GeneralizedState& state) {
  const Mat6 m = mass_matrix(model, state.q).matrix;
  double potential = model.torso_mass * state.q[1];
  for (Leg l : kAllLegs) {
    const LegParams& leg = model.leg(l);
    const int t = thigh_slot(l);
    const double hip_z = state.q[1] + leg.hip_z;
    potential += leg.thigh.mass *
                 (hip_z + leg_point(leg, state.q[t], state.q[t + 1], 0, 0, leg.thigh.com_offset, false).rel.y());
    potential += leg.calf.mass *
                 (hip_z + leg_point(leg, state.q[t], state.q[t + 1], 0, 0, leg.calf.com_offset, true).rel.y());
  }
  return 0.5 * state.qd.dot(m * state.qd) + model.gravity * potential;
}

double horizontal_momentum(const RobotModel& model, const GeneralizedState& state) {
  return mass_matrix(model, state.q).matrix.row(0).dot(state.qd);
}

Vec2 foot_relative(const LegParams& leg, double q_thigh, double q_calf) {
  return leg_point(leg, q_thigh, q_calf, 0, 0, leg.calf.length, true).rel;
}

Vec2 leg_mass_moment(const LegParams& leg, double q_thigh, double q_calf) {
  return leg.thigh.mass * leg_point(leg, q_thigh, q_calf, 0, 0, leg.thigh.com_offset, false).rel +
         leg.calf.mass * leg_point(leg, q_thigh, q_calf, 0, 0, leg.calf.com_offset, true).rel;
}

Vec2 foot_position(const RobotModel& model, const VecRef& q, Leg leg) {
  check_q(q);
  const LegParams& p = model.leg(leg);
  const int t = thigh_slot(leg);
  return Vec2(q[0] + p.hip_x, q[1] + p.hip_z) + foot_relative(p, q[t], q[t + 1]);
}

Mat26 foot_jacobian(const RobotModel& model, const VecRef& q, Leg leg) {
  check_q(q);
  const LegParams& p = model.leg(leg);
  const int t = thigh_slot(leg);
  return embed(leg_point(p, q[t], q[t + 1], 0, 0, p.calf.length, true).jac, leg);
}

Vec2 bias_acceleration(const RobotModel& model, const GeneralizedState& state, Leg leg) {
  check_state(state);
  const LegParams& p = model.leg(leg);
  const int t = thigh_slot(leg);
  return leg_point(p, state.q[t], state.q[t + 1], state.qd[t], state.qd[t + 1], p.calf.length, true)
      .bias;
}

Vec4 saturate(const RobotModel& model, const Vec4& tau, SaturationFlags* flags) {
  Vec4 out;
  for (int j = 0; j < kJointDofs; ++j) {
    const double lim = model.tau_max[j];
    out[j] = std::clamp(tau[j], -lim, lim);
    if (flags) (*flags)[j] = std::abs(tau[j]) > lim;
  }
  return out;
}

FlightResult flight_dynamics(const RobotModel& model, const GeneralizedState& state,
                             const VecRef& tau) {
  FlightResult r;
  const Vec4 applied = saturate(model, check_tau(tau), &r.saturated);
  const Mat6 m = mass_matrix(model, state.q).matrix;
  r.qdd = m.ldlt().solve(select(applied) - bias_forces(model, state));
  return r;
}

StanceResult stance_dynamics(const RobotModel& model, const GeneralizedState& state,
                             const VecRef& tau, const ContactSet& contacts,
                             double baumgarte_omega) {
  if (!contacts.any()) throw ContractViolation("stance_dynamics requires at least one contact");
  StanceResult r;
  const Vec4 applied = saturate(model, check_tau(tau), &r.saturated);
  const ContactRows rows = contact_rows(model, state, contacts, baumgarte_omega);
  const int nc = 2 * rows.count;
  const int n = kDofs + nc;

  KktMatrix kkt = KktMatrix::Zero(n, n);
  kkt.topLeftCorner<kDofs, kDofs>() = mass_matrix(model, state.q).matrix;
  kkt.topRightCorner(kDofs, nc) = -rows.jac.topRows(nc).transpose();
  kkt.bottomLeftCorner(nc, kDofs) = rows.jac.topRows(nc);

  KktVector rhs(n);
  rhs.head<kDofs>() = select(applied) - bias_forces(model, state);
  rhs.tail(nc) = rows.rhs.head(nc);

  const Eigen::PartialPivLU<KktMatrix> lu(kkt);
  r.rcond = lu.rcond();
  if (!(r.rcond >= kMinKktRcond)) {
    throw DegenerateConfiguration("stance KKT matrix is singular or badly conditioned (rcond " +
                                  std::to_string(r.rcond) + ") for legs: " + leg_list(rows));
  }
  const KktVector sol = lu.solve(rhs);
  r.qdd = sol.head<kDofs>();
  for (int i = 0; i < rows.count; ++i) {
    r.grf.force[index(rows.legs[i])] = ContactForce{sol[kDofs + 2 * i], sol[kDofs + 2 * i + 1]};
  }
  return r;
}

Vec6 contact_impulse_velocity(const RobotModel& model, const GeneralizedState& state,
                              const ContactSet& contacts) {
  if (!contacts.any()) return state.qd;
  const ContactRows rows = contact_rows(model, state, contacts, 0.0);
  const int nc = 2 * rows.count;
  const Eigen::MatrixXd j = rows.jac.topRows(nc);
  const Eigen::LDLT<Mat6> m = mass_matrix(model, state.q).matrix.ldlt();
  const Eigen::MatrixXd minv_jt = m.solve(j.transpose());
  const Eigen::MatrixXd delassus = j * minv_jt;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(delassus);
  if (!(lu.rcond() >= kMinKktRcond)) {
    throw DegenerateConfiguration("touchdown impulse is ill-posed for legs: " + leg_list(rows));
  }
  const Eigen::VectorXd impulse = lu.solve(j * state.qd);
  return state.qd - minv_jt * impulse;
}

}  // namespace pronk
