#include "pronk/gait/gait_generator.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "pronk/control/leg_kinematics.hpp"
#include "pronk/dynamics/dynamics.hpp"

namespace pronk {
namespace {

using std::numbers::pi;

// Cubic Hermite on [0, 1].
double hermite(double p0, double m0, double p1, double m1, double u) {
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * p1 +
         (u3 - u2) * m1;
}

LegJoints ik_or_throw(const LegParams& leg, const Vec2& target, const char* phase, int sample) {
  try {
    return leg_ik(leg, target);
  } catch (const WorkspaceError& e) {
    throw GaitGenerationError(std::string("IK infeasible in ") + phase + " sample " +
                              std::to_string(sample) + ": " + e.what());
  }
}

// Sum over both legs of the link mass moments relative to the hips, for a
// foot target shared by both legs.
Vec2 legs_moment(const RobotModel& model, const Vec2& foot_rel) {
  Vec2 m = Vec2::Zero();
  for (Leg l : kAllLegs) {
    const LegJoints j = leg_ik(model.leg(l), foot_rel);
    m += leg_mass_moment(model.leg(l), j.thigh, j.calf);
  }
  return m;
}

// Rate of the mass moment while the foot moves at `foot_vel` relative to the hip.
Vec2 legs_moment_rate(const RobotModel& model, const Vec2& foot_rel, const Vec2& foot_vel) {
  constexpr double h = 1e-6;
  return (legs_moment(model, foot_rel + h * foot_vel) - legs_moment(model, foot_rel - h * foot_vel)) /
         (2.0 * h);
}

// Both legs at `foot_rel` moving at `foot_vel`, torso at height z.
GeneralizedState shared_leg_state(const RobotModel& model, double z, const Vec2& torso_vel,
                                  const Vec2& foot_rel, const Vec2& foot_vel) {
  constexpr double h = 1e-6;
  GeneralizedState st;
  st.q.setZero();
  st.qd.setZero();
  st.q[1] = z;
  st.qd[0] = torso_vel.x();
  st.qd[1] = torso_vel.y();
  for (Leg l : kAllLegs) {
    const LegParams& leg = model.leg(l);
    const LegJoints j = leg_ik(leg, foot_rel);
    const LegJoints jp = leg_ik(leg, foot_rel + h * foot_vel);
    const LegJoints jm = leg_ik(leg, foot_rel - h * foot_vel);
    const int k = 2 + thigh_joint(l);
    st.q[k] = j.thigh;
    st.q[k + 1] = j.calf;
    st.qd[k] = (jp.thigh - jm.thigh) / (2.0 * h);
    st.qd[k + 1] = (jp.calf - jm.calf) / (2.0 * h);
  }
  return st;
}

void check_arguments(const RobotModel& model, double speed, double apex, double stride_time,
                     double duty, const GaitTemplateOptions& opt) {
  auto fail = [](const std::string& m) { throw GaitGenerationError(m); };
  if (!std::isfinite(speed)) fail("speed must be finite");
  if (!(duty > 0.2 && duty < 0.8)) fail("duty factor must lie in (0.2, 0.8)");
  if (!(stride_time >= 0.25 && stride_time <= 0.5)) fail("stride time must lie in [0.25, 0.5] s");
  if (opt.order < 3) fail("Bezier order must be >= 3");
  if (opt.samples_per_phase < opt.order + 1) fail("too few fit samples for the Bezier order");
  if (!(opt.end_support >= 0.0 && opt.end_support < 1.0)) fail("end support must lie in [0, 1)");
  if (!(opt.approach_speed >= 0.0)) fail("approach speed must be >= 0");
  if (!(opt.liftoff_speed >= 0.0)) fail("liftoff speed must be >= 0");
  if (!(opt.swing_clearance >= 0.0)) fail("swing clearance must be >= 0");
  const double flight = stride_time * (1.0 - duty);
  const double z_td = apex - model.gravity * flight * flight / 8.0;
  const LegParams& leg = model.leg(Leg::kFront);
  const double reach = leg.thigh.length + leg.calf.length;
  if (!(z_td + leg.hip_z > 0.0) || z_td + leg.hip_z >= reach) {
    fail("apex height " + std::to_string(apex) + " puts touchdown outside the leg reach");
  }
}

}  // namespace

double TorsoTemplate::stance_amplitude() const {
  const double ts = stance_time;
  return pi * (touchdown_vz + liftoff_vz + (gravity - end_accel) * ts) / (2.0 * ts);
}

double TorsoTemplate::stance_height(double t) const {
  const double ts = stance_time;
  return touchdown_height - touchdown_vz * t + 0.5 * (end_accel - gravity) * t * t +
         stance_amplitude() * (ts / pi) * (t - (ts / pi) * std::sin(pi * t / ts));
}

double TorsoTemplate::stance_vertical_speed(double t) const {
  const double ts = stance_time;
  return -touchdown_vz + (end_accel - gravity) * t +
         stance_amplitude() * (ts / pi) * (1.0 - std::cos(pi * t / ts));
}

double TorsoTemplate::stance_forward(double t) const {
  return touchdown_vx * t + 0.5 * (liftoff_vx - touchdown_vx) * t * t / stance_time;
}

double TorsoTemplate::stance_forward_speed(double t) const {
  return touchdown_vx + (liftoff_vx - touchdown_vx) * t / stance_time;
}

double TorsoTemplate::liftoff_height() const {
  return touchdown_height + 0.5 * (liftoff_vz - touchdown_vz) * stance_time;
}

Vec2 TorsoTemplate::stance_foot(double t) const {
  return {0.5 * stance_travel() - stance_forward(t), -stance_height(t) - hip_z};
}

Vec2 TorsoTemplate::flight_foot(double u) const {
  const double half = 0.5 * stance_travel();
  const double tf = flight_time;
  const double x = hermite(-half, -liftoff_vx * tf, half, -arrival_velocity.x() * tf, u);
  const double z0 = -liftoff_height() - hip_z;
  const double z1 = -touchdown_height - hip_z;
  const double arrive = -approach_speed - arrival_velocity.y();
  const double lift = std::sin(pi * u);
  const double rise = liftoff_speed - liftoff_vz;
  return {x, hermite(z0, rise * tf, z1, arrive * tf, u) + clearance * lift * lift};
}

TorsoTemplate reference_torso(const RobotModel& model, double speed, double apex_height,
                              double stride_time, double duty, const GaitTemplateOptions& opt) {
  check_arguments(model, speed, apex_height, stride_time, duty, opt);
  TorsoTemplate tt;
  tt.gravity = model.gravity;
  tt.stance_time = duty * stride_time;
  tt.flight_time = stride_time - tt.stance_time;
  tt.apex_height = apex_height;
  tt.touchdown_height = apex_height - tt.gravity * tt.flight_time * tt.flight_time / 8.0;
  tt.end_accel = opt.end_support * tt.gravity;
  tt.hip_z = model.leg(Leg::kFront).hip_z;
  tt.clearance = opt.swing_clearance;
  tt.approach_speed = opt.approach_speed;
  tt.liftoff_speed = opt.liftoff_speed;
  tt.touchdown_vz = tt.liftoff_vz = 0.5 * tt.gravity * tt.flight_time;
  tt.touchdown_vx = tt.liftoff_vx = speed;
  tt.arrival_velocity = Vec2(speed, -tt.touchdown_vz);

  const double mass = model.total_mass();
  const double tf = tt.flight_time;
  const double g = tt.gravity;
  // Torso height error at the end of flight for a given liftoff speed.
  const auto landing_error = [&](double w_lo) {
    TorsoTemplate t = tt;
    t.liftoff_vz = w_lo;
    const Vec2 p_lo = t.stance_foot(t.stance_time);
    const Vec2 p_td = t.flight_foot(1.0);
    const Vec2 m_lo = legs_moment(model, p_lo);
    const Vec2 rate_lo = legs_moment_rate(model, p_lo, Vec2(-t.liftoff_vx, -w_lo));
    const double com_vz = w_lo + rate_lo.y() / mass;
    const double z = t.liftoff_height() + com_vz * tf - 0.5 * g * tf * tf -
                     (legs_moment(model, p_td).y() - m_lo.y()) / mass;
    return z - t.touchdown_height;
  };

  try {
    bool converged = false;
    for (int it = 0; it < 400 && !converged; ++it) {
      const TorsoTemplate before = tt;
      // Liftoff speed that lands the torso at the touchdown height (secant).
      double w0 = tt.liftoff_vz, w1 = tt.liftoff_vz + 1e-3;
      double f0 = landing_error(w0), f1 = landing_error(w1);
      for (int k = 0; k < 50 && std::abs(f1) > 1e-15 && f1 != f0; ++k) {
        const double w2 = w1 - f1 * (w1 - w0) / (f1 - f0);
        w0 = w1;
        f0 = f1;
        w1 = w2;
        f1 = landing_error(w1);
      }
      tt.liftoff_vz = w1;

      const Vec2 p_lo = tt.stance_foot(tt.stance_time);
      const Vec2 p_td = tt.flight_foot(1.0);
      const Vec2 m_lo = legs_moment(model, p_lo);
      const Vec2 com_v =
          Vec2(tt.liftoff_vx, tt.liftoff_vz) +
          legs_moment_rate(model, p_lo, Vec2(-tt.liftoff_vx, -tt.liftoff_vz)) / mass;
      const Vec2 foot_vel_td(-tt.arrival_velocity.x(), -tt.approach_speed - tt.arrival_velocity.y());
      const Vec2 rate_td = legs_moment_rate(model, p_td, foot_vel_td);
      tt.arrival_velocity = 0.5 * (tt.arrival_velocity +
                                   Vec2(com_v.x(), com_v.y() - g * tf) - rate_td / mass);

      // Plastic touchdown of both feet.
      const GeneralizedState pre = shared_leg_state(model, tt.touchdown_height, tt.arrival_velocity,
                                                    p_td, foot_vel_td);
      const ContactSet feet = ContactSet::both(foot_position(model, pre.q, Leg::kFront),
                                               foot_position(model, pre.q, Leg::kRear));
      GeneralizedState post = pre;
      post.qd = contact_impulse_velocity(model, pre, feet);
      tt.touchdown_vx = 0.5 * (tt.touchdown_vx + post.qd[0]);
      tt.touchdown_vz = 0.5 * (tt.touchdown_vz - post.qd[1]);

      const double flight_travel =
          com_v.x() * tf - (legs_moment(model, p_td).x() - m_lo.x()) / mass;
      const double average = (tt.stance_travel() + flight_travel) / stride_time;
      tt.liftoff_vx += 0.5 * (speed - average);

      const double change = std::max({std::abs(tt.liftoff_vz - before.liftoff_vz),
                                      std::abs(tt.liftoff_vx - before.liftoff_vx),
                                      std::abs(tt.touchdown_vz - before.touchdown_vz),
                                      std::abs(tt.touchdown_vx - before.touchdown_vx),
                                      (tt.arrival_velocity - before.arrival_velocity).cwiseAbs().maxCoeff()});
      converged = change < 1e-12;
    }
    if (!converged) throw GaitGenerationError("torso template did not converge");
  } catch (const WorkspaceError& e) {
    throw GaitGenerationError(std::string("IK infeasible while solving the torso template: ") +
                              e.what());
  }
  if (!(tt.stance_amplitude() >= 0.0) || !(tt.touchdown_vz > 0.0) || !(tt.liftoff_vz > 0.0)) {
    throw GaitGenerationError("torso template has no consistent stance at speed " +
                              std::to_string(speed));
  }
  return tt;
}

GaitEntry generate_reference_gait(const RobotModel& model, double speed, double apex_height,
                                  double stride_time, double duty, const GaitTemplateOptions& opt) {
  const TorsoTemplate tt = reference_torso(model, speed, apex_height, stride_time, duty, opt);
  const int n = opt.samples_per_phase;

  GaitEntry entry;
  entry.speed = speed;
  entry.stride_time = stride_time;
  entry.duty = duty;
  entry.apex_height = apex_height;
  entry.stance.duration = tt.stance_time;
  entry.flight.duration = stride_time - tt.stance_time;
  entry.stance.coeffs.resize(kJointDofs, opt.order + 1);
  entry.flight.coeffs.resize(kJointDofs, opt.order + 1);

  constexpr double h = 1e-6;
  const auto stance_foot = [&](double s) { return tt.stance_foot(s * tt.stance_time); };
  const auto flight_foot = [&](double s) { return tt.flight_foot(s); };
  for (Leg l : kAllLegs) {
    const LegParams& leg = model.leg(l);
    // d/ds of the joints at s by central differences of the IK.
    const auto slope = [&](const auto& foot, double s) {
      const LegJoints p = leg_ik(leg, foot(s + h));
      const LegJoints m = leg_ik(leg, foot(s - h));
      return std::array<double, 2>{(p.thigh - m.thigh) / (2 * h), (p.calf - m.calf) / (2 * h)};
    };
    std::vector<PhaseSample> st_thigh(n), st_calf(n), fl_thigh(n), fl_calf(n);
    for (int i = 0; i < n; ++i) {
      const double s = (i == n - 1) ? 1.0 : static_cast<double>(i) / (n - 1);
      const LegJoints js = ik_or_throw(leg, stance_foot(s), "stance", i);
      const LegJoints jf = ik_or_throw(leg, flight_foot(s), "flight", i);
      st_thigh[i] = {s, js.thigh};
      st_calf[i] = {s, js.calf};
      fl_thigh[i] = {s, jf.thigh};
      fl_calf[i] = {s, jf.calf};
    }
    std::array<double, 2> st0, st1, fl0, fl1;
    try {
      st0 = slope(stance_foot, 0.0);
      st1 = slope(stance_foot, 1.0);
      fl0 = slope(flight_foot, 0.0);
      fl1 = slope(flight_foot, 1.0);
    } catch (const WorkspaceError& e) {
      throw GaitGenerationError(std::string("IK infeasible at a phase boundary: ") + e.what());
    }
    const int row = thigh_joint(l);
    const auto put = [&](BezierPhase& phase, int r, const std::vector<PhaseSample>& samples,
                         double d0, double d1) {
      const BezierFit fit = fit_bezier_clamped(samples, opt.order, d0, d1);
      for (int c = 0; c <= opt.order; ++c) phase.coeffs(r, c) = fit.coeffs[c];
    };
    put(entry.stance, row, st_thigh, st0[0], st1[0]);
    put(entry.stance, row + 1, st_calf, st0[1], st1[1]);
    put(entry.flight, row, fl_thigh, fl0[0], fl1[0]);
    put(entry.flight, row + 1, fl_calf, fl0[1], fl1[1]);
  }
  // The liftoff sample is shared by both phases; make the knot bit-identical.
  entry.flight.coeffs.col(0) = entry.stance.coeffs.col(opt.order);

  try {
    entry.validate(&model);
  } catch (const ContractViolation& e) {
    throw GaitGenerationError(std::string("generated gait violates invariants: ") + e.what());
  }
  return entry;
}

std::vector<double> default_library_speeds() {
  std::vector<double> v;
  for (int i = -5; i <= 8; ++i) v.push_back(i / 10.0);
  return v;
}

GaitLibrary generate_gait_library(const RobotModel& model, const std::vector<double>& speeds,
                                  double apex_height, double stride_time, double duty,
                                  const GaitTemplateOptions& options) {
  std::vector<GaitEntry> entries;
  entries.reserve(speeds.size());
  for (double v : speeds) {
    entries.push_back(generate_reference_gait(model, v, apex_height, stride_time, duty, options));
  }
  return GaitLibrary(std::move(entries));
}

}  // namespace pronk
