#include "pronk/control/pronk_controller.hpp"

#include <algorithm>
#include <cmath>

#include "pronk/control/leg_kinematics.hpp"

namespace pronk {
namespace {

double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }
double smoothstep_rate(double s) { return 6.0 * s * (1.0 - s); }

}  // namespace

void SpeedRegulator::validate() const {
  if (!(k_theta >= 0.0) || !std::isfinite(k_theta)) throw ContractViolation("k_theta must be >= 0");
  if (!std::isfinite(desired_speed)) throw ContractViolation("desired speed must be finite");
  if (!(estimator.alpha > 0.0 && estimator.alpha <= 1.0)) {
    throw ContractViolation("velocity smoothing factor must be in (0, 1]");
  }
}

double foot_placement(double theta_nominal, double v_est, const SpeedRegulator& regulator) {
  return theta_nominal + regulator.k_theta * (v_est - regulator.desired_speed);
}

const char* name(ControlMode m) {
  switch (m) {
    case ControlMode::kPd: return "pd";
    case ControlMode::kIlc: return "ilc";
    case ControlMode::kReplay: return "replay";
  }
  return "pd";
}

ControlMode parse_control_mode(const std::string& s) {
  if (s == "pd") return ControlMode::kPd;
  if (s == "ilc") return ControlMode::kIlc;
  if (s == "replay") return ControlMode::kReplay;
  throw ContractViolation("unknown control mode '" + s + "' (expected pd, ilc or replay)");
}

const char* name(GaitSelection g) { return g == GaitSelection::kDesired ? "desired" : "estimated"; }

GaitSelection parse_gait_selection(const std::string& s) {
  if (s == "desired") return GaitSelection::kDesired;
  if (s == "estimated") return GaitSelection::kEstimated;
  throw ContractViolation("unknown gait selection '" + s + "' (expected desired or estimated)");
}

void ControllerConfig::validate() const {
  gains.validate();
  if (!(lookahead >= 0.0 && lookahead <= 1.0)) throw ContractViolation("lookahead must be in [0, 1]");
  if (grid_size < 2) throw ContractViolation("grid_size must be >= 2");
  if (!(convergence_tol > 0.0)) throw ContractViolation("convergence_tol must be > 0");
  if (convergence_window < 1) throw ContractViolation("convergence_window must be >= 1");
  if (!(k_theta >= 0.0) || !std::isfinite(k_theta)) throw ContractViolation("k_theta must be >= 0");
  if (!(velocity_alpha > 0.0 && velocity_alpha <= 1.0)) {
    throw ContractViolation("velocity_alpha must be in (0, 1]");
  }
  if (enable_at < 0) throw ContractViolation("enable_at must be >= 0");
  IIRCoefficients::preset(filter);
}

PronkController::PronkController(const RobotModel& model, GaitLibrary gaits,
                                 ControllerConfig config, double desired_speed,
                                 std::optional<TorqueLibrary> replay)
    : model_(&model),
      gaits_(std::move(gaits)),
      replay_(std::move(replay)),
      active_(config),
      staged_(config),
      filter_(IIRCoefficients::preset(config.filter)),
      desired_speed_(desired_speed),
      staged_speed_(desired_speed) {
  config.validate();
  if (!std::isfinite(desired_speed)) throw ContractViolation("desired speed must be finite");
  if (gaits_.size() < 2) throw ContractViolation("controller needs a gait library");
  if (config.mode == ControlMode::kReplay && (!replay_ || replay_->empty())) {
    throw LibraryError("replay mode needs a non-empty torque library");
  }
  buffer_ = IterationBuffer::empty(config.grid_size);
  regulator_.k_theta = config.k_theta;
  regulator_.desired_speed = desired_speed;
  regulator_.estimator.alpha = config.velocity_alpha;
  regulator_.estimator.velocity = desired_speed;
  gait_ = gaits_.interpolate(desired_speed);
  feedforward_ = Signal4::Zero(kJointDofs, config.grid_size);
}

void PronkController::set_config(const ControllerConfig& config) {
  config.validate();
  if (config.grid_size != staged_.grid_size) throw ContractViolation("grid_size cannot change mid-run");
  if (config.mode != staged_.mode) throw ContractViolation("control mode cannot change mid-run");
  staged_ = config;
}

void PronkController::set_desired_speed(double v) {
  if (!std::isfinite(v)) throw ContractViolation("desired speed must be finite");
  staged_speed_ = v;
}

void PronkController::begin_stride() {
  ++stride_;
  if (staged_.filter != active_.filter) filter_ = IIRCoefficients::preset(staged_.filter);
  active_ = staged_;
  desired_speed_ = staged_speed_;
  regulator_.k_theta = active_.k_theta;
  regulator_.desired_speed = desired_speed_;
  regulator_.estimator.alpha = active_.velocity_alpha;

  const double v = active_.gait_selection == GaitSelection::kDesired ? desired_speed_
                                                                     : regulator_.estimator.velocity;
  gait_ = gaits_.interpolate(v);
  flight_offset_.setZero();
  stance_elapsed_ = 0.0;
  flight_lead_ = 0.0;
  stance_log_.clear();

  ilc_active_ = active_.mode == ControlMode::kIlc && stride_ >= active_.enable_at;
  if (ilc_active_) {
    feedforward_ = feedforward_profile(buffer_, active_.gains, active_.lookahead);
  } else if (active_.mode == ControlMode::kReplay) {
    const std::vector<double> grid = phase_grid(active_.grid_size);
    feedforward_.resize(kJointDofs, active_.grid_size);
    for (int i = 0; i < active_.grid_size; ++i) feedforward_.col(i) = replay_->lookup(gait_.speed, grid[i]);
  } else {
    feedforward_ = Signal4::Zero(kJointDofs, active_.grid_size);
  }
}

void PronkController::begin_flight() {
  flight_offset_ = foot_placement_offset();
  flight_lead_ = std::max(0.0, stance_elapsed_ - gait_.stance.duration);
}

Vec4 PronkController::foot_placement_offset() const {
  const Vec4 q_td = gait_.flight.eval(1.0);
  Vec4 offset = Vec4::Zero();
  for (Leg l : kAllLegs) {
    const int j = thigh_joint(l);
    const LegParams& leg = model_->leg(l);
    const double theta = leg_angle(q_td[j], q_td[j + 1]);
    const double delta = (foot_placement(theta, regulator_.estimator.velocity, regulator_) - theta);
    const Vec2 foot = foot_relative(leg, q_td[j], q_td[j + 1]);
    const double c = std::cos(delta), s = std::sin(delta);
    // Rotating the foot about the hip by delta in the joint sign convention.
    const Vec2 target(c * foot.x() + s * foot.y(), c * foot.y() - s * foot.x());
    try {
      const LegJoints ik = leg_ik(leg, target);
      offset[j] = ik.thigh - q_td[j];
      offset[j + 1] = ik.calf - q_td[j + 1];
    } catch (const WorkspaceError&) {
      offset[j] = offset[j + 1] = 0.0;
    }
  }
  return offset;
}

ControlOutput PronkController::update(Phase phase, double phase_time,
                                      const GeneralizedState& measured,
                                      const ContactSet& contacts) {
  if (stride_ < 0) throw ContractViolation("begin_stride must be called before update");
  double raw = measured.qd.x();
  if (phase == Phase::kStance && contacts.any()) {
    raw = leg_odometry_velocity(*model_, measured, contacts).x();
  }
  low_pass_step(regulator_.estimator, raw);

  ControlOutput out;
  out.phase = phase;
  const Vec4 q = measured.joints();
  const Vec4 qd = measured.joint_rates();
  const BezierPhase& ref = phase == Phase::kStance ? gait_.stance : gait_.flight;
  double t = std::max(0.0, phase_time);
  if (phase == Phase::kStance) {
    stance_elapsed_ = t;
  } else {
    t += flight_lead_;
  }
  const double ratio = t / ref.duration;
  out.s_clamped = ratio > 1.0;
  out.s = std::min(1.0, ratio);
  if (phase == Phase::kStance && out.s_clamped) {
    const double u = std::min(1.0, (t - ref.duration) / gait_.flight.duration);
    out.q_ref = gait_.flight.eval(u);
    out.qd_ref = u < 1.0 ? Vec4(gait_.flight.derivative(u) / gait_.flight.duration) : Vec4::Zero();
  } else {
    out.q_ref = ref.eval(out.s);
    out.qd_ref = out.s_clamped ? Vec4::Zero() : Vec4(ref.derivative(out.s) / ref.duration);
  }
  if (phase == Phase::kFlight) {
    out.q_ref += smoothstep(out.s) * flight_offset_;
    if (!out.s_clamped) out.qd_ref += smoothstep_rate(out.s) / ref.duration * flight_offset_;
  }
  out.e = out.q_ref - q;
  out.ed = out.qd_ref - qd;
  out.tau_b = feedback_torque(active_.gains, out.e, out.ed);
  if (phase == Phase::kStance) {
    if (ilc_active_) {
      out.tau_f = feedforward_torque(buffer_, active_.gains, out.s, active_.lookahead);
    } else if (active_.mode == ControlMode::kReplay) {
      out.tau_f = replay_->lookup(gait_.speed, out.s);
    }
  }
  const TotalTorque total = total_torque(out.tau_b, out.tau_f, model_->tau_max);
  out.tau = total.unsaturated;
  out.tau_applied = total.applied;
  out.saturated = total.saturated;
  if (phase == Phase::kStance && active_.mode == ControlMode::kIlc && !out.s_clamped) {
    stance_log_.push(out.s, out.tau_applied, out.e, out.ed);
  }
  return out;
}

StrideUpdate PronkController::end_stride() {
  StrideUpdate u;
  u.ilc_active = ilc_active_;
  if (ilc_active_) {
    if (!history_.empty()) {
      u.feedforward_change = (feedforward_ - history_.back()).cwiseAbs().maxCoeff();
    }
    history_.push_back(feedforward_);
    if (!converged_ &&
        detect_convergence(history_, active_.convergence_window, active_.convergence_tol)) {
      converged_ = true;
      converged_at_ = stride_;
    }
  }
  if (active_.mode == ControlMode::kIlc && stance_log_.size() > 0) {
    buffer_ = end_of_stride_update(stance_log_, filter_, buffer_);
    ++learning_updates_;
    u.buffer_updated = true;
    u.filtered = buffer_.filtered;
  }
  u.converged = converged_;
  return u;
}

}  // namespace pronk
