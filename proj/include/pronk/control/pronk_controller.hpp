#pragma once

// Stride-level controller: gait selection, PD feedback, ILC feedforward in
// stance, torque-library replay, and foot placement in flight.

#include <optional>
#include <string>
#include <vector>

#include "pronk/control/ilc.hpp"
#include "pronk/control/torque_library.hpp"
#include "pronk/filters/filters.hpp"
#include "pronk/gait/gait_library.hpp"

namespace pronk {

struct SpeedRegulator {
  double k_theta = 0.05;  // s/m
  double desired_speed = 0.0;  // m/s
  VelocityEstimatorState estimator;
  void validate() const;
};

// theta_d = theta + K_theta (v - v_d).
double foot_placement(double theta_nominal, double v_est, const SpeedRegulator& regulator);

enum class ControlMode { kPd, kIlc, kReplay };
const char* name(ControlMode m);
ControlMode parse_control_mode(const std::string& s);

// Speed used to pick the reference from the gait library at each touchdown.
enum class GaitSelection { kDesired, kEstimated };
const char* name(GaitSelection g);
GaitSelection parse_gait_selection(const std::string& s);

struct ControllerConfig {
  ControllerGains gains = ControllerGains::lumped();
  double lookahead = 0.05;  // phase units
  int grid_size = 201;
  double convergence_tol = 0.1;  // N m
  int convergence_window = 5;    // strides
  double k_theta = 0.05;         // s/m
  double velocity_alpha = 0.1;
  std::string filter = "butter3-25hz-unity";
  GaitSelection gait_selection = GaitSelection::kDesired;
  ControlMode mode = ControlMode::kPd;
  int enable_at = 0;  // first stride (0-based) using ILC feedforward

  // Throws ContractViolation naming the offending field.
  void validate() const;
};

struct ControlOutput {
  Phase phase = Phase::kStance;
  double s = 0.0;
  bool s_clamped = false;
  Vec4 q_ref = Vec4::Zero();
  Vec4 qd_ref = Vec4::Zero();
  Vec4 e = Vec4::Zero();
  Vec4 ed = Vec4::Zero();
  Vec4 tau_b = Vec4::Zero();
  Vec4 tau_f = Vec4::Zero();
  Vec4 tau = Vec4::Zero();          // tau_b + tau_f before saturation
  Vec4 tau_applied = Vec4::Zero();  // after saturation
  SaturationFlags saturated{};
};

struct StrideUpdate {
  bool ilc_active = false;    // feedforward was applied in the finished stride
  bool buffer_updated = false;
  bool filtered = false;
  bool converged = false;
  double feedforward_change = 0.0;  // N m, inf-norm vs previous stride
};

// Single-owner state machine. Call begin_stride at touchdown, update every
// control tick, begin_flight at liftoff and end_stride at the next touchdown.
// A stance outlasting its reference continues along the flight reference, and
// the flight phase then resumes from that point.
class PronkController {
 public:
  PronkController(const RobotModel& model, GaitLibrary gaits, ControllerConfig config,
                  double desired_speed, std::optional<TorqueLibrary> replay = std::nullopt);

  // Staged; both take effect at the next begin_stride.
  void set_config(const ControllerConfig& config);
  void set_desired_speed(double v);

  void begin_stride();
  void begin_flight();
  ControlOutput update(Phase phase, double phase_time, const GeneralizedState& measured,
                       const ContactSet& contacts);
  StrideUpdate end_stride();

  int stride_index() const { return stride_; }
  bool ilc_active() const { return ilc_active_; }
  bool converged() const { return converged_; }
  int converged_at() const { return converged_at_; }
  int learning_updates() const { return learning_updates_; }
  const ControllerConfig& config() const { return active_; }
  const InterpolatedGait& gait() const { return gait_; }
  const IterationBuffer& buffer() const { return buffer_; }
  const std::vector<Signal4>& feedforward_history() const { return history_; }
  double velocity_estimate() const { return regulator_.estimator.velocity; }
  const Vec4& flight_offset() const { return flight_offset_; }
  // Feedforward profile on the phase grid for the stride in progress.
  const Signal4& feedforward() const { return feedforward_; }

 private:
  Vec4 foot_placement_offset() const;

  const RobotModel* model_;
  GaitLibrary gaits_;
  std::optional<TorqueLibrary> replay_;
  ControllerConfig active_;
  ControllerConfig staged_;
  IIRCoefficients filter_;
  double desired_speed_;
  double staged_speed_;
  SpeedRegulator regulator_;
  InterpolatedGait gait_;
  IterationBuffer buffer_;
  PhaseLog stance_log_;
  std::vector<Signal4> history_;
  Signal4 feedforward_;
  Vec4 flight_offset_ = Vec4::Zero();
  double stance_elapsed_ = 0.0;  // latest stance phase time
  double flight_lead_ = 0.0;     // flight reference time already spent in stance
  int stride_ = -1;
  bool ilc_active_ = false;
  bool converged_ = false;
  int converged_at_ = -1;
  int learning_updates_ = 0;
};

}  // namespace pronk
