#pragma once

// Fixed-step hybrid simulation of the pronking gait: stance (both feet
// pinned) and flight phases, event detection, stride segmentation and
// per-stride tracking metrics.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pronk/control/pronk_controller.hpp"
#include "pronk/dynamics/dynamics.hpp"

namespace pronk {

enum class Integrator { kRk4, kSemiImplicitEuler };
const char* name(Integrator i);
Integrator parse_integrator(const std::string& s);

struct SimConfig {
  double physics_dt = 2e-4;   // s
  double control_dt = 1e-3;   // s
  Integrator integrator = Integrator::kRk4;
  double event_time_tol = 1e-9;  // s, touchdown bisection
  double event_force_tol = 0.0;  // N, liftoff when total normal force <= this
  double baumgarte_omega = 50.0;  // rad/s
  double fall_height = 0.08;      // m
  double max_stride_factor = 3.0;  // abort a stride lasting this many nominal strides
  double min_liftoff_phase = 0.5;  // liftoff events before this stance phase are ignored
  int max_strides = 30;
  std::uint64_t seed = 0;
  double qd_noise_std = 0.0;  // rad/s and m/s, additive Gaussian on measured qd

  // Physics substeps per control period.
  int substeps() const;
  // Throws ContractViolation naming the offending field.
  void validate() const;
};

// One integrator step of the flight or stance equations (contacts must be
// non-empty in stance). Throws ContractViolation for dt <= 0.
GeneralizedState step_physics(const RobotModel& model, const GeneralizedState& state,
                              const Vec4& tau, Phase mode, const ContactSet& contacts, double dt,
                              Integrator integrator = Integrator::kRk4,
                              double baumgarte_omega = 50.0);

struct TouchdownEvent {
  double fraction = 1.0;  // of the step, in (0, 1]
  std::array<bool, kLegs> legs{};  // feet that crossed the ground at the event
};

// Foot heights are interpolated across the step with cubic Hermite
// polynomials in q; the first downward crossing of z = 0 is located by
// bisection to time_tol (relative to dt). Both legs are reported when they
// cross within the tolerance of each other.
std::optional<TouchdownEvent> detect_touchdown(const RobotModel& model,
                                               const GeneralizedState& prev,
                                               const GeneralizedState& next, double dt,
                                               double time_tol = 1e-9);

// True when the total normal force is <= force_tol.
bool detect_liftoff(const GroundReaction& grf, double force_tol = 0.0);

struct PhaseValue {
  double s = 0.0;
  bool clamped = false;
};
PhaseValue phase_variable(double t, double duration);

struct TickRecord {
  int stride = 0;
  double time = 0.0;
  Vec6 q = Vec6::Zero();
  Vec6 qd = Vec6::Zero();
  double s = 0.0;
  Phase mode = Phase::kStance;
  Vec4 e = Vec4::Zero();
  Vec4 ed = Vec4::Zero();
  Vec4 tau_b = Vec4::Zero();
  Vec4 tau_f = Vec4::Zero();
  Vec4 tau = Vec4::Zero();  // tau_b + tau_f before saturation
  Vec2 lam_t = Vec2::Zero();
  Vec2 lam_n = Vec2::Zero();
  Vec4 q_ref = Vec4::Zero();
  unsigned sat_flags = 0;  // bit j set when joint j saturated
};

struct StrideMetrics {
  int stride = 0;
  Vec4 max_error = Vec4::Zero();  // rad, max |e| over stance ticks
  Vec4 rms_error = Vec4::Zero();  // rad
  double avg_speed = 0.0;         // m/s, (x(t_f) - x(t_0)) / (t_f - t_0)
  double apex = 0.0;              // m, highest torso z over flight ticks
  double start_time = 0.0;
  double end_time = 0.0;
  double start_x = 0.0;
  double end_x = 0.0;
  double stance_duration = 0.0;  // s, touchdown to liftoff
  bool ilc_active = false;
  bool projected_anchor = false;  // second foot projected more than 5 mm at touchdown
  int adhesive_ticks = 0;  // stance ticks held through a non-positive normal force
};

struct StrideLog {
  std::vector<TickRecord> ticks;  // strictly increasing in time
  std::vector<StrideMetrics> strides;
};

// Metrics of one stride from its ticks and the touchdown closing it.
StrideMetrics compute_stride_metrics(const std::vector<TickRecord>& ticks, int stride,
                                     double end_time, double end_x);

enum class FailureCause { kNone, kFall, kDegenerate, kNonFinite, kTimeout };
const char* name(FailureCause c);

struct StrideResult {
  std::vector<TickRecord> ticks;
  StrideMetrics metrics;
  StrideUpdate update;
  GeneralizedState end_state;  // pre-impact state at the closing touchdown
  double end_time = 0.0;
  FailureCause failure = FailureCause::kNone;
  std::string failure_detail;
};

// Noise source for measured velocities; disabled when std is zero.
class SensorNoise {
 public:
  SensorNoise(std::uint64_t seed, double stddev);
  GeneralizedState measure(const GeneralizedState& truth);

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_;
  double stddev_;
};

// Runs stance then flight from a touchdown (pre-impact) state until the next
// touchdown. The controller must not have begun the stride yet.
StrideResult run_stride(const RobotModel& model, PronkController& controller,
                        const SimConfig& config, const GeneralizedState& touchdown_state,
                        double start_time, SensorNoise& noise);

// Touchdown posture of a gait with both feet on the ground at matching
// velocities: joints and joint rates from the stance reference at s = 0,
// torso placed so the feet touch z = 0, torso velocity from the pinned-foot
// condition.
GeneralizedState startup_state(const RobotModel& model, const InterpolatedGait& gait);

struct ExperimentPlan {
  ControlMode mode = ControlMode::kPd;
  double desired_speed = 0.3;
  int strides = 30;
  int enable_at = 0;
  bool stop_on_convergence = false;
};

struct ExperimentRecord {
  ExperimentPlan plan;
  StrideLog log;
  std::vector<StrideUpdate> updates;
  FailureCause failure = FailureCause::kNone;
  std::string failure_detail;
  int converged_at = -1;
  int learning_updates = 0;
  std::vector<Signal4> feedforward_history;
  Signal4 final_feedforward;
};

ExperimentRecord run_experiment(const RobotModel& model, const GaitLibrary& gaits,
                                ControllerConfig controller, const SimConfig& sim,
                                const ExperimentPlan& plan,
                                const std::optional<TorqueLibrary>& torques = std::nullopt);

// Steady-state statistic over the last `window` strides: mean of the per-stride
// max (or RMS) stance error of each joint.
Vec4 steady_state_error(const std::vector<StrideMetrics>& strides, int window, bool use_max = true);

// Max over front and rear calves.
double calf_error(const Vec4& per_joint);
double thigh_error(const Vec4& per_joint);

}  // namespace pronk
