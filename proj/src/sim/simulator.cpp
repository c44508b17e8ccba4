#include "pronk/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pronk {
namespace {

struct Derivative {
  Vec6 qd;
  Vec6 qdd;
};

Vec6 accelerations(const RobotModel& model, const GeneralizedState& s, const Vec4& tau, Phase mode,
                   const ContactSet& contacts, double omega) {
  if (mode == Phase::kStance) return stance_dynamics(model, s, tau, contacts, omega).qdd;
  return flight_dynamics(model, s, tau).qdd;
}

GeneralizedState advance(const GeneralizedState& s, const Vec6& dq, const Vec6& dqd, double h) {
  GeneralizedState out;
  out.q = s.q + h * dq;
  out.qd = s.qd + h * dqd;
  return out;
}

// Cubic Hermite interpolation of q across a step at fraction u.
Vec6 hermite_q(const GeneralizedState& a, const GeneralizedState& b, double dt, double u) {
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * a.q + (u3 - 2 * u2 + u) * dt * a.qd + (-2 * u3 + 3 * u2) * b.q +
         (u3 - u2) * dt * b.qd;
}

double foot_height(const RobotModel& model, const Vec6& q, Leg l) {
  return foot_position(model, q, l).y();
}

unsigned flag_bits(const SaturationFlags& f) {
  unsigned bits = 0;
  for (int j = 0; j < kJointDofs; ++j) bits |= f[j] ? (1u << j) : 0u;
  return bits;
}

}  // namespace

const char* name(Integrator i) { return i == Integrator::kRk4 ? "rk4" : "semi-implicit-euler"; }

Integrator parse_integrator(const std::string& s) {
  if (s == "rk4") return Integrator::kRk4;
  if (s == "semi-implicit-euler") return Integrator::kSemiImplicitEuler;
  throw ContractViolation("unknown integrator '" + s + "' (expected rk4 or semi-implicit-euler)");
}

const char* name(FailureCause c) {
  switch (c) {
    case FailureCause::kNone: return "none";
    case FailureCause::kFall: return "fall";
    case FailureCause::kDegenerate: return "degenerate-contact";
    case FailureCause::kNonFinite: return "non-finite-state";
    case FailureCause::kTimeout: return "stride-timeout";
  }
  return "none";
}

int SimConfig::substeps() const {
  return static_cast<int>(std::lround(control_dt / physics_dt));
}

void SimConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ContractViolation("sim." + what);
  };
  require(physics_dt > 0.0 && std::isfinite(physics_dt), "physics_dt must be > 0");
  require(control_dt > 0.0 && std::isfinite(control_dt), "control_dt must be > 0");
  const double ratio = control_dt / physics_dt;
  require(ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) <= 1e-9,
          "control_dt must be an integer multiple of physics_dt");
  require(event_time_tol > 0.0, "event_time_tol must be > 0");
  require(event_force_tol >= 0.0, "event_force_tol must be >= 0");
  require(baumgarte_omega >= 0.0, "baumgarte_omega must be >= 0");
  require(fall_height >= 0.0, "fall_height must be >= 0");
  require(max_stride_factor > 1.0, "max_stride_factor must be > 1");
  require(min_liftoff_phase >= 0.0 && min_liftoff_phase <= 1.0, "min_liftoff_phase must be in [0, 1]");
  require(max_strides >= 1, "max_strides must be >= 1");
  require(qd_noise_std >= 0.0, "qd_noise_std must be >= 0");
}

GeneralizedState step_physics(const RobotModel& model, const GeneralizedState& s, const Vec4& tau,
                              Phase mode, const ContactSet& contacts, double dt,
                              Integrator integrator, double omega) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("step_physics needs dt > 0");
  if (mode == Phase::kStance && !contacts.any()) {
    throw ContractViolation("stance step needs at least one contact");
  }
  if (integrator == Integrator::kSemiImplicitEuler) {
    GeneralizedState out;
    out.qd = s.qd + dt * accelerations(model, s, tau, mode, contacts, omega);
    out.q = s.q + dt * out.qd;
    return out;
  }
  const Vec6 k1 = accelerations(model, s, tau, mode, contacts, omega);
  const GeneralizedState s2 = advance(s, s.qd, k1, 0.5 * dt);
  const Vec6 k2 = accelerations(model, s2, tau, mode, contacts, omega);
  const GeneralizedState s3 = advance(s, s2.qd, k2, 0.5 * dt);
  const Vec6 k3 = accelerations(model, s3, tau, mode, contacts, omega);
  const GeneralizedState s4 = advance(s, s3.qd, k3, dt);
  const Vec6 k4 = accelerations(model, s4, tau, mode, contacts, omega);
  GeneralizedState out;
  out.q = s.q + (dt / 6.0) * (((s.qd + 2.0 * s2.qd) + 2.0 * s3.qd) + s4.qd);
  out.qd = s.qd + (dt / 6.0) * (((k1 + 2.0 * k2) + 2.0 * k3) + k4);
  return out;
}

std::optional<TouchdownEvent> detect_touchdown(const RobotModel& model,
                                               const GeneralizedState& prev,
                                               const GeneralizedState& next, double dt,
                                               double time_tol) {
  if (!(dt > 0.0)) throw ContractViolation("detect_touchdown needs dt > 0");
  std::array<std::optional<double>, kLegs> crossing{};
  for (Leg l : kAllLegs) {
    const double z0 = foot_height(model, prev.q, l);
    const double z1 = foot_height(model, next.q, l);
    const double vz1 = (foot_jacobian(model, next.q, l) * next.qd).y();
    if (!(z1 <= 0.0) || !(vz1 < 0.0)) continue;
    if (!(z0 > 0.0)) {
      // Already below ground at the step start: only a real penetration counts.
      if (z1 < -2e-3) crossing[index(l)] = 1.0;
      continue;
    }
    double lo = 0.0, hi = 1.0;
    const double tol = time_tol / dt;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (foot_height(model, hermite_q(prev, next, dt, mid), l) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    crossing[index(l)] = hi;
  }
  std::optional<TouchdownEvent> ev;
  double first = 2.0;
  for (const auto& c : crossing) {
    if (c) first = std::min(first, *c);
  }
  if (first > 1.0) return ev;
  ev.emplace();
  ev->fraction = first;
  for (Leg l : kAllLegs) {
    const auto& c = crossing[index(l)];
    ev->legs[index(l)] = c.has_value() && *c - first <= time_tol / dt;
  }
  return ev;
}

bool detect_liftoff(const GroundReaction& grf, double force_tol) {
  return grf.total_normal() <= force_tol;
}

PhaseValue phase_variable(double t, double duration) {
  if (!(duration > 0.0)) throw ContractViolation("phase duration must be > 0");
  const double r = std::max(0.0, t) / duration;
  return {std::min(1.0, r), r > 1.0};
}

StrideMetrics compute_stride_metrics(const std::vector<TickRecord>& ticks, int stride,
                                     double end_time, double end_x) {
  StrideMetrics m;
  m.stride = stride;
  m.end_time = end_time;
  m.end_x = end_x;
  bool first = true;
  bool any_flight = false;
  int stance_n = 0;
  Vec4 sq = Vec4::Zero();
  double apex_any = -INFINITY;
  m.apex = -INFINITY;
  for (const TickRecord& t : ticks) {
    if (t.stride != stride) continue;
    if (first) {
      m.start_time = t.time;
      m.start_x = t.q[0];
      first = false;
    }
    apex_any = std::max(apex_any, t.q[1]);
    if (t.mode == Phase::kStance) {
      m.max_error = m.max_error.cwiseMax(t.e.cwiseAbs());
      sq += t.e.cwiseAbs2();
      ++stance_n;
    } else {
      any_flight = true;
      m.apex = std::max(m.apex, t.q[1]);
    }
  }
  if (first) throw ContractViolation("no ticks for stride " + std::to_string(stride));
  if (!any_flight) m.apex = apex_any;
  if (stance_n > 0) m.rms_error = (sq / static_cast<double>(stance_n)).cwiseSqrt();
  const double span = end_time - m.start_time;
  m.avg_speed = span > 0.0 ? (end_x - m.start_x) / span : 0.0;
  return m;
}

SensorNoise::SensorNoise(std::uint64_t seed, double stddev)
    : rng_(seed), dist_(0.0, 1.0), stddev_(stddev) {}

GeneralizedState SensorNoise::measure(const GeneralizedState& truth) {
  if (stddev_ == 0.0) return truth;
  GeneralizedState m = truth;
  for (int i = 0; i < kDofs; ++i) m.qd[i] += stddev_ * dist_(rng_);
  return m;
}

StrideResult run_stride(const RobotModel& model, PronkController& controller,
                        const SimConfig& config, const GeneralizedState& touchdown_state,
                        double start_time, SensorNoise& noise) {
  controller.begin_stride();
  const int stride = controller.stride_index();
  const double nominal = controller.gait().stride_time;
  const double dt = config.physics_dt;
  const int substeps = config.substeps();

  StrideResult r;
  r.metrics.stride = stride;
  ContactSet contacts;
  bool projected = false;
  for (Leg l : kAllLegs) {
    const Vec2 foot = foot_position(model, touchdown_state.q, l);
    projected = projected || std::abs(foot.y()) > 5e-3;
    contacts.anchor[index(l)] = Vec2(foot.x(), 0.0);
  }

  GeneralizedState state = touchdown_state;
  Phase phase = Phase::kStance;
  double t = start_time;
  double phase_start = start_time;
  double stance_duration = 0.0;
  int adhesive = 0;
  bool done = false;

  const auto fail = [&](FailureCause cause, const std::string& detail) {
    r.failure = cause;
    r.failure_detail = detail;
    done = true;
  };

  try {
    state.qd = contact_impulse_velocity(model, state, contacts);
    while (!done) {
      if (t - start_time > config.max_stride_factor * nominal) {
        fail(FailureCause::kTimeout, "stride exceeded " + std::to_string(config.max_stride_factor) +
                                         " nominal stride times");
        break;
      }
      const GeneralizedState measured = noise.measure(state);
      const ControlOutput out = controller.update(phase, t - phase_start, measured, contacts);

      TickRecord tick;
      tick.stride = stride;
      tick.time = t;
      tick.q = state.q;
      tick.qd = state.qd;
      tick.s = out.s;
      tick.mode = phase;
      tick.e = out.e;
      tick.ed = out.ed;
      tick.tau_b = out.tau_b;
      tick.tau_f = out.tau_f;
      tick.tau = out.tau;
      tick.q_ref = out.q_ref;
      tick.sat_flags = flag_bits(out.saturated);
      if (phase == Phase::kStance) {
        const StanceResult sr =
            stance_dynamics(model, state, out.tau_applied, contacts, config.baumgarte_omega);
        for (Leg l : kAllLegs) {
          if (const auto& f = sr.grf.force[index(l)]) {
            tick.lam_t[index(l)] = f->tangential;
            tick.lam_n[index(l)] = f->normal;
          }
        }
      }
      r.ticks.push_back(tick);

      for (int i = 0; i < substeps && !done; ++i) {
        const GeneralizedState next = step_physics(model, state, out.tau_applied, phase, contacts,
                                                   dt, config.integrator, config.baumgarte_omega);
        if (!next.finite()) {
          fail(FailureCause::kNonFinite, "state became non-finite");
          break;
        }
        if (phase == Phase::kFlight) {
          if (const auto ev = detect_touchdown(model, state, next, dt, config.event_time_tol)) {
            const double h = ev->fraction * dt;
            r.end_state = step_physics(model, state, out.tau_applied, phase, contacts, h,
                                       config.integrator, config.baumgarte_omega);
            r.end_time = t + h;
            done = true;
            break;
          }
        }
        state = next;
        t += dt;
        if (state.q[1] < config.fall_height) {
          fail(FailureCause::kFall, "torso height " + std::to_string(state.q[1]) + " m below " +
                                        std::to_string(config.fall_height) + " m");
          break;
        }
        if (phase == Phase::kStance) {
          const StanceResult sr =
              stance_dynamics(model, state, out.tau_applied, contacts, config.baumgarte_omega);
          const bool early = t - start_time < config.min_liftoff_phase * controller.gait().stance.duration;
          if (detect_liftoff(sr.grf, config.event_force_tol) && early) ++adhesive;
          if (detect_liftoff(sr.grf, config.event_force_tol) && !early) {
            phase = Phase::kFlight;
            phase_start = t;
            stance_duration = t - start_time;
            contacts = ContactSet{};
            controller.begin_flight();
            break;
          }
        }
      }
    }
  } catch (const DegenerateConfiguration& e) {
    fail(FailureCause::kDegenerate, e.what());
  }

  if (r.failure != FailureCause::kNone) {
    r.end_state = state;
    r.end_time = t;
  }
  if (!r.ticks.empty()) {
    r.metrics = compute_stride_metrics(r.ticks, stride, r.end_time, r.end_state.q[0]);
  }
  r.metrics.stance_duration = stance_duration;
  r.metrics.projected_anchor = projected;
  r.metrics.adhesive_ticks = adhesive;
  r.update = controller.end_stride();
  r.metrics.ilc_active = r.update.ilc_active;
  return r;
}

GeneralizedState startup_state(const RobotModel& model, const InterpolatedGait& gait) {
  GeneralizedState s;
  const Vec4 q = gait.stance.eval(0.0);
  const Vec4 qd = gait.stance.derivative(0.0) / gait.stance.duration;
  s.q.tail<kJointDofs>() = q;
  s.qd.tail<kJointDofs>() = qd;
  double z = 0.0;
  for (Leg l : kAllLegs) {
    const int j = thigh_joint(l);
    z -= foot_relative(model.leg(l), q[j], q[j + 1]).y() + model.leg(l).hip_z;
  }
  s.q[1] = z / kLegs;
  ContactSet contacts;
  for (Leg l : kAllLegs) contacts.anchor[index(l)] = foot_position(model, s.q, l);
  s.qd.head<kBaseDofs>() = leg_odometry_velocity(model, s, contacts);
  return s;
}

ExperimentRecord run_experiment(const RobotModel& model, const GaitLibrary& gaits,
                                ControllerConfig controller, const SimConfig& sim,
                                const ExperimentPlan& plan,
                                const std::optional<TorqueLibrary>& torques) {
  sim.validate();
  if (plan.strides < 1) throw ContractViolation("experiment needs at least one stride");
  controller.mode = plan.mode;
  controller.enable_at = plan.enable_at;
  PronkController ctrl(model, gaits, controller, plan.desired_speed,
                       plan.mode == ControlMode::kReplay ? torques : std::nullopt);

  ExperimentRecord rec;
  rec.plan = plan;
  GeneralizedState state = startup_state(model, gaits.interpolate(plan.desired_speed));
  double t = 0.0;
  SensorNoise noise(sim.seed, sim.qd_noise_std);
  for (int k = 0; k < plan.strides; ++k) {
    StrideResult r = run_stride(model, ctrl, sim, state, t, noise);
    rec.log.ticks.insert(rec.log.ticks.end(), r.ticks.begin(), r.ticks.end());
    rec.log.strides.push_back(r.metrics);
    rec.updates.push_back(r.update);
    if (r.failure != FailureCause::kNone) {
      rec.failure = r.failure;
      rec.failure_detail = "stride " + std::to_string(k) + ": " + r.failure_detail;
      break;
    }
    state = r.end_state;
    t = r.end_time;
    if (plan.stop_on_convergence && ctrl.converged()) break;
  }
  rec.converged_at = ctrl.converged_at();
  rec.learning_updates = ctrl.learning_updates();
  rec.feedforward_history = ctrl.feedforward_history();
  rec.final_feedforward = ctrl.feedforward();
  return rec;
}

Vec4 steady_state_error(const std::vector<StrideMetrics>& strides, int window, bool use_max) {
  if (strides.empty()) throw ContractViolation("no strides to summarize");
  if (window < 1) throw ContractViolation("steady-state window must be >= 1");
  const std::size_t n = std::min<std::size_t>(strides.size(), static_cast<std::size_t>(window));
  Vec4 sum = Vec4::Zero();
  for (std::size_t i = strides.size() - n; i < strides.size(); ++i) {
    sum += use_max ? strides[i].max_error : strides[i].rms_error;
  }
  return sum / static_cast<double>(n);
}

double calf_error(const Vec4& e) { return std::max(e[1], e[3]); }
double thigh_error(const Vec4& e) { return std::max(e[0], e[2]); }

}  // namespace pronk
