#pragma once

// Stance tracking law
//
//   tau_k(s)   = tau_b_k(s) + tau_f_k(s)
//   tau_b_k(s) = Kp_b e_k(s) + Kd_b ed_k(s)
//   tau_f_k(s) = tau_{k-1}(s) + Kp_f e_{k-1}(s + ds) + Kd_f ed_{k-1}(s + ds)
//
// with e = h_d(s) - q_L. Previous-iteration signals live on a uniform phase
// grid and are linearly interpolated.

#include <string>
#include <vector>

#include "pronk/dynamics/dynamics.hpp"
#include "pronk/filters/filters.hpp"
#include "pronk/gait/bezier.hpp"

namespace pronk {

struct ControllerGains {
  Vec4 kp_b = Vec4::Zero();  // N m / rad
  Vec4 kd_b = Vec4::Zero();  // N m s / rad
  Vec4 kp_f = Vec4::Zero();
  Vec4 kd_f = Vec4::Zero();

  // Thigh 60 / 6 and calf 90 / 2 on both legs, feedforward equal to feedback.
  static ControllerGains paper();
  // Feedback doubled for lumped leg pairs, feedforward 0.3 of feedback.
  static ControllerGains lumped();
  // Throws ContractViolation naming the offending entry.
  void validate() const;
};

struct TrackingError {
  Vec4 e = Vec4::Zero();   // rad
  Vec4 ed = Vec4::Zero();  // rad/s
};

// e = h_d(s) - q, ed = h_d'(s) / T - qd. Throws DomainError for s outside [0, 1].
TrackingError tracking_error(const BezierPhase& ref, const Vec4& q, const Vec4& qd, double s);

Vec4 feedback_torque(const ControllerGains& gains, const Vec4& e, const Vec4& ed);

// Uniform phase grid s_i = i / (n - 1).
std::vector<double> phase_grid(int n);

// Linear interpolation of a grid signal; s is clamped to [0, 1] and grid
// points are returned exactly.
Vec4 sample_grid(const Signal4& values, double s);

struct IterationBuffer {
  std::vector<double> grid;
  Signal4 tau;  // N m, torques applied in iteration k - 1
  Signal4 e;    // rad
  Signal4 ed;   // rad/s
  int k = 0;    // number of completed updates
  Phase phase = Phase::kStance;
  bool filtered = false;  // last update went through the zero-phase filter

  static IterationBuffer empty(int grid_size, Phase phase = Phase::kStance);
  int size() const { return static_cast<int>(grid.size()); }
  // Throws ContractViolation unless the arrays share a strictly increasing
  // grid from 0 to 1.
  void validate() const;
};

// tau_f at phase s; zero while k == 0. s + ds is clamped to 1.
Vec4 feedforward_torque(const IterationBuffer& buffer, const ControllerGains& gains, double s,
                        double lookahead);

// Feedforward evaluated on every grid point of the buffer.
Signal4 feedforward_profile(const IterationBuffer& buffer, const ControllerGains& gains,
                            double lookahead);

struct TotalTorque {
  Vec4 unsaturated = Vec4::Zero();  // tau_b + tau_f
  Vec4 applied = Vec4::Zero();      // clamped to +/- tau_max
  SaturationFlags saturated{};
};

TotalTorque total_torque(const Vec4& tau_b, const Vec4& tau_f, const Vec4& tau_max);

// Samples of one stance phase in control-tick order.
struct PhaseLog {
  std::vector<double> s;
  std::vector<Vec4> tau;
  std::vector<Vec4> e;
  std::vector<Vec4> ed;

  void push(double phase, const Vec4& torque, const Vec4& error, const Vec4& error_rate);
  std::size_t size() const { return s.size(); }
  void clear();
};

// Resamples the log onto the buffer grid (holding the end values where the
// log stops short), zero-phase filters each channel and increments k. Logs
// shorter than 3 * filter order skip filtering and leave `filtered` false.
// Throws ContractViolation for an empty log or decreasing phases.
IterationBuffer end_of_stride_update(const PhaseLog& log, const IIRCoefficients& filter,
                                     const IterationBuffer& previous);

// True when history holds at least window + 1 profiles and each of the last
// `window` consecutive differences has infinity norm <= tol.
bool detect_convergence(const std::vector<Signal4>& history, int window, double tol);

}  // namespace pronk
