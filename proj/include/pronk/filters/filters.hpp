#pragma once

// Zero-phase IIR filtering of per-stride records, first-order velocity
// smoothing and leg odometry.

#include <span>
#include <string>
#include <vector>

#include "pronk/dynamics/dynamics.hpp"

namespace pronk {

// Four channels (one per joint), one column per sample.
using Signal4 = Eigen::Matrix<double, kJointDofs, Eigen::Dynamic>;

// Y(z) = (b0 + b1 z^-1 + ... + bj z^-j) / (1 + a1 z^-1 + ... + aj z^-j).
class IIRCoefficients {
 public:
  // Throws ContractViolation unless sizes match, a[0] == 1 and
  // every pole lies strictly inside the unit circle.
  IIRCoefficients(std::vector<double> b, std::vector<double> a);

  // Coefficients printed for the reference controller. DC gain 0.8.
  static IIRCoefficients paper_verbatim();
  // Butterworth low-pass by bilinear transform with prewarping.
  static IIRCoefficients butterworth(int order, double cutoff_hz, double sample_hz);
  // Third-order 25 Hz Butterworth for the 1 kHz loop; unity DC gain.
  static IIRCoefficients butter3_25hz_unity();
  // "paper-verbatim" or "butter3-25hz-unity"; unknown names throw ContractViolation.
  static IIRCoefficients preset(const std::string& name);

  int order() const { return static_cast<int>(a_.size()) - 1; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& a() const { return a_; }
  double dc_gain() const;
  double max_pole_radius() const { return max_pole_radius_; }
  // Internal state giving a constant unit output for a constant unit input
  // (direct form II transposed), scaled by the DC gain.
  std::vector<double> steady_state() const;

 private:
  std::vector<double> b_, a_;
  double max_pole_radius_ = 0.0;
};

inline const std::vector<std::string> kFilterPresets = {"paper-verbatim", "butter3-25hz-unity"};

// Difference equation with zero initial conditions.
std::vector<double> iir_forward(const IIRCoefficients& c, std::span<const double> x);

// Forward pass, reverse, second pass, reverse. Edges are extended by odd
// reflection of 3 * order samples and each pass starts from the steady state
// matching its first sample, so constants pass through at the DC gain
// squared. Throws FilterLengthError when x is shorter than 3 * order.
std::vector<double> zero_phase_filter(const IIRCoefficients& c, std::span<const double> x);
Signal4 zero_phase_filter(const IIRCoefficients& c, const Signal4& x);

struct VelocityEstimatorState {
  enum class Source { kImu, kLegOdometry };
  double alpha = 0.1;  // smoothing factor in (0, 1]
  double velocity = 0.0;
  Source source = Source::kImu;
};

// v <- (1 - alpha) v + alpha raw.
double low_pass_step(VelocityEstimatorState& state, double raw);

// Torso velocity from the no-slip condition J_l qd = 0 of every contacting
// leg, averaged over contacts. Throws EstimatorError without contacts.
Vec2 leg_odometry_velocity(const RobotModel& model, const GeneralizedState& state,
                           const ContactSet& contacts);

}  // namespace pronk
