#pragma once

#include <string>
#include <vector>

#include "pronk/dynamics/robot_model.hpp"
#include "pronk/gait/bezier.hpp"

namespace pronk {

// One pronking solution: a stance and a flight Bezier phase at average speed v.
// A stride starts at touchdown, so stance comes first.
struct GaitEntry {
  double speed = 0.0;        // average forward speed, m/s
  double stride_time = 0.0;  // s
  double duty = 0.5;         // stance fraction of the stride
  double apex_height = 0.34; // m
  BezierPhase stance;
  BezierPhase flight;

  // Throws ContractViolation naming the broken invariant.
  void validate(const RobotModel* model = nullptr) const;
};

// Effective reference after blending two library entries.
struct InterpolatedGait {
  double speed = 0.0;  // requested speed after clamping
  double stride_time = 0.0;
  BezierPhase stance;
  BezierPhase flight;
  bool clamped = false;  // request was outside the library range
};

class GaitLibrary {
 public:
  GaitLibrary() = default;
  // Entries must be strictly ascending in speed, at least two.
  explicit GaitLibrary(std::vector<GaitEntry> entries);

  const std::vector<GaitEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double min_speed() const { return entries_.front().speed; }
  double max_speed() const { return entries_.back().speed; }
  bool contains_speed(double v, double tol = 1e-9) const;
  const GaitEntry& at_speed(double v, double tol = 1e-9) const;

  // Convex combination of the bracketing entries (v_a <= v < v_b); requests
  // outside the range clamp to the nearest entry and set `clamped`.
  InterpolatedGait interpolate(double v) const;

 private:
  std::vector<GaitEntry> entries_;
};

// Diagonal weights for the stride cost.
struct GaitCostWeights {
  Vec4 torque = Vec4::Ones();
  Vec4 joint_rate = Vec4::Ones();
  void validate(bool allow_zero = false) const;
};

// Integral over the stride of tau' W_tau tau + qd_L' W_q qd_L by the trapezoid
// rule. `torque` holds one column per uniform stride-phase sample (>= 3).
// Joint rates come from the entry's Bezier derivatives.
double evaluate_gait_cost(const GaitEntry& entry,
                          const Eigen::Matrix<double, kJointDofs, Eigen::Dynamic>& torque,
                          const GaitCostWeights& weights);

// Joint reference over a whole stride at stride phase u in [0, 1].
struct StrideReference {
  Vec4 q;
  Vec4 qd;  // rad/s
  Phase phase;
};
StrideReference stride_reference(const GaitEntry& entry, double u);

// File format: JSON document {"format": "pronk-gait-library", "version": 1, ...}.
std::string gait_library_to_json(const GaitLibrary& lib, const std::string& config_echo = "");
GaitLibrary gait_library_from_json(const std::string& text);

}  // namespace pronk
