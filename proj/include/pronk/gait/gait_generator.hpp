#pragma once

#include "pronk/gait/gait_library.hpp"

namespace pronk {

struct GaitTemplateOptions {
  int order = 6;
  int samples_per_phase = 21;
  double swing_clearance = 0.04;  // m, peak foot retraction in flight
  double end_support = 0.3;       // vertical force at touchdown/liftoff, fraction of body weight
  double approach_speed = 0.3;    // m/s, foot descent speed at touchdown
  double liftoff_speed = 0.5;     // m/s, foot rise speed as flight begins
};

// Torso and foot motion the reference is built around.
//
// Stance: vertical acceleration c - g + A sin(pi t/Ts), so the torso leaves
// the ground at z_td + (w_lo - w_td) Ts / 2 with upward speed w_lo; horizontal
// speed ramps linearly from v_td to v_lo. The stance foot path is centred
// under the hip.
//
// Flight: the whole-body centre of mass is ballistic while the feet follow
// Hermite curves that leave the ground vertically at a set rise speed and
// arrive with zero horizontal ground speed and a set descent speed. Torso touchdown velocities are the post-impact
// velocities of that arrival, so perfect tracking repeats the stride exactly.
struct TorsoTemplate {
  double gravity = 9.81;
  double stance_time = 0.0;
  double flight_time = 0.0;
  double apex_height = 0.0;
  double touchdown_height = 0.0;  // z_td
  double end_accel = 0.0;         // c, m/s^2
  double hip_z = 0.0;
  double clearance = 0.0;
  double approach_speed = 0.0;
  double liftoff_speed = 0.0;
  double touchdown_vz = 0.0;  // w_td, downward speed after impact
  double liftoff_vz = 0.0;    // w_lo, upward speed at liftoff
  double touchdown_vx = 0.0;  // v_td, after impact
  double liftoff_vx = 0.0;    // v_lo
  Vec2 arrival_velocity = Vec2::Zero();  // torso velocity just before touchdown

  double stance_amplitude() const;  // A, m/s^2
  double stance_height(double t) const;
  double stance_vertical_speed(double t) const;
  double stance_forward(double t) const;  // horizontal travel since touchdown
  double stance_forward_speed(double t) const;
  double liftoff_height() const;
  double stance_travel() const { return stance_forward(stance_time); }
  // Foot position relative to the hip.
  Vec2 stance_foot(double t) const;
  Vec2 flight_foot(double u) const;
};

// Template substitute for offline trajectory optimization: torso template,
// Raibert-neutral footholds, leg IK, then a pinned least-squares Bezier fit per
// phase. Throws GaitGenerationError on bad arguments or IK failure.
GaitEntry generate_reference_gait(const RobotModel& model, double speed, double apex_height,
                                  double stride_time, double duty,
                                  const GaitTemplateOptions& options = {});

// The torso template used for an entry, solved for the requested average speed.
TorsoTemplate reference_torso(const RobotModel& model, double speed, double apex_height,
                              double stride_time, double duty,
                              const GaitTemplateOptions& options = {});

// Default speed sweep: -0.5 .. 0.8 m/s in 0.1 m/s steps (14 entries).
std::vector<double> default_library_speeds();

GaitLibrary generate_gait_library(const RobotModel& model, const std::vector<double>& speeds,
                                  double apex_height, double stride_time, double duty,
                                  const GaitTemplateOptions& options = {});

}  // namespace pronk
