#pragma once

// Converged stance feedforward profiles keyed by gait speed.

#include <string>
#include <vector>

#include "pronk/filters/filters.hpp"
#include "pronk/gait/gait_library.hpp"

namespace pronk {

struct TorqueProfile {
  double speed = 0.0;   // m/s, one of the gait library speeds
  Signal4 stance;       // N m, one column per phase-grid point
  int strides_to_converge = -1;
  double final_change = 0.0;  // N m, last stride-to-stride feedforward change
};

class TorqueLibrary;
TorqueLibrary torque_library_from_json(const std::string& text);

class TorqueLibrary {
 public:
  TorqueLibrary() = default;
  explicit TorqueLibrary(int grid_size);

  int grid_size() const { return grid_size_; }
  const std::vector<TorqueProfile>& profiles() const { return profiles_; }
  bool empty() const { return profiles_.empty(); }
  const TorqueProfile* find(double speed, double tol = 1e-9) const;

  // Inserts or replaces the profile at profile.speed, clamped to +/- tau_max.
  // Throws LibraryError when the speed is not in the gait library or the grid
  // size differs.
  void freeze(const GaitLibrary& gaits, TorqueProfile profile, const Vec4& tau_max);

  // Bilinear lookup: linear in s on the grid, convex blend between the two
  // nearest stored speeds, clamped at the ends. Throws LibraryError when empty.
  Vec4 lookup(double speed, double s) const;

 private:
  friend TorqueLibrary torque_library_from_json(const std::string& text);
  int grid_size_ = 0;
  std::vector<TorqueProfile> profiles_;  // ascending speed
};

// Same as library.freeze; returns the updated library.
TorqueLibrary freeze_torque_profile(TorqueLibrary library, const GaitLibrary& gaits,
                                    TorqueProfile profile, const Vec4& tau_max);
Vec4 lookup_feedforward(const TorqueLibrary& library, double speed, double s);

// JSON document {"format": "pronk-torque-library", "version": 1, ...} with
// row-major per-joint profiles.
std::string torque_library_to_json(const TorqueLibrary& library, const std::string& config_echo = "");
TorqueLibrary torque_library_from_json(const std::string& text);

}  // namespace pronk
