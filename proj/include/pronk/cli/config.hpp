#pragma once

// Experiment configuration: a strict JSON document with sections model, gait,
// controller, sim and experiment. Omitted keys take their defaults; unknown
// keys, type mismatches and invariant violations are errors.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pronk/gait/gait_generator.hpp"
#include "pronk/sim/simulator.hpp"

namespace pronk {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GaitConfig {
  std::vector<double> speeds = default_library_speeds();
  double apex_height = 0.34;  // m
  double stride_time = 0.4;   // s
  double duty = 0.5;
  GaitTemplateOptions options;
};

struct ExperimentSettings {
  ControlMode mode = ControlMode::kPd;
  double speed = 0.3;         // m/s
  int strides = 30;
  int enable_at = 10;
  int steady_window = 10;     // strides averaged for steady-state errors
  int learn_strides = 60;     // stride cap per speed when learning the torque library
  int average_window = 30;    // final feedforward profiles averaged into the library
  std::string output_dir = "out";
};

struct ExperimentConfig {
  RobotModel model = RobotModel::a1_planar();
  GaitConfig gait;
  ControllerConfig controller;
  SimConfig sim;
  ExperimentSettings experiment;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Full document with every key; parse_config_text(config_to_json(c)) == c.
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "config");
// Throws std::ios_base::failure when the file cannot be read.
ExperimentConfig load_config(const std::string& path);

}  // namespace pronk
