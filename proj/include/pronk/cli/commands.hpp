#pragma once

// Command-line verbs. Exit codes: 0 success, 1 validation or parse error,
// 2 simulation failure (fall or non-convergence), 3 I/O error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pronk/cli/config.hpp"
#include "pronk/sim/export.hpp"

namespace pronk {

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitSimFailure = 2, kExitIo = 3 };

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<ControlMode> mode;
  std::optional<double> speed;
  std::optional<int> strides;
  std::optional<int> learn_strides;
  std::optional<int> enable_at;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool all_speeds = false;
  std::vector<std::string> inputs;
};

// Defaults or --config, with command-line overrides applied and validated.
ExperimentConfig resolve_config(const CommandOptions& options);

// File names inside the output directory.
std::string gait_library_path(const ExperimentConfig& config);
std::string torque_library_path(const ExperimentConfig& config);
std::string speed_tag(double speed);  // "0.300", "-0.100"

// Percentage change (pd - ilc) / pd * 100; positive is an improvement and
// equal inputs give exactly 0.
double percent_change(double pd, double ilc);

struct CompareCell {
  double speed = 0.0;
  std::string joint;   // "thigh" or "calf", worst of front and rear
  std::string stat;    // "max" or "rms"
  double pd = 0.0;
  double ilc = 0.0;
  double change = 0.0;  // percent
};

// Steady-state errors over the last `window` strides per desired speed.
// Throws FormatError when the two runs cover different speed sets.
std::vector<CompareCell> compare_runs(const std::vector<StrideRow>& pd,
                                      const std::vector<StrideRow>& ilc, int window);

// Averages the last `window` feedforward profiles of a learning run.
Signal4 average_profile(const std::vector<Signal4>& history, int window);

int cmd_gen_gaits(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_run(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_compare(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_learn_library(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_plot_data(const CommandOptions& options, std::ostream& out, std::ostream& err);

// Full command line: verb plus flags.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pronk
