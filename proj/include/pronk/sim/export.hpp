#pragma once

// Text formats for simulation output. CSV files open with two comment lines
// ("# format ..." and "# config ..."), followed by a mandatory header row.
// Every number is written with 17 significant digits.

#include <string>
#include <vector>

#include "pronk/gait/gait_constraints.hpp"
#include "pronk/sim/simulator.hpp"

namespace pronk {

inline constexpr int kLogFormatVersion = 1;

// Columns: time, q x6, qd x6, s, mode, e x4, ed x4, tau_b x4, tau_f x4, tau x4,
// lam_t x2, lam_n x2, sat_flags.
std::vector<std::string> tick_csv_columns();
std::string tick_csv(const std::vector<TickRecord>& ticks, const std::string& config_echo);
// Restores every exported field; stride indices and references are not stored
// and come back as zero. Throws FormatError.
std::vector<TickRecord> parse_tick_csv(const std::string& text);

struct StrideRow {
  double desired_speed = 0.0;
  StrideMetrics metrics;
};

// Columns: stride, max_error x4, rms_error x4, avg_speed, apex, then
// desired_speed and ilc_active.
std::vector<std::string> stride_csv_columns();
std::string stride_csv(const std::vector<StrideRow>& rows, const std::string& config_echo);
std::vector<StrideRow> parse_stride_csv(const std::string& text);

// Structured summary of one experiment: plan, outcome and steady-state errors
// over the last `window` strides.
std::string experiment_summary_json(const ExperimentRecord& record, int window,
                                    const std::string& config_echo);

// Ticks of one stride plus the first tick of the next one as the closing sample.
GaitRollout rollout_from_ticks(const std::vector<TickRecord>& ticks, int stride);

}  // namespace pronk
