#include "pronk/sim/export.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace pronk {
namespace {

const char* const kJoint[] = {"thigh_F", "calf_F", "thigh_R", "calf_R"};
const char* const kCoord[] = {"x", "z", "thigh_F", "calf_F", "thigh_R", "calf_R"};

void put(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

std::string compact_config(const std::string& config_echo) {
  if (config_echo.empty()) return "null";
  return nlohmann::json::parse(config_echo).dump();
}

std::string preamble(const char* format, const std::string& config_echo) {
  return std::string("# format ") + format + " version " + std::to_string(kLogFormatVersion) +
         "\n# config " + compact_config(config_echo) + "\n";
}

std::string join(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) s += ',';
    s += cols[i];
  }
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double number(const std::string& cell, std::size_t line) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("line " + std::to_string(line) + ": '" + cell + "' is not a number");
  }
  return v;
}

// Data rows of a CSV whose header must equal `columns`.
std::vector<std::vector<std::string>> rows_of(const std::string& text, const char* format,
                                              const std::vector<std::string>& columns) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  bool saw_format = false, saw_header = false;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind(std::string("# format ") + format + " ", 0) == 0) saw_format = true;
      continue;
    }
    if (!saw_header) {
      if (split(line) != columns) throw FormatError(std::string(format) + ": unexpected header");
      saw_header = true;
      continue;
    }
    auto cells = split(line);
    if (cells.size() != columns.size()) {
      throw FormatError("line " + std::to_string(n) + ": expected " +
                        std::to_string(columns.size()) + " cells");
    }
    rows.push_back(std::move(cells));
  }
  if (!saw_format) throw FormatError(std::string("not a ") + format + " file");
  if (!saw_header) throw FormatError(std::string(format) + ": missing header row");
  return rows;
}

}  // namespace

std::vector<std::string> tick_csv_columns() {
  std::vector<std::string> c = {"time"};
  for (const char* q : kCoord) c.push_back(std::string("q_") + q);
  for (const char* q : kCoord) c.push_back(std::string("qd_") + q);
  c.push_back("s");
  c.push_back("mode");
  for (const char* prefix : {"e_", "ed_", "tau_b_", "tau_f_", "tau_"}) {
    for (const char* j : kJoint) c.push_back(prefix + std::string(j));
  }
  for (const char* prefix : {"lam_t_", "lam_n_"}) {
    for (Leg l : kAllLegs) c.push_back(prefix + std::string(name(l)));
  }
  c.push_back("sat_flags");
  return c;
}

std::string tick_csv(const std::vector<TickRecord>& ticks, const std::string& config_echo) {
  std::string out = preamble("pronk-ticks", config_echo) + join(tick_csv_columns()) + "\n";
  for (const TickRecord& t : ticks) {
    put(out, t.time);
    const auto many = [&](const auto& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += ',';
        put(out, v[i]);
      }
    };
    many(t.q);
    many(t.qd);
    out += ',';
    put(out, t.s);
    out += ',';
    out += name(t.mode);
    many(t.e);
    many(t.ed);
    many(t.tau_b);
    many(t.tau_f);
    many(t.tau);
    many(t.lam_t);
    many(t.lam_n);
    out += ',' + std::to_string(t.sat_flags) + '\n';
  }
  return out;
}

std::vector<TickRecord> parse_tick_csv(const std::string& text) {
  const auto rows = rows_of(text, "pronk-ticks", tick_csv_columns());
  std::vector<TickRecord> ticks;
  ticks.reserve(rows.size());
  std::size_t line = 3;
  for (const auto& r : rows) {
    ++line;
    TickRecord t;
    std::size_t c = 0;
    const auto next = [&] { return number(r[c++], line); };
    t.time = next();
    for (int i = 0; i < kDofs; ++i) t.q[i] = next();
    for (int i = 0; i < kDofs; ++i) t.qd[i] = next();
    t.s = next();
    const std::string& mode = r[c++];
    if (mode == "stance") {
      t.mode = Phase::kStance;
    } else if (mode == "flight") {
      t.mode = Phase::kFlight;
    } else {
      throw FormatError("line " + std::to_string(line) + ": unknown mode '" + mode + "'");
    }
    for (Vec4* v : {&t.e, &t.ed, &t.tau_b, &t.tau_f, &t.tau}) {
      for (int i = 0; i < kJointDofs; ++i) (*v)[i] = next();
    }
    for (Vec2* v : {&t.lam_t, &t.lam_n}) {
      for (int i = 0; i < kLegs; ++i) (*v)[i] = next();
    }
    t.sat_flags = static_cast<unsigned>(next());
    ticks.push_back(t);
  }
  return ticks;
}

std::vector<std::string> stride_csv_columns() {
  std::vector<std::string> c = {"stride"};
  for (const char* prefix : {"max_e_", "rms_e_"}) {
    for (const char* j : kJoint) c.push_back(prefix + std::string(j));
  }
  for (const char* tail : {"avg_speed", "apex", "desired_speed", "ilc_active"}) c.push_back(tail);
  return c;
}

std::string stride_csv(const std::vector<StrideRow>& rows, const std::string& config_echo) {
  std::string out = preamble("pronk-strides", config_echo) + join(stride_csv_columns()) + "\n";
  for (const StrideRow& r : rows) {
    out += std::to_string(r.metrics.stride);
    for (const Vec4* v : {&r.metrics.max_error, &r.metrics.rms_error}) {
      for (int j = 0; j < kJointDofs; ++j) {
        out += ',';
        put(out, (*v)[j]);
      }
    }
    for (double v : {r.metrics.avg_speed, r.metrics.apex, r.desired_speed}) {
      out += ',';
      put(out, v);
    }
    out += r.metrics.ilc_active ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<StrideRow> parse_stride_csv(const std::string& text) {
  const auto rows = rows_of(text, "pronk-strides", stride_csv_columns());
  std::vector<StrideRow> out;
  std::size_t line = 3;
  for (const auto& r : rows) {
    ++line;
    StrideRow row;
    std::size_t c = 0;
    const auto next = [&] { return number(r[c++], line); };
    row.metrics.stride = static_cast<int>(next());
    for (Vec4* v : {&row.metrics.max_error, &row.metrics.rms_error}) {
      for (int j = 0; j < kJointDofs; ++j) (*v)[j] = next();
    }
    row.metrics.avg_speed = next();
    row.metrics.apex = next();
    row.desired_speed = next();
    row.metrics.ilc_active = next() != 0.0;
    out.push_back(row);
  }
  return out;
}

std::string experiment_summary_json(const ExperimentRecord& record, int window,
                                    const std::string& config_echo) {
  nlohmann::ordered_json doc;
  doc["format"] = "pronk-experiment";
  doc["version"] = kLogFormatVersion;
  doc["config"] = config_echo.empty() ? nlohmann::ordered_json(nullptr)
                                      : nlohmann::ordered_json::parse(config_echo);
  doc["plan"] = {{"mode", name(record.plan.mode)},
                 {"desired_speed", record.plan.desired_speed},
                 {"strides", record.plan.strides},
                 {"enable_at", record.plan.enable_at}};
  doc["failure"] = name(record.failure);
  doc["failure_detail"] = record.failure_detail;
  doc["strides_completed"] = record.log.strides.size();
  doc["converged_at"] = record.converged_at;
  doc["learning_updates"] = record.learning_updates;
  const auto& strides = record.log.strides;
  if (!strides.empty()) {
    const int w = std::min<int>(window, static_cast<int>(strides.size()));
    const Vec4 mx = steady_state_error(strides, w, true);
    const Vec4 rms = steady_state_error(strides, w, false);
    double speed = 0.0;
    for (std::size_t i = strides.size() - w; i < strides.size(); ++i) speed += strides[i].avg_speed;
    doc["steady_state"] = {{"window", w},
                           {"max_error", std::vector<double>(mx.data(), mx.data() + kJointDofs)},
                           {"rms_error", std::vector<double>(rms.data(), rms.data() + kJointDofs)},
                           {"avg_speed", speed / w}};
  } else {
    doc["steady_state"] = nullptr;
  }
  return doc.dump(1) + "\n";
}

GaitRollout rollout_from_ticks(const std::vector<TickRecord>& ticks, int stride) {
  GaitRollout r;
  for (const TickRecord& t : ticks) {
    if (t.stride != stride && !(t.stride == stride + 1 && !r.samples.empty())) continue;
    r.samples.push_back({t.time, t.q, t.qd, t.tau, t.lam_t, t.lam_n, t.mode});
    if (t.stride == stride + 1) break;
  }
  return r;
}

}  // namespace pronk
