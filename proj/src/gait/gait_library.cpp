#include "pronk/gait/gait_library.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "pronk/simd/kernels.hpp"

namespace pronk {
namespace {

constexpr const char* kFormat = "pronk-gait-library";
constexpr int kVersion = 1;

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation("gait entry: " + what);
}

BezierPhase blend(const BezierPhase& a, const BezierPhase& b, double wa, double wb) {
  if (a.coeffs.cols() != b.coeffs.cols()) {
    throw ContractViolation("cannot blend Bezier phases of different order");
  }
  BezierPhase out;
  out.coeffs.resize(kJointDofs, a.coeffs.cols());
  simd::blend4(a.coeffs.data(), b.coeffs.data(), wa, wb, out.coeffs.data(),
               static_cast<std::size_t>(a.coeffs.cols()));
  out.duration = wa * a.duration + wb * b.duration;
  return out;
}

nlohmann::json phase_to_json(const BezierPhase& p) {
  nlohmann::json rows = nlohmann::json::array();
  for (int j = 0; j < kJointDofs; ++j) rows.push_back(p.row(j));
  return {{"duration", p.duration}, {"order", p.order()}, {"coeffs", rows}};
}

BezierPhase phase_from_json(const nlohmann::json& j) {
  BezierPhase p;
  p.duration = j.at("duration").get<double>();
  const int order = j.at("order").get<int>();
  const auto& rows = j.at("coeffs");
  if (rows.size() != kJointDofs) throw FormatError("phase must have 4 coefficient rows");
  p.coeffs.resize(kJointDofs, order + 1);
  for (int r = 0; r < kJointDofs; ++r) {
    const auto row = rows[r].get<std::vector<double>>();
    if (static_cast<int>(row.size()) != order + 1) throw FormatError("coefficient row length mismatch");
    for (int c = 0; c <= order; ++c) p.coeffs(r, c) = row[c];
  }
  return p;
}

}  // namespace

void GaitEntry::validate(const RobotModel* model) const {
  require(std::isfinite(speed), "speed must be finite");
  require(stride_time >= 0.25 - 1e-12 && stride_time <= 0.5 + 1e-12,
          "stride time " + std::to_string(stride_time) + " outside [0.25, 0.5] s");
  require(duty > 0.0 && duty < 1.0, "duty must be in (0, 1)");
  require(stance.coeffs.rows() == kJointDofs && flight.coeffs.rows() == kJointDofs,
          "coefficient matrices need 4 rows");
  require(stance.order() >= 3 && flight.order() >= 3, "Bezier order must be >= 3");
  require(stance.duration > 0.0 && flight.duration > 0.0, "phase durations must be positive");
  require(std::abs(stance.duration + flight.duration - stride_time) <= 1e-9,
          "phase durations must sum to the stride time");
  const Vec4 stance_end = stance.coeffs.col(stance.order());
  const Vec4 flight_start = flight.coeffs.col(0);
  require((stance_end - flight_start).cwiseAbs().maxCoeff() <= 1e-9,
          "stance end and flight start joint values differ");
  if (model) {
    for (const BezierPhase* p : {&stance, &flight}) {
      for (Eigen::Index c = 0; c < p->coeffs.cols(); ++c) {
        for (int j = 0; j < kJointDofs; ++j) {
          const double v = p->coeffs(j, c);
          require(v >= model->q_min[j] && v <= model->q_max[j],
                  "coefficient outside joint limits at joint " + std::to_string(j));
        }
      }
    }
  }
}

GaitLibrary::GaitLibrary(std::vector<GaitEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2) throw ContractViolation("gait library needs at least two entries");
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (!(entries_[i].speed > entries_[i - 1].speed)) {
      throw ContractViolation("gait library speeds must be strictly increasing");
    }
  }
  for (const GaitEntry& e : entries_) e.validate();
}

bool GaitLibrary::contains_speed(double v, double tol) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const GaitEntry& e) { return std::abs(e.speed - v) <= tol; });
}

const GaitEntry& GaitLibrary::at_speed(double v, double tol) const {
  for (const GaitEntry& e : entries_) {
    if (std::abs(e.speed - v) <= tol) return e;
  }
  throw LibraryError("no gait entry at speed " + std::to_string(v));
}

InterpolatedGait GaitLibrary::interpolate(double v) const {
  if (entries_.empty()) throw LibraryError("empty gait library");
  InterpolatedGait out;
  const auto copy = [&](const GaitEntry& e, bool clamped) {
    out.speed = e.speed;
    out.stride_time = e.stride_time;
    out.stance = e.stance;
    out.flight = e.flight;
    out.clamped = clamped;
    return out;
  };
  if (!(v >= min_speed())) return copy(entries_.front(), true);
  if (v > max_speed()) return copy(entries_.back(), true);
  if (v == max_speed()) return copy(entries_.back(), false);

  // First entry with speed > v is v_b.
  const auto hi = std::upper_bound(entries_.begin(), entries_.end(), v,
                                   [](double x, const GaitEntry& e) { return x < e.speed; });
  const GaitEntry& b = *hi;
  const GaitEntry& a = *(hi - 1);
  const double span = b.speed - a.speed;
  const double wa = (b.speed - v) / span;
  const double wb = (v - a.speed) / span;
  out.speed = v;
  out.stride_time = wa * a.stride_time + wb * b.stride_time;
  out.stance = blend(a.stance, b.stance, wa, wb);
  out.flight = blend(a.flight, b.flight, wa, wb);
  out.clamped = false;
  return out;
}

void GaitCostWeights::validate(bool allow_zero) const {
  for (int j = 0; j < kJointDofs; ++j) {
    const bool ok = allow_zero ? (torque[j] >= 0 && joint_rate[j] >= 0)
                               : (torque[j] > 0 && joint_rate[j] > 0);
    if (!ok) throw ContractViolation("gait cost weights must be positive");
  }
}

StrideReference stride_reference(const GaitEntry& entry, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("stride phase outside [0, 1]");
  const double t = u * entry.stride_time;
  StrideReference r;
  if (t < entry.stance.duration) {
    const double s = t / entry.stance.duration;
    r.q = entry.stance.eval(s);
    r.qd = entry.stance.derivative(s) / entry.stance.duration;
    r.phase = Phase::kStance;
  } else {
    const double s = std::min(1.0, (t - entry.stance.duration) / entry.flight.duration);
    r.q = entry.flight.eval(s);
    r.qd = entry.flight.derivative(s) / entry.flight.duration;
    r.phase = Phase::kFlight;
  }
  return r;
}

double evaluate_gait_cost(const GaitEntry& entry,
                          const Eigen::Matrix<double, kJointDofs, Eigen::Dynamic>& torque,
                          const GaitCostWeights& weights) {
  const Eigen::Index n = torque.cols();
  if (n < 3) throw ContractViolation("gait cost needs at least 3 torque samples");
  const double dt = entry.stride_time / static_cast<double>(n - 1);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    const Vec4 qd = stride_reference(entry, u).qd;
    const Vec4 tau = torque.col(i);
    const double integrand = tau.dot(weights.torque.cwiseProduct(tau)) +
                             qd.dot(weights.joint_rate.cwiseProduct(qd));
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    total += w * integrand * dt;
  }
  return total;
}

std::string gait_library_to_json(const GaitLibrary& lib, const std::string& config_echo) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["config"] = config_echo.empty() ? nlohmann::json(nullptr) : nlohmann::json::parse(config_echo);
  nlohmann::json entries = nlohmann::json::array();
  for (const GaitEntry& e : lib.entries()) {
    entries.push_back({{"speed", e.speed},
                       {"stride_time", e.stride_time},
                       {"duty", e.duty},
                       {"apex_height", e.apex_height},
                       {"stance", phase_to_json(e.stance)},
                       {"flight", phase_to_json(e.flight)}});
  }
  doc["entries"] = entries;
  return doc.dump(1) + "\n";
}

GaitLibrary gait_library_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("gait library: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat) throw FormatError("not a gait library file");
    if (doc.at("version").get<int>() != kVersion) throw FormatError("unsupported gait library version");
    std::vector<GaitEntry> entries;
    for (const auto& j : doc.at("entries")) {
      GaitEntry e;
      e.speed = j.at("speed").get<double>();
      e.stride_time = j.at("stride_time").get<double>();
      e.duty = j.at("duty").get<double>();
      e.apex_height = j.at("apex_height").get<double>();
      e.stance = phase_from_json(j.at("stance"));
      e.flight = phase_from_json(j.at("flight"));
      entries.push_back(std::move(e));
    }
    return GaitLibrary(std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("gait library: ") + e.what());
  }
}

}  // namespace pronk
