#include "pronk/control/torque_library.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "pronk/control/ilc.hpp"

namespace pronk {
namespace {

constexpr const char* kFormat = "pronk-torque-library";
constexpr int kVersion = 1;

}  // namespace

TorqueLibrary::TorqueLibrary(int grid_size) : grid_size_(grid_size) {
  if (grid_size < 2) throw ContractViolation("torque library grid needs at least 2 points");
}

const TorqueProfile* TorqueLibrary::find(double speed, double tol) const {
  for (const TorqueProfile& p : profiles_) {
    if (std::abs(p.speed - speed) <= tol) return &p;
  }
  return nullptr;
}

void TorqueLibrary::freeze(const GaitLibrary& gaits, TorqueProfile profile, const Vec4& tau_max) {
  if (!gaits.contains_speed(profile.speed)) {
    throw LibraryError("no gait library entry at speed " + std::to_string(profile.speed));
  }
  if (profile.stance.cols() != grid_size_) {
    throw LibraryError("torque profile has " + std::to_string(profile.stance.cols()) +
                       " grid points, library expects " + std::to_string(grid_size_));
  }
  if (!profile.stance.allFinite()) throw LibraryError("torque profile is not finite");
  profile.speed = gaits.at_speed(profile.speed).speed;
  for (Eigen::Index i = 0; i < profile.stance.cols(); ++i) {
    profile.stance.col(i) = profile.stance.col(i).cwiseMax(-tau_max).cwiseMin(tau_max);
  }
  auto it = std::find_if(profiles_.begin(), profiles_.end(),
                         [&](const TorqueProfile& p) { return p.speed == profile.speed; });
  if (it != profiles_.end()) {
    *it = std::move(profile);
    return;
  }
  it = std::upper_bound(profiles_.begin(), profiles_.end(), profile.speed,
                        [](double v, const TorqueProfile& p) { return v < p.speed; });
  profiles_.insert(it, std::move(profile));
}

Vec4 TorqueLibrary::lookup(double speed, double s) const {
  if (profiles_.empty()) throw LibraryError("torque library is empty");
  if (profiles_.size() == 1 || !(speed > profiles_.front().speed)) {
    return sample_grid(profiles_.front().stance, s);
  }
  if (speed >= profiles_.back().speed) return sample_grid(profiles_.back().stance, s);
  const auto hi = std::upper_bound(profiles_.begin(), profiles_.end(), speed,
                                   [](double v, const TorqueProfile& p) { return v < p.speed; });
  const TorqueProfile& b = *hi;
  const TorqueProfile& a = *(hi - 1);
  if (speed == a.speed) return sample_grid(a.stance, s);
  const double span = b.speed - a.speed;
  const double wa = (b.speed - speed) / span;
  const double wb = (speed - a.speed) / span;
  return wa * sample_grid(a.stance, s) + wb * sample_grid(b.stance, s);
}

TorqueLibrary freeze_torque_profile(TorqueLibrary library, const GaitLibrary& gaits,
                                    TorqueProfile profile, const Vec4& tau_max) {
  library.freeze(gaits, std::move(profile), tau_max);
  return library;
}

Vec4 lookup_feedforward(const TorqueLibrary& library, double speed, double s) {
  return library.lookup(speed, s);
}

std::string torque_library_to_json(const TorqueLibrary& library, const std::string& config_echo) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["config"] = config_echo.empty() ? nlohmann::json(nullptr) : nlohmann::json::parse(config_echo);
  doc["grid_size"] = library.grid_size();
  nlohmann::json profiles = nlohmann::json::array();
  for (const TorqueProfile& p : library.profiles()) {
    nlohmann::json rows = nlohmann::json::array();
    for (int j = 0; j < kJointDofs; ++j) {
      std::vector<double> row(p.stance.cols());
      for (Eigen::Index i = 0; i < p.stance.cols(); ++i) row[i] = p.stance(j, i);
      rows.push_back(row);
    }
    profiles.push_back({{"speed", p.speed},
                        {"strides_to_converge", p.strides_to_converge},
                        {"final_change", p.final_change},
                        {"stance", rows}});
  }
  doc["profiles"] = profiles;
  return doc.dump(1) + "\n";
}

TorqueLibrary torque_library_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("torque library: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat) throw FormatError("not a torque library file");
    if (doc.at("version").get<int>() != kVersion) throw FormatError("unsupported torque library version");
    TorqueLibrary lib(doc.at("grid_size").get<int>());
    double last = -INFINITY;
    for (const auto& j : doc.at("profiles")) {
      TorqueProfile p;
      p.speed = j.at("speed").get<double>();
      if (!(p.speed > last)) throw FormatError("torque profiles must be in ascending speed order");
      last = p.speed;
      p.strides_to_converge = j.at("strides_to_converge").get<int>();
      p.final_change = j.at("final_change").get<double>();
      const auto& rows = j.at("stance");
      if (rows.size() != kJointDofs) throw FormatError("torque profile must have 4 rows");
      p.stance.resize(kJointDofs, lib.grid_size());
      for (int r = 0; r < kJointDofs; ++r) {
        const auto row = rows[r].get<std::vector<double>>();
        if (static_cast<int>(row.size()) != lib.grid_size()) throw FormatError("torque profile row length mismatch");
        for (int c = 0; c < lib.grid_size(); ++c) p.stance(r, c) = row[c];
      }
      lib.profiles_.push_back(std::move(p));
    }
    return lib;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("torque library: ") + e.what());
  }
}

}  // namespace pronk
