#include "pronk/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pronk {
namespace {

using Json = nlohmann::ordered_json;

// Arrays whose length may differ from the default.
bool variable_length(const std::string& path) { return path == "gait.speeds"; }

Json vec(const Vec4& v) { return Json::array({v[0], v[1], v[2], v[3]}); }
Json pair(double a, double b) { return Json::array({a, b}); }

Json link_json(const LinkParams& l) {
  return {{"mass", l.mass}, {"length", l.length}, {"com_offset", l.com_offset}, {"inertia", l.inertia}};
}

Json to_json(const ExperimentConfig& c) {
  const RobotModel& m = c.model;
  const LegParams& front = m.leg(Leg::kFront);
  Json model = {{"torso_mass", m.torso_mass},
                {"torso_inertia", m.torso_inertia},
                {"thigh", link_json(front.thigh)},
                {"calf", link_json(front.calf)},
                {"hip_x", front.hip_x},
                {"hip_z", front.hip_z},
                {"q_min", pair(m.q_min[0], m.q_min[1])},
                {"q_max", pair(m.q_max[0], m.q_max[1])},
                {"qd_max", pair(m.qd_max[0], m.qd_max[1])},
                {"tau_max", pair(m.tau_max[0], m.tau_max[1])},
                {"friction_mu", m.friction_mu},
                {"gravity", m.gravity}};
  const GaitTemplateOptions& o = c.gait.options;
  Json gait = {{"speeds", c.gait.speeds},
               {"apex_height", c.gait.apex_height},
               {"stride_time", c.gait.stride_time},
               {"duty", c.gait.duty},
               {"order", o.order},
               {"samples_per_phase", o.samples_per_phase},
               {"swing_clearance", o.swing_clearance},
               {"end_support", o.end_support},
               {"approach_speed", o.approach_speed},
               {"liftoff_speed", o.liftoff_speed}};
  const ControllerConfig& k = c.controller;
  Json controller = {{"kp_b", vec(k.gains.kp_b)},
                     {"kd_b", vec(k.gains.kd_b)},
                     {"kp_f", vec(k.gains.kp_f)},
                     {"kd_f", vec(k.gains.kd_f)},
                     {"lookahead", k.lookahead},
                     {"grid_size", k.grid_size},
                     {"convergence_tol", k.convergence_tol},
                     {"convergence_window", k.convergence_window},
                     {"k_theta", k.k_theta},
                     {"velocity_alpha", k.velocity_alpha},
                     {"filter", k.filter},
                     {"gait_selection", name(k.gait_selection)}};
  const SimConfig& s = c.sim;
  Json sim = {{"physics_dt", s.physics_dt},
              {"control_dt", s.control_dt},
              {"integrator", name(s.integrator)},
              {"event_time_tol", s.event_time_tol},
              {"event_force_tol", s.event_force_tol},
              {"baumgarte_omega", s.baumgarte_omega},
              {"fall_height", s.fall_height},
              {"max_stride_factor", s.max_stride_factor},
              {"min_liftoff_phase", s.min_liftoff_phase},
              {"seed", s.seed},
              {"qd_noise_std", s.qd_noise_std}};
  const ExperimentSettings& e = c.experiment;
  Json experiment = {{"mode", name(e.mode)},
                     {"speed", e.speed},
                     {"strides", e.strides},
                     {"enable_at", e.enable_at},
                     {"steady_window", e.steady_window},
                     {"learn_strides", e.learn_strides},
                     {"average_window", e.average_window},
                     {"output_dir", e.output_dir}};
  return {{"format", "pronk-config"},
          {"version", 1},
          {"model", model},
          {"gait", gait},
          {"controller", controller},
          {"sim", sim},
          {"experiment", experiment}};
}

const char* kind(const Json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number_integer() || j.is_number_unsigned()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

// Overlays `user` onto `base`, rejecting keys and types the defaults do not have.
void overlay(Json& base, const Json& user, const std::string& path) {
  const auto where = [&](const std::string& key) { return path.empty() ? key : path + "." + key; };
  if (base.is_object()) {
    if (!user.is_object()) throw ConfigError(path + ": expected an object, got " + kind(user));
    for (auto it = user.begin(); it != user.end(); ++it) {
      const std::string key = where(it.key());
      if (!base.contains(it.key())) throw ConfigError("unknown key '" + key + "'");
      overlay(base[it.key()], it.value(), key);
    }
    return;
  }
  if (base.is_array()) {
    if (!user.is_array()) throw ConfigError(path + ": expected an array, got " + kind(user));
    if (variable_length(path)) {
      for (std::size_t i = 0; i < user.size(); ++i) {
        if (!user[i].is_number()) {
          throw ConfigError(path + "[" + std::to_string(i) + "]: expected number, got " + kind(user[i]));
        }
      }
      base = user;
      return;
    }
    if (user.size() != base.size()) {
      throw ConfigError(path + ": expected " + std::to_string(base.size()) + " entries, got " +
                        std::to_string(user.size()));
    }
    for (std::size_t i = 0; i < user.size(); ++i) {
      overlay(base[i], user[i], path + "[" + std::to_string(i) + "]");
    }
    return;
  }
  const bool base_int = base.is_number_integer() || base.is_number_unsigned();
  if (base_int) {
    if (!(user.is_number_integer() || user.is_number_unsigned())) {
      throw ConfigError(path + ": expected integer, got " + kind(user));
    }
    if (base.is_number_unsigned() && user.is_number_integer() && user.get<std::int64_t>() < 0) {
      throw ConfigError(path + ": must be >= 0");
    }
  } else if (base.is_number()) {
    if (!user.is_number()) throw ConfigError(path + ": expected number, got " + kind(user));
  } else if (base.is_string()) {
    if (!user.is_string()) throw ConfigError(path + ": expected string, got " + kind(user));
  }
  base = user;
}

LinkParams link_from(const Json& j) {
  return {j["mass"].get<double>(), j["length"].get<double>(), j["com_offset"].get<double>(),
          j["inertia"].get<double>()};
}

Vec4 vec_from(const Json& j) {
  Vec4 v;
  for (int i = 0; i < kJointDofs; ++i) v[i] = j[i].get<double>();
  return v;
}

Vec4 both_legs(const Json& j) {
  const double t = j[0].get<double>(), c = j[1].get<double>();
  return Vec4(t, c, t, c);
}

template <class F>
auto field(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ContractViolation& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ExperimentConfig from_json(const Json& j) {
  ExperimentConfig c;
  const Json& m = j["model"];
  c.model.torso_mass = m["torso_mass"].get<double>();
  c.model.torso_inertia = m["torso_inertia"].get<double>();
  for (Leg l : kAllLegs) {
    LegParams& leg = c.model.legs[index(l)];
    leg.thigh = link_from(m["thigh"]);
    leg.calf = link_from(m["calf"]);
    leg.hip_x = (l == Leg::kFront ? 1.0 : -1.0) * m["hip_x"].get<double>();
    leg.hip_z = m["hip_z"].get<double>();
  }
  c.model.q_min = both_legs(m["q_min"]);
  c.model.q_max = both_legs(m["q_max"]);
  c.model.qd_max = both_legs(m["qd_max"]);
  c.model.tau_max = both_legs(m["tau_max"]);
  c.model.friction_mu = m["friction_mu"].get<double>();
  c.model.gravity = m["gravity"].get<double>();

  const Json& g = j["gait"];
  c.gait.speeds = g["speeds"].get<std::vector<double>>();
  c.gait.apex_height = g["apex_height"].get<double>();
  c.gait.stride_time = g["stride_time"].get<double>();
  c.gait.duty = g["duty"].get<double>();
  c.gait.options.order = g["order"].get<int>();
  c.gait.options.samples_per_phase = g["samples_per_phase"].get<int>();
  c.gait.options.swing_clearance = g["swing_clearance"].get<double>();
  c.gait.options.end_support = g["end_support"].get<double>();
  c.gait.options.approach_speed = g["approach_speed"].get<double>();
  c.gait.options.liftoff_speed = g["liftoff_speed"].get<double>();

  const Json& k = j["controller"];
  c.controller.gains.kp_b = vec_from(k["kp_b"]);
  c.controller.gains.kd_b = vec_from(k["kd_b"]);
  c.controller.gains.kp_f = vec_from(k["kp_f"]);
  c.controller.gains.kd_f = vec_from(k["kd_f"]);
  c.controller.lookahead = k["lookahead"].get<double>();
  c.controller.grid_size = k["grid_size"].get<int>();
  c.controller.convergence_tol = k["convergence_tol"].get<double>();
  c.controller.convergence_window = k["convergence_window"].get<int>();
  c.controller.k_theta = k["k_theta"].get<double>();
  c.controller.velocity_alpha = k["velocity_alpha"].get<double>();
  c.controller.filter = k["filter"].get<std::string>();
  c.controller.gait_selection = field("controller.gait_selection", [&] {
    return parse_gait_selection(k["gait_selection"].get<std::string>());
  });

  const Json& s = j["sim"];
  c.sim.physics_dt = s["physics_dt"].get<double>();
  c.sim.control_dt = s["control_dt"].get<double>();
  c.sim.integrator = field("sim.integrator", [&] {
    return parse_integrator(s["integrator"].get<std::string>());
  });
  c.sim.event_time_tol = s["event_time_tol"].get<double>();
  c.sim.event_force_tol = s["event_force_tol"].get<double>();
  c.sim.baumgarte_omega = s["baumgarte_omega"].get<double>();
  c.sim.fall_height = s["fall_height"].get<double>();
  c.sim.max_stride_factor = s["max_stride_factor"].get<double>();
  c.sim.min_liftoff_phase = s["min_liftoff_phase"].get<double>();
  c.sim.seed = s["seed"].get<std::uint64_t>();
  c.sim.qd_noise_std = s["qd_noise_std"].get<double>();

  const Json& e = j["experiment"];
  c.experiment.mode = field("experiment.mode", [&] {
    return parse_control_mode(e["mode"].get<std::string>());
  });
  c.experiment.speed = e["speed"].get<double>();
  c.experiment.strides = e["strides"].get<int>();
  c.experiment.enable_at = e["enable_at"].get<int>();
  c.experiment.steady_window = e["steady_window"].get<int>();
  c.experiment.learn_strides = e["learn_strides"].get<int>();
  c.experiment.average_window = e["average_window"].get<int>();
  c.experiment.output_dir = e["output_dir"].get<std::string>();
  c.sim.max_strides = std::max(1, c.experiment.strides);
  c.controller.mode = c.experiment.mode;
  c.controller.enable_at = std::max(0, c.experiment.enable_at);
  return c;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void ExperimentConfig::validate() const {
  field("model", [&] { model.validate(); return 0; });
  require(gait.speeds.size() >= 2, "gait.speeds: need at least two speeds");
  for (std::size_t i = 0; i < gait.speeds.size(); ++i) {
    require(std::isfinite(gait.speeds[i]), "gait.speeds: entries must be finite");
    if (i > 0) require(gait.speeds[i] > gait.speeds[i - 1], "gait.speeds: must be strictly increasing");
  }
  require(gait.apex_height > 0.0, "gait.apex_height: must be > 0");
  require(gait.stride_time >= 0.25 && gait.stride_time <= 0.5, "gait.stride_time: must be in [0.25, 0.5] s");
  require(gait.duty > 0.0 && gait.duty < 1.0, "gait.duty: must be in (0, 1)");
  require(gait.options.order >= 3, "gait.order: must be >= 3");
  require(gait.options.samples_per_phase > gait.options.order, "gait.samples_per_phase: must exceed gait.order");
  require(gait.options.swing_clearance >= 0.0, "gait.swing_clearance: must be >= 0");
  require(gait.options.end_support >= 0.0 && gait.options.end_support < 1.0,
          "gait.end_support: must be in [0, 1)");
  require(gait.options.approach_speed >= 0.0, "gait.approach_speed: must be >= 0");
  require(gait.options.liftoff_speed >= 0.0, "gait.liftoff_speed: must be >= 0");
  field("controller", [&] { controller.validate(); return 0; });
  field("sim", [&] { sim.validate(); return 0; });
  require(std::isfinite(experiment.speed), "experiment.speed: must be finite");
  require(experiment.strides >= 1, "experiment.strides: must be >= 1");
  require(experiment.enable_at >= 0, "experiment.enable_at: must be >= 0");
  require(experiment.steady_window >= 1, "experiment.steady_window: must be >= 1");
  require(experiment.learn_strides > experiment.enable_at,
          "experiment.learn_strides: must exceed experiment.enable_at");
  require(experiment.average_window >= 1, "experiment.average_window: must be >= 1");
  require(!experiment.output_dir.empty(), "experiment.output_dir: must not be empty");
}

std::string config_to_json(const ExperimentConfig& config) { return to_json(config).dump(1) + "\n"; }

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  Json user;
  try {
    user = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n');
    throw ConfigError(source + ":" + std::to_string(line) + ": JSON syntax error: " + e.what());
  }
  Json merged = to_json(ExperimentConfig{});
  try {
    overlay(merged, user, "");
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (merged["format"] != "pronk-config") throw ConfigError(source + ": format must be 'pronk-config'");
  if (merged["version"] != 1) throw ConfigError(source + ": unsupported config version");
  ExperimentConfig c;
  try {
    c = from_json(merged);
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace pronk
