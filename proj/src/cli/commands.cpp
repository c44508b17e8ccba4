#include "pronk/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "pronk/control/torque_library.hpp"
#include "pronk/gait/gait_constraints.hpp"
#include "pronk/gait/gait_generator.hpp"

namespace pronk {
namespace fs = std::filesystem;
namespace {

constexpr int kFeasibilityStrides = 8;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw std::ios_base::failure("write to '" + path + "' failed");
}

std::string in_dir(const ExperimentConfig& c, const std::string& file) {
  return (fs::path(c.experiment.output_dir) / file).string();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Runs a verb body and maps exceptions onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const LibraryError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const GaitGenerationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: simulation failed: " << e.what() << "\n";
    return kExitSimFailure;
  }
}

GaitLibrary load_gaits(const ExperimentConfig& c) {
  return gait_library_from_json(read_file(gait_library_path(c)));
}

}  // namespace

ExperimentConfig resolve_config(const CommandOptions& o) {
  ExperimentConfig c = o.config_path ? load_config(*o.config_path) : ExperimentConfig{};
  if (o.mode) c.experiment.mode = *o.mode;
  if (o.speed) c.experiment.speed = *o.speed;
  if (o.strides) c.experiment.strides = *o.strides;
  if (o.enable_at) c.experiment.enable_at = *o.enable_at;
  if (o.out) c.experiment.output_dir = *o.out;
  if (o.seed) c.sim.seed = *o.seed;
  if (o.learn_strides) c.experiment.learn_strides = *o.learn_strides;
  c.controller.mode = c.experiment.mode;
  c.controller.enable_at = std::max(0, c.experiment.enable_at);
  c.sim.max_strides = std::max(1, c.experiment.strides);
  c.validate();
  return c;
}

std::string gait_library_path(const ExperimentConfig& c) { return in_dir(c, "gaits.json"); }
std::string torque_library_path(const ExperimentConfig& c) { return in_dir(c, "torques.json"); }

std::string speed_tag(double speed) {
  const double v = std::abs(speed) < 5e-4 ? 0.0 : speed;
  return fixed(v, 3);
}

double percent_change(double pd, double ilc) {
  if (pd == ilc) return 0.0;
  return (pd - ilc) / pd * 100.0;
}

std::vector<CompareCell> compare_runs(const std::vector<StrideRow>& pd,
                                      const std::vector<StrideRow>& ilc, int window) {
  if (window < 1) throw ContractViolation("steady-state window must be >= 1");
  const auto group = [](const std::vector<StrideRow>& rows) {
    std::map<double, std::vector<StrideMetrics>> by_speed;
    for (const StrideRow& r : rows) by_speed[r.desired_speed].push_back(r.metrics);
    return by_speed;
  };
  const auto a = group(pd), b = group(ilc);
  if (a.empty()) throw FormatError("compare: no strides in the PD metrics");
  bool same = a.size() == b.size();
  for (auto ia = a.begin(), ib = b.begin(); same && ia != a.end(); ++ia, ++ib) {
    same = ia->first == ib->first;
  }
  if (!same) throw FormatError("compare: the two metric files cover different speeds");

  std::vector<CompareCell> cells;
  for (const auto& [speed, strides] : a) {
    const auto& other = b.at(speed);
    for (bool use_max : {true, false}) {
      const Vec4 e_pd = steady_state_error(strides, window, use_max);
      const Vec4 e_ilc = steady_state_error(other, window, use_max);
      for (bool calf : {false, true}) {
        CompareCell c;
        c.speed = speed;
        c.joint = calf ? "calf" : "thigh";
        c.stat = use_max ? "max" : "rms";
        c.pd = calf ? calf_error(e_pd) : thigh_error(e_pd);
        c.ilc = calf ? calf_error(e_ilc) : thigh_error(e_ilc);
        c.change = percent_change(c.pd, c.ilc);
        cells.push_back(c);
      }
    }
  }
  return cells;
}

Signal4 average_profile(const std::vector<Signal4>& history, int window) {
  if (history.empty()) throw ContractViolation("no feedforward profiles to average");
  if (window < 1) throw ContractViolation("averaging window must be >= 1");
  const std::size_t n = std::min<std::size_t>(history.size(), static_cast<std::size_t>(window));
  Signal4 sum = Signal4::Zero(kJointDofs, history.back().cols());
  for (std::size_t i = history.size() - n; i < history.size(); ++i) sum += history[i];
  return sum / static_cast<double>(n);
}

int cmd_gen_gaits(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = resolve_config(options);
    const std::string echo = config_to_json(c);
    std::vector<GaitEntry> entries;
    std::vector<std::string> failures;
    for (double v : c.gait.speeds) {
      try {
        entries.push_back(generate_reference_gait(c.model, v, c.gait.apex_height, c.gait.stride_time,
                                                  c.gait.duty, c.gait.options));
      } catch (const GaitGenerationError& e) {
        failures.push_back(speed_tag(v) + " m/s: " + e.what());
      }
    }
    if (!failures.empty()) {
      for (const std::string& f : failures) err << "gait generation failed at " << f << "\n";
      return static_cast<int>(kExitInvalid);
    }
    const GaitLibrary lib(entries);
    write_file(gait_library_path(c), gait_library_to_json(lib, echo));
    out << "wrote " << lib.size() << " gaits to " << gait_library_path(c) << "\n";

    out << "feasibility (PD rollout, stride " << kFeasibilityStrides - 2 << "):\n";
    for (const GaitEntry& e : lib.entries()) {
      ExperimentPlan plan;
      plan.mode = ControlMode::kPd;
      plan.desired_speed = e.speed;
      plan.strides = kFeasibilityStrides;
      ControllerConfig k = c.controller;
      const ExperimentRecord rec = run_experiment(c.model, lib, k, c.sim, plan);
      const int stride = static_cast<int>(rec.log.strides.size()) - 2;
      const GaitRollout rollout = rollout_from_ticks(rec.log.ticks, std::max(0, stride));
      const FeasibilityReport report = check_gait_constraints(e, c.model, rollout);
      out << "  v=" << speed_tag(e.speed) << (report.feasible() ? "  feasible  " : "  violations")
          << (bilateral_symmetric(e) ? "  symmetric" : "  asymmetric");
      if (rec.failure != FailureCause::kNone) out << "  rollout " << name(rec.failure);
      out << "\n";
      for (const ConstraintCheck& chk : report.checks) {
        out << "      " << (chk.pass ? "pass " : "FAIL ") << chk.name << " margin " << chk.margin
            << " (" << chk.detail << ")\n";
      }
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_run(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = resolve_config(options);
    const std::string echo = config_to_json(c);
    const GaitLibrary lib = load_gaits(c);
    std::optional<TorqueLibrary> torques;
    if (c.experiment.mode == ControlMode::kReplay) {
      torques = torque_library_from_json(read_file(torque_library_path(c)));
    }
    const std::vector<double> speeds =
        options.all_speeds ? c.gait.speeds : std::vector<double>{c.experiment.speed};
    const std::string mode = name(c.experiment.mode);
    std::vector<StrideRow> rows;
    int code = kExitOk;
    for (double v : speeds) {
      ExperimentPlan plan;
      plan.mode = c.experiment.mode;
      plan.desired_speed = v;
      plan.strides = c.experiment.strides;
      plan.enable_at = c.experiment.enable_at;
      const ExperimentRecord rec = run_experiment(c.model, lib, c.controller, c.sim, plan, torques);
      const std::string tag = mode + "_" + speed_tag(v);
      write_file(in_dir(c, "ticks_" + tag + ".csv"), tick_csv(rec.log.ticks, echo));
      write_file(in_dir(c, "summary_" + tag + ".json"),
                 experiment_summary_json(rec, c.experiment.steady_window, echo));
      for (const StrideMetrics& m : rec.log.strides) rows.push_back({v, m});
      out << "v=" << speed_tag(v) << " mode=" << mode << " strides=" << rec.log.strides.size();
      if (!rec.log.strides.empty()) {
        const Vec4 e = steady_state_error(rec.log.strides, c.experiment.steady_window);
        out << " steady max calf=" << fixed(calf_error(e), 4) << " thigh=" << fixed(thigh_error(e), 4);
      }
      if (rec.failure != FailureCause::kNone) {
        out << " FAILED " << rec.failure_detail;
        code = kExitSimFailure;
      }
      out << "\n";
    }
    write_file(in_dir(c, "strides_" + mode + ".csv"), stride_csv(rows, echo));
    return code;
  });
}

int cmd_compare(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.inputs.size() != 2) {
      throw ConfigError("compare needs two stride-metric files: PD then ILC");
    }
    const ExperimentConfig c = resolve_config(options);
    const auto pd = parse_stride_csv(read_file(options.inputs[0]));
    const auto ilc = parse_stride_csv(read_file(options.inputs[1]));
    const auto cells = compare_runs(pd, ilc, c.experiment.steady_window);
    std::string csv = "# format pronk-compare version " + std::to_string(kLogFormatVersion) +
                      "\nspeed,joint,stat,pd,ilc,change_percent\n";
    out << "  speed  joint  stat        PD       ILC   change\n";
    for (const CompareCell& cell : cells) {
      char line[160];
      std::snprintf(line, sizeof line, "%7.3f  %-5s  %-4s  %8.4f  %8.4f  %6.1f%%\n", cell.speed,
                    cell.joint.c_str(), cell.stat.c_str(), cell.pd, cell.ilc, cell.change);
      out << line;
      char row[200];
      std::snprintf(row, sizeof row, "%.17g,%s,%s,%.17g,%.17g,%.17g\n", cell.speed, cell.joint.c_str(),
                    cell.stat.c_str(), cell.pd, cell.ilc, cell.change);
      csv += row;
    }
    write_file(in_dir(c, "compare.csv"), csv);
    return static_cast<int>(kExitOk);
  });
}

int cmd_learn_library(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = resolve_config(options);
    const std::string echo = config_to_json(c);
    const GaitLibrary lib = load_gaits(c);
    TorqueLibrary torques(c.controller.grid_size);
    std::vector<std::string> failures;
    for (const GaitEntry& e : lib.entries()) {
      ExperimentPlan plan;
      plan.mode = ControlMode::kIlc;
      plan.desired_speed = e.speed;
      plan.strides = c.experiment.learn_strides;
      plan.enable_at = c.experiment.enable_at;
      const ExperimentRecord rec = run_experiment(c.model, lib, c.controller, c.sim, plan);
      out << "v=" << speed_tag(e.speed);
      if (rec.failure != FailureCause::kNone || rec.converged_at < 0) {
        const std::string why = rec.failure != FailureCause::kNone ? rec.failure_detail : "no convergence";
        out << " omitted: " << why << "\n";
        failures.push_back(speed_tag(e.speed));
        continue;
      }
      TorqueProfile p;
      p.speed = e.speed;
      p.stance = average_profile(rec.feedforward_history, c.experiment.average_window);
      p.strides_to_converge = rec.converged_at - c.experiment.enable_at + 1;
      p.final_change = rec.updates.back().feedforward_change;
      torques.freeze(lib, p, c.model.tau_max);
      out << " converged after " << p.strides_to_converge << " ILC strides\n";
    }
    if (!torques.empty()) {
      write_file(torque_library_path(c), torque_library_to_json(torques, echo));
      out << "wrote " << torques.profiles().size() << " profiles to " << torque_library_path(c) << "\n";
    }
    if (!failures.empty()) {
      err << "no converged profile at " << failures.size() << " speed(s)\n";
      return static_cast<int>(kExitSimFailure);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_plot_data(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = resolve_config(options);
    std::vector<std::string> inputs = options.inputs;
    if (inputs.empty() && fs::exists(torque_library_path(c))) inputs.push_back(torque_library_path(c));
    if (inputs.empty()) throw ConfigError("plot-data needs tick CSV or torque library inputs");
    for (const std::string& path : inputs) {
      const std::string text = read_file(path);
      const std::string stem = fs::path(path).stem().string();
      std::string csv = "# format pronk-plot version " + std::to_string(kLogFormatVersion) +
                        "\n# source " + fs::path(path).filename().string() + "\n";
      if (fs::path(path).extension() == ".json") {
        const TorqueLibrary lib = torque_library_from_json(text);
        csv += "speed,s,tau_thigh_F,tau_calf_F,tau_thigh_R,tau_calf_R\n";
        const std::vector<double> grid = phase_grid(lib.grid_size());
        for (const TorqueProfile& p : lib.profiles()) {
          for (int i = 0; i < lib.grid_size(); ++i) {
            char row[256];
            std::snprintf(row, sizeof row, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.speed, grid[i],
                          p.stance(0, i), p.stance(1, i), p.stance(2, i), p.stance(3, i));
            csv += row;
          }
        }
        const std::string target = in_dir(c, "plot_torques_" + stem + ".csv");
        write_file(target, csv);
        out << "wrote " << target << "\n";
      } else {
        const std::vector<TickRecord> ticks = parse_tick_csv(text);
        csv += "time,s,mode";
        for (const char* j : {"thigh_F", "calf_F", "thigh_R", "calf_R"}) {
          csv += std::string(",ref_") + j + ",act_" + j;
        }
        csv += "\n";
        for (const TickRecord& t : ticks) {
          char row[512];
          const Vec4 q = t.q.tail<kJointDofs>();
          const Vec4 ref = t.e + q;
          std::snprintf(row, sizeof row,
                        "%.17g,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t.time,
                        t.s, name(t.mode), ref[0], q[0], ref[1], q[1], ref[2], q[2], ref[3], q[3]);
          csv += row;
        }
        const std::string target = in_dir(c, "plot_tracking_" + stem + ".csv");
        write_file(target, csv);
        out << "wrote " << target << "\n";
      }
    }
    return static_cast<int>(kExitOk);
  });
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Planar pronking simulator with iterative learning control"};
  app.require_subcommand(1);
  CommandOptions o;
  std::string mode;
  std::string config_path, out_dir;
  double speed = 0.0;
  int strides = 0, enable_at = 0;
  std::uint64_t seed = 0;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed");
  };
  const auto sim_flags = [&](CLI::App* sub) {
    sub->add_option("--mode", mode, "pd, ilc or replay")->check(CLI::IsMember({"pd", "ilc", "replay"}));
    sub->add_option("--speed", speed, "desired average speed, m/s");
    sub->add_option("--strides", strides, "strides to simulate")->check(CLI::PositiveNumber);
    sub->add_option("--enable-at", enable_at, "first stride using ILC feedforward")
        ->check(CLI::NonNegativeNumber);
  };

  CLI::App* gen = app.add_subcommand("gen-gaits", "generate the gait library and check feasibility");
  common(gen);
  CLI::App* run = app.add_subcommand("run", "simulate one speed (or all with --all-speeds)");
  common(run);
  sim_flags(run);
  run->add_flag("--all-speeds", o.all_speeds, "run every library speed");
  CLI::App* cmp = app.add_subcommand("compare", "steady-state error table: PD vs ILC");
  common(cmp);
  cmp->add_option("files", o.inputs, "PD and ILC stride-metric CSV files")->expected(2);
  CLI::App* learn = app.add_subcommand("learn-library", "learn and freeze the torque library");
  common(learn);
  learn->add_option("--strides", strides, "stride cap per speed")->check(CLI::PositiveNumber);
  learn->add_option("--enable-at", enable_at, "PD warm-up strides")->check(CLI::NonNegativeNumber);
  CLI::App* plot = app.add_subcommand("plot-data", "plot-ready CSV from tick logs or a torque library");
  common(plot);
  plot->add_option("files", o.inputs, "tick CSV files or torque library JSON");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  CLI::App* sub = app.get_subcommands().front();
  const auto given = [&](const char* flag) { return sub->get_option_no_throw(flag) && sub->count(flag) > 0; };
  if (given("--config")) o.config_path = config_path;
  if (given("--out")) o.out = out_dir;
  if (given("--seed")) o.seed = seed;
  if (given("--mode")) o.mode = parse_control_mode(mode);
  if (given("--speed")) o.speed = speed;
  if (given("--enable-at")) o.enable_at = enable_at;
  if (given("--strides")) {
    if (sub == learn) {
      o.learn_strides = strides;
    } else {
      o.strides = strides;
    }
  }

  if (sub == gen) return cmd_gen_gaits(o, out, err);
  if (sub == run) return cmd_run(o, out, err);
  if (sub == cmp) return cmd_compare(o, out, err);
  if (sub == plot) return cmd_plot_data(o, out, err);
  return cmd_learn_library(o, out, err);
}

}  // namespace pronk
