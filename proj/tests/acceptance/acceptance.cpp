// Acceptance suite: one PASS/FAIL line per criterion A1..A10.
// Usage: pronk_acceptance <path-to-pronk-binary>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pronk/cli/config.hpp"
#include "pronk/control/ilc.hpp"
#include "pronk/control/torque_library.hpp"
#include "pronk/dynamics/dynamics.hpp"
#include "pronk/filters/filters.hpp"
#include "pronk/gait/bezier.hpp"
#include "pronk/gait/gait_generator.hpp"
#include "pronk/sim/simulator.hpp"

using namespace pronk;
namespace fs = std::filesystem;

namespace {

constexpr int kStrides = 70;
constexpr int kReplayStrides = 30;
constexpr int kDivergenceRun = 10;
constexpr int kMaxStridesToConverge = 30;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(const char* id, const Outcome& o) {
  std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  if (!o.pass) ++g_failures;
}

void note(const std::string& text) { std::cout << "    note: " << text << std::endl; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// --- closed-loop experiments ------------------------------------------------

struct SpeedResult {
  double speed = 0.0;
  ExperimentRecord pd;
  ExperimentRecord ilc;
  double pd_calf = NAN;
  double ilc_calf = NAN;
  int strides_to_converge = -1;  // ILC strides, -1 when never converged
  bool diverged = false;
  std::string why;
};

int steady_window(const ExperimentConfig& c) { return c.experiment.steady_window; }

// Calf error grows stride over stride for kDivergenceRun consecutive strides
// at or after `from`.
bool grows_monotonically(const std::vector<StrideMetrics>& strides, int from) {
  int run = 0;
  for (std::size_t i = std::max(from, 1); i < strides.size(); ++i) {
    run = calf_error(strides[i].max_error) > calf_error(strides[i - 1].max_error) ? run + 1 : 0;
    if (run >= kDivergenceRun) return true;
  }
  return false;
}

SpeedResult run_speed(const ExperimentConfig& c, const GaitLibrary& lib, double v) {
  SpeedResult r;
  r.speed = v;
  ExperimentPlan plan;
  plan.desired_speed = v;
  plan.strides = kStrides;
  plan.mode = ControlMode::kPd;
  r.pd = run_experiment(c.model, lib, c.controller, c.sim, plan);
  plan.mode = ControlMode::kIlc;
  plan.enable_at = c.experiment.enable_at;
  r.ilc = run_experiment(c.model, lib, c.controller, c.sim, plan);
  const int w = steady_window(c);
  if (r.pd.failure == FailureCause::kNone) r.pd_calf = calf_error(steady_state_error(r.pd.log.strides, w));
  if (r.ilc.failure == FailureCause::kNone) {
    r.ilc_calf = calf_error(steady_state_error(r.ilc.log.strides, w));
  } else {
    r.why = r.ilc.failure_detail;
  }
  if (r.ilc.converged_at >= 0) r.strides_to_converge = r.ilc.converged_at - plan.enable_at + 1;
  const int from = r.ilc.converged_at >= 0 ? r.ilc.converged_at : plan.enable_at;
  r.diverged = r.ilc.failure != FailureCause::kNone || grows_monotonically(r.ilc.log.strides, from);
  return r;
}

std::vector<SpeedResult> run_sweep(const ExperimentConfig& c, const GaitLibrary& lib) {
  std::vector<std::future<SpeedResult>> jobs;
  for (const GaitEntry& e : lib.entries()) {
    jobs.push_back(std::async(std::launch::async, [&c, &lib, v = e.speed] { return run_speed(c, lib, v); }));
  }
  std::vector<SpeedResult> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

const SpeedResult& at_speed(const std::vector<SpeedResult>& sweep, double v) {
  for (const SpeedResult& r : sweep) {
    if (std::abs(r.speed - v) < 1e-9) return r;
  }
  throw std::runtime_error("speed missing from sweep");
}

Outcome check_a1(const ExperimentConfig& c, const GaitLibrary& lib) {
  const auto t0 = std::chrono::steady_clock::now();
  const SpeedResult r = run_speed(c, lib, 0.3);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  if (r.ilc.failure != FailureCause::kNone) {
    o.detail = fmt("ILC run failed at v=0.3: %s (%.1f s)", r.why.c_str(), secs);
    return o;
  }
  const double ratio = r.ilc_calf / r.pd_calf;
  o.pass = ratio <= 0.5 && secs <= 60.0;
  o.detail = fmt("v=0.3 calf max error PD %.4f ILC %.4f ratio %.3f (<= 0.5), runtime %.1f s (<= 60)",
                 r.pd_calf, r.ilc_calf, ratio, secs);
  return o;
}

Outcome check_a2(const std::vector<SpeedResult>& sweep) {
  double sum = 0.0;
  int n = 0;
  std::vector<std::string> bad;
  for (const SpeedResult& r : sweep) {
    if (r.diverged) bad.push_back(fmt("%.1f", r.speed));
    if (std::isfinite(r.pd_calf) && std::isfinite(r.ilc_calf)) {
      sum += 1.0 - r.ilc_calf / r.pd_calf;
      ++n;
    }
  }
  Outcome o;
  const double mean = n > 0 ? sum / n : NAN;
  o.pass = bad.empty() && n == static_cast<int>(sweep.size()) && mean >= 0.4;
  std::string list;
  for (const auto& s : bad) list += (list.empty() ? "" : ",") + s;
  o.detail = fmt("mean calf reduction %.1f%% over %d/%zu speeds (>= 40%%), diverged at [%s]",
                 100.0 * mean, n, sweep.size(), list.c_str());
  return o;
}

Outcome check_a3(const std::vector<SpeedResult>& sweep) {
  int worst = 0;
  std::string missing;
  for (const SpeedResult& r : sweep) {
    if (r.strides_to_converge < 0 || r.ilc.failure != FailureCause::kNone) {
      missing += (missing.empty() ? "" : ",") + fmt("%.1f", r.speed);
    } else {
      worst = std::max(worst, r.strides_to_converge);
    }
  }
  Outcome o;
  o.pass = missing.empty() && worst <= kMaxStridesToConverge;
  o.detail = fmt("worst strides to converge %d (<= %d), never converged at [%s]", worst,
                 kMaxStridesToConverge, missing.c_str());
  return o;
}

Outcome check_a4(const ExperimentConfig& c, const GaitLibrary& lib, const SpeedResult& learned) {
  Outcome o;
  if (learned.ilc.failure != FailureCause::kNone || learned.ilc.converged_at < 0) {
    o.detail = "no converged ILC run at v=0.3 to freeze";
    return o;
  }
  const int w = std::min<int>(c.experiment.average_window,
                              static_cast<int>(learned.ilc.feedforward_history.size()));
  TorqueProfile p;
  p.speed = 0.3;
  p.stance = Signal4::Zero(kJointDofs, learned.ilc.feedforward_history.front().cols());
  for (int i = 0; i < w; ++i) {
    p.stance += learned.ilc.feedforward_history[learned.ilc.feedforward_history.size() - 1 - i];
  }
  p.stance /= w;
  TorqueLibrary torques(c.controller.grid_size);
  torques.freeze(lib, p, c.model.tau_max);
  ExperimentPlan plan;
  plan.mode = ControlMode::kReplay;
  plan.desired_speed = 0.3;
  plan.strides = kReplayStrides;
  const ExperimentRecord rep = run_experiment(c.model, lib, c.controller, c.sim, plan, torques);
  if (rep.failure != FailureCause::kNone) {
    o.detail = "replay run failed: " + rep.failure_detail;
    return o;
  }
  const double replay = calf_error(steady_state_error(rep.log.strides, steady_window(c)));
  const double ratio = replay / learned.ilc_calf;
  o.pass = ratio <= 1.5 && rep.learning_updates == 0;
  o.detail = fmt("v=0.3 replay calf %.4f vs converged ILC %.4f ratio %.3f (<= 1.5), learning updates %d",
                 replay, learned.ilc_calf, ratio, rep.learning_updates);
  return o;
}

Outcome check_a6(const ExperimentConfig& c, const GaitLibrary& lib, double k_theta, bool quiet,
                 ControlMode mode = ControlMode::kIlc) {
  constexpr int kRegStrides = 20;
  constexpr int kMeasure = 5;
  ControllerConfig ctrl = c.controller;
  ctrl.k_theta = k_theta;
  std::vector<std::future<std::pair<double, std::string>>> jobs;
  const std::vector<double> targets = {-0.3, 0.0, 0.3, 0.5};
  for (double v : targets) {
    jobs.push_back(std::async(std::launch::async, [&, v] {
      ExperimentPlan plan;
      plan.mode = mode;
      plan.desired_speed = v;
      plan.strides = kRegStrides;
      plan.enable_at = c.experiment.enable_at;
      const ExperimentRecord r = run_experiment(c.model, lib, ctrl, c.sim, plan);
      if (r.failure != FailureCause::kNone) return std::pair{std::nan(""), r.failure_detail};
      double sum = 0.0;
      for (int i = kRegStrides - kMeasure; i < kRegStrides; ++i) sum += r.log.strides[i].avg_speed;
      return std::pair{sum / kMeasure, std::string()};
    }));
  }
  Outcome o;
  o.pass = true;
  std::string cells;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto [achieved, why] = jobs[i].get();
    const bool ok = std::isfinite(achieved) && std::abs(achieved - targets[i]) <= 0.05;
    o.pass = o.pass && ok;
    cells += fmt(" %+.1f->%s", targets[i], std::isfinite(achieved) ? fmt("%+.3f", achieved).c_str() : "fell");
    if (!why.empty() && !quiet) note(fmt("v=%.1f: %s", targets[i], why.c_str()));
  }
  o.detail = fmt("%s k_theta %.2f, mean speed over strides 16-20 within 0.05:%s", name(mode), k_theta,
                 cells.c_str());
  return o;
}

// --- component properties ---------------------------------------------------

Outcome check_a5() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  const int n = 201;
  IterationBuffer b = IterationBuffer::empty(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kJointDofs; ++j) b.tau(j, i) = u(rng);
  }
  b.k = 1;
  bool same = true;
  for (const ControllerGains& g : {ControllerGains::paper(), ControllerGains::lumped()}) {
    same = same && feedforward_profile(b, g, 0.05) == b.tau;
    const std::vector<double> grid = phase_grid(n);
    for (int i = 0; i < n; ++i) same = same && feedforward_torque(b, g, grid[i], 0.05) == Vec4(b.tau.col(i));
  }
  return {same, "zero error reproduces the previous torque on all 201 grid points bit for bit"};
}

Vec6 random_q(const RobotModel& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec6 q;
  q[0] = -1.0 + 2.0 * u(rng);
  q[1] = 0.2 + 0.3 * u(rng);
  for (int j = 0; j < kJointDofs; ++j) q[kBaseDofs + j] = m.q_min[j] + (m.q_max[j] - m.q_min[j]) * u(rng);
  return q;
}

Vec6 random_qd(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec6 qd;
  for (int i = 0; i < kDofs; ++i) qd[i] = u(rng);
  return qd;
}

Outcome check_a7(const RobotModel& m) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ut(-20.0, 20.0);
  double jac_err = 0.0, kkt = 0.0, drift = 0.0, asym = 0.0, min_eig = 1e300;
  for (int t = 0; t < 200; ++t) {
    const Vec6 q = random_q(m, rng);
    for (Leg l : kAllLegs) {
      const Mat26 j = foot_jacobian(m, q, l);
      for (int i = 0; i < kDofs; ++i) {
        const double h = 1e-6;
        Vec6 qp = q, qm = q;
        qp[i] += h;
        qm[i] -= h;
        const Vec2 fd = (foot_position(m, qp, l) - foot_position(m, qm, l)) / (2.0 * h);
        jac_err = std::max(jac_err, (j.col(i) - fd).cwiseAbs().maxCoeff());
      }
    }
  }
  for (int t = 0; t < 1000; ++t) {
    const Mat6 mm = mass_matrix(m, random_q(m, rng)).matrix;
    asym = std::max(asym, (mm - mm.transpose()).cwiseAbs().maxCoeff());
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat6>(mm).eigenvalues().minCoeff());
  }
  int kkt_checked = 0;
  for (int t = 0; t < 200; ++t) {
    GeneralizedState s{random_q(m, rng), random_qd(rng, 3.0)};
    Eigen::Matrix<double, 4, kDofs> jac;
    jac << foot_jacobian(m, s.q, Leg::kFront), foot_jacobian(m, s.q, Leg::kRear);
    s.qd -= jac.completeOrthogonalDecomposition().solve(jac * s.qd);
    const ContactSet c = ContactSet::both(foot_position(m, s.q, Leg::kFront), foot_position(m, s.q, Leg::kRear));
    Vec4 tau;
    for (int j = 0; j < kJointDofs; ++j) tau[j] = ut(rng);
    StanceResult r;
    try {
      r = stance_dynamics(m, s, tau, c);
    } catch (const std::exception&) {
      continue;
    }
    ++kkt_checked;
    Vec6 rhs = -bias_forces(m, s);
    rhs.tail<kJointDofs>() += tau;
    for (Leg l : kAllLegs) {
      const ContactForce f = *r.grf.force[index(l)];
      rhs += foot_jacobian(m, s.q, l).transpose() * Vec2(f.tangential, f.normal);
    }
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    kkt = std::max(kkt, (mass_matrix(m, s.q).matrix * r.qdd - rhs).cwiseAbs().maxCoeff() / scale);
    for (Leg l : kAllLegs) {
      kkt = std::max(kkt, (foot_jacobian(m, s.q, l) * r.qdd + bias_acceleration(m, s, l)).cwiseAbs().maxCoeff());
    }
  }
  for (int t = 0; t < 10; ++t) {
    GeneralizedState s{random_q(m, rng), random_qd(rng, 1.0)};
    s.q[1] = 5.0;
    const double e0 = total_energy(m, s);
    for (int k = 0; k < 1000; ++k) s = step_physics(m, s, Vec4::Zero(), Phase::kFlight, ContactSet{}, 2e-4);
    drift = std::max(drift, std::abs(total_energy(m, s) - e0) / std::abs(e0));
  }
  Outcome o;
  o.pass = jac_err <= 1e-6 && kkt <= 1e-8 && kkt_checked > 100 && drift <= 1e-6 && asym <= 1e-12 &&
           min_eig > 0.0;
  o.detail = fmt("jacobian fd %.1e, kkt residual %.1e (%d states), flight drift %.1e, "
                 "mass asym %.1e, min eig %.2e",
                 jac_err, kkt, kkt_checked, drift, asym, min_eig);
  return o;
}

Outcome check_a8() {
  const IIRCoefficients unity = IIRCoefficients::butter3_25hz_unity();
  const int n = 4000;
  const double fs = 1000.0;
  auto tone = [&](double f) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * f * i / fs);
    return x;
  };
  const auto x = tone(5.0);
  const auto y = zero_phase_filter(unity, x);
  int best = 0;
  double best_c = -1e300;
  for (int lag = -20; lag <= 20; ++lag) {
    double c = 0.0;
    for (int i = 500; i < n - 500; ++i) c += x[i] * y[i + lag];
    if (c > best_c) {
      best_c = c;
      best = lag;
    }
  }
  auto amplitude = [&](const std::vector<double>& v) {
    double a = 0.0;
    for (int i = 1000; i < n - 1000; ++i) a = std::max(a, std::abs(v[i]));
    return a;
  };
  double worst_rel = 0.0;
  for (double f : {5.0, 20.0, 40.0}) {
    const auto xf = tone(f);
    const double single = amplitude(iir_forward(unity, xf));
    const double dbl = amplitude(zero_phase_filter(unity, xf));
    worst_rel = std::max(worst_rel, std::abs(dbl - single * single) / (single * single));
  }
  const std::vector<double> step(400, 1.0);
  const auto settled = zero_phase_filter(IIRCoefficients::paper_verbatim(), step);
  const double mid = settled[200];
  Outcome o;
  o.pass = best == 0 && worst_rel <= 0.02 && std::abs(mid - 0.64) <= 0.01;
  o.detail = fmt("lag %d, double-pass vs single-pass squared %.2f%% (<= 2%%), paper-verbatim step %.4f (0.64 +- 0.01)",
                 best, 100.0 * worst_rel, mid);
  return o;
}

Outcome check_a9(const GaitLibrary& lib) {
  double pou = 0.0, endpoint = 0.0, knot = 0.0, fit = 0.0;
  for (int n = 0; n <= 12; ++n) {
    for (int k = 0; k <= 200; ++k) {
      double sum = 0.0;
      for (int i = 0; i <= n; ++i) sum += bernstein(n, i, k / 200.0);
      pou = std::max(pou, std::abs(sum - 1.0));
    }
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int order : {3, 6, 9}) {
    std::vector<double> row(order + 1);
    for (double& c : row) c = u(rng);
    endpoint = std::max({endpoint, std::abs(bezier_eval(row, 0.0) - row.front()),
                         std::abs(bezier_eval(row, 1.0) - row.back())});
    std::vector<PhaseSample> samples;
    for (int i = 0; i <= 30; ++i) samples.push_back({i / 30.0, bezier_eval(row, i / 30.0)});
    const BezierFit f = fit_bezier(samples, order);
    for (int i = 0; i <= order; ++i) fit = std::max(fit, std::abs(f.coeffs[i] - row[i]));
  }
  for (const GaitEntry& e : lib.entries()) {
    const InterpolatedGait g = lib.interpolate(e.speed);
    knot = std::max({knot, (g.stance.coeffs - e.stance.coeffs).cwiseAbs().maxCoeff(),
                     (g.flight.coeffs - e.flight.coeffs).cwiseAbs().maxCoeff()});
  }
  Outcome o;
  o.pass = pou <= 1e-12 && endpoint == 0.0 && knot == 0.0 && fit <= 1e-9;
  o.detail = fmt("partition of unity %.1e, endpoint %.1e, knot %.1e, fit round-trip %.1e", pou, endpoint,
                 knot, fit);
  return o;
}

// --- determinism of the command-line pipeline ---------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome check_a10(const std::string& pronk) {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "pronk_acceptance_a10";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << R"({"format":"pronk-config","version":1,"gait":{"speeds":[0.2,0.3]},)"
                     << R"("sim":{"qd_noise_std":0.01},)"
                     << R"("experiment":{"strides":14,"enable_at":3,"learn_strides":14,"average_window":3}})";
  const fs::path work = root / "out";
  const std::string common = " --config \"" + cfg.string() + "\" --out \"" + work.string() + "\" --seed 42";
  const std::string o_arg = "\"" + work.string() + "/";
  const std::vector<std::string> steps = {
      "gen-gaits" + common,
      "run" + common + " --mode pd --all-speeds",
      "run" + common + " --mode ilc --all-speeds",
      "compare" + common + " " + o_arg + "strides_pd.csv\" " + o_arg + "strides_ilc.csv\"",
      "learn-library" + common,
      "plot-data" + common + " " + o_arg + "ticks_ilc_0.300.csv\"",
  };
  std::vector<std::vector<int>> codes(2);
  for (int pass = 0; pass < 2; ++pass) {
    fs::remove_all(work);
    for (const std::string& s : steps) {
      const std::string cmd = "\"" + pronk + "\" " + s + " > \"" + (root / "stdout.txt").string() + "\" 2>&1";
      const int rc = std::system(cmd.c_str());
      codes[pass].push_back(WIFEXITED(rc) ? WEXITSTATUS(rc) : -1);
    }
    fs::rename(work, root / (pass == 0 ? "a" : "b"));
  }
  int files = 0;
  std::string differing;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path other = root / "b" / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
      differing += " " + entry.path().filename().string();
    }
  }
  const auto count_b = std::distance(fs::directory_iterator(root / "b"), fs::directory_iterator{});
  const bool ran = std::all_of(codes[0].begin(), codes[0].begin() + 4, [](int c) { return c == 0; });
  std::string rc;
  for (int c : codes[0]) rc += std::to_string(c);
  o.pass = ran && codes[0] == codes[1] && files >= 8 && files == count_b && differing.empty();
  o.detail = fmt("%d files compared across two runs, exit codes %s, differing:%s", files, rc.c_str(),
                 differing.empty() ? " none" : differing.c_str());
  fs::remove_all(root);
  return o;
}

void paper_preset_notes(const ExperimentConfig& base, const GaitLibrary& lib) {
  ExperimentConfig c = base;
  c.controller.filter = "paper-verbatim";
  const auto sweep = run_sweep(c, lib);
  const SpeedResult& r = at_speed(sweep, 0.3);
  note("paper-verbatim filter preset, same gains (informational, not scored):");
  note(fmt("  A1 v=0.3 calf PD %.4f ILC %.4f ratio %.3f", r.pd_calf, r.ilc_calf, r.ilc_calf / r.pd_calf));
  note("  A2 " + check_a2(sweep).detail);
  note("  A3 " + check_a3(sweep).detail);
  note("  A4 " + check_a4(c, lib, r).detail);
  note("  A6 " + check_a6(c, lib, c.controller.k_theta, true).detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: pronk_acceptance <path-to-pronk>\n";
    return 2;
  }
  const ExperimentConfig c;
  c.validate();
  const GaitLibrary lib = generate_gait_library(c.model, c.gait.speeds, c.gait.apex_height,
                                                c.gait.stride_time, c.gait.duty, c.gait.options);
  std::cout << "filter preset " << c.controller.filter << ", " << kStrides << " strides, ILC from stride "
            << c.experiment.enable_at << ", steady window " << c.experiment.steady_window << std::endl;

  report("A1", check_a1(c, lib));
  const auto sweep = run_sweep(c, lib);
  report("A2", check_a2(sweep));
  report("A3", check_a3(sweep));
  report("A4", check_a4(c, lib, at_speed(sweep, 0.3)));
  report("A5", check_a5());
  report("A6", check_a6(c, lib, c.controller.k_theta, false));
  for (double k : {0.0, 0.1}) note("A6 sweep: " + check_a6(c, lib, k, true).detail);
  note("A6 without learning: " + check_a6(c, lib, c.controller.k_theta, true, ControlMode::kPd).detail);
  report("A7", check_a7(c.model));
  report("A8", check_a8());
  report("A9", check_a9(lib));
  report("A10", check_a10(argv[1]));
  paper_preset_notes(c, lib);

  std::cout << (g_failures == 0 ? "all criteria pass" : fmt("%d criteria fail", g_failures)) << std::endl;
  return g_failures == 0 ? 0 : 1;
}
