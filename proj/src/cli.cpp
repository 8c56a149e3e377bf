#include "adrc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "adrc/closed_loop.hpp"
#include "adrc/errors.hpp"
#include "adrc/scenario.hpp"
#include "adrc/sim.hpp"
#include "adrc/synthesis.hpp"

namespace adrc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kScenarioExtension = ".scenario";

json ToJson(Complex c) { return json::array({c.real(), c.imag()}); }

json ToJson(const RootSet& r) {
  json out = json::array();
  for (const Complex& c : r.roots) out.push_back(ToJson(c));
  return out;
}

json ToJson(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json ToJson(const RealPoly& p) { return json(p.coeffs()); }

json GainsJson(const AdrcGains& g) { return {{"K", ToJson(g.K)}, {"G", ToJson(g.G)}, {"b_hat", g.b_hat}}; }

std::string SplitName(const SplitPolicy& p) { return SplitKindName(p.kind); }

RootSet SortedEig(const Matrix& m) {
  RootSet r = Eig(m);
  SortByModulus(r);
  return r;
}

// Pairs each target with its nearest unused eigenvalue, in target order.
std::pair<RootSet, std::vector<double>> MatchToTargets(const RootSet& eig, const RootSet& targets) {
  std::vector<bool> used(eig.size(), false);
  RootSet matched;
  std::vector<double> residuals;
  for (const Complex& t : targets.roots) {
    std::size_t best = eig.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < eig.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(eig.roots[j] - t);
      if (d < best_d) best_d = d, best = j;
    }
    if (best == eig.size()) break;
    used[best] = true;
    matched.roots.push_back(eig.roots[best]);
    residuals.push_back(best_d);
  }
  return {matched, residuals};
}

struct Resolved {
  CanonicalForm form;
  ResolvedController controller;
};

Resolved ResolveAll(const Scenario& s) {
  if (!s.controller) throw Error(ErrorCode::kConfig, "scenario has no controller section");
  Resolved r{ResolvePlant(s.plant), {}};
  r.controller = ResolveController(*s.controller, r.form.plant);
  return r;
}

json SynthesisJson(const Scenario& s) {
  const Resolved r = ResolveAll(s);
  const CanonicalPlant& plant = r.form.plant;
  json out = GainsJson(r.controller.gains);
  out["scenario"] = s.name;
  out["rho"] = plant.rho();
  const RootSet eig = SortedEig(BuildClosedLoop(plant, r.controller.gains).A);
  if (const auto& rep = r.controller.synthesis) {
    const RootSet desired{std::get<PolesSpec>(*s.controller).poles};
    const auto [matched, residuals] = MatchToTargets(rep->closed_loop_eig, desired);
    out["q_star"] = ToJson(rep->desired_poly);
    out["q_hat_star"] = ToJson(rep->nominal_poly);
    out["split"] = SplitName(rep->split_policy_used);
    out["controller_roots"] = ToJson(rep->controller_roots);
    out["observer_roots"] = ToJson(rep->observer_roots);
    out["desired"] = ToJson(desired);
    out["eig"] = ToJson(matched);
    out["residuals"] = residuals;
    out["max_residual"] = rep->max_pole_residual;
  } else {
    out["eig"] = ToJson(eig);
  }
  out["hurwitz"] = std::all_of(eig.roots.begin(), eig.roots.end(), [](Complex c) { return c.real() < 0.0; });
  return out;
}

struct SimOutcome {
  json summary;
  int code = kExitOk;
};

fs::path OutputPath(const fs::path& out_dir, const std::string& configured, const std::string& fallback) {
  const fs::path p = configured.empty() ? fs::path(fallback) : fs::path(configured);
  return p.is_absolute() ? p : out_dir / p;
}

SimOutcome SimulateScenario(const Scenario& s, const fs::path& out_dir) {
  const Resolved r = ResolveAll(s);
  const CanonicalPlant& plant = r.form.plant;
  const AdrcGains& gains = r.controller.gains;
  const DisturbanceModel dist = ResolveDisturbance(s.disturbance);
  const SimConfig cfg = ResolveSim(s.sim, plant.rho());

  SimOutcome res;
  json& j = res.summary;
  j["scenario"] = s.name;
  j["eig"] = ToJson(SortedEig(BuildClosedLoop(plant, gains).A));
  j["gains"] = GainsJson(gains);

  Trajectory traj;
  try {
    traj = Simulate(plant, gains, dist, cfg);
  } catch (const UnstableBlowup& e) {
    j["error"] = std::string(ErrorName(ErrorCode::kUnstableBlowup));
    j["blowup_time"] = e.time();
    res.code = kExitBlowup;
    return res;
  }

  fs::create_directories(out_dir);
  const fs::path csv = OutputPath(out_dir, s.output.csv, s.name + ".csv");
  {
    std::ofstream f(csv);
    if (!f) throw Error(ErrorCode::kConfig, "cannot write " + csv.string());
    WriteTrajectoryCsv(f, traj);
  }

  const CostBreakdown c = Cost(traj, cfg.lambda);
  const TrajectoryMetrics m = Summarize(traj);
  const Eigen::Index last = traj.t.size() - 1;
  j["cost"] = {{"C", c.total}, {"C_y", c.output}, {"C_u", c.input}, {"lambda", cfg.lambda}};
  j["peak_u"] = m.peak_u;
  j["peak_u_time"] = m.peak_u_time;
  j["final_amplitude"] = m.final_amplitude;
  j["settling_time"] = std::isnan(m.settling_time) ? json(nullptr) : json(m.settling_time);
  j["u_final"] = traj.u(last);
  j["y_final"] = traj.y(last);
  j["x_final_norm"] = traj.x.row(last).norm();
  j["csv"] = csv.string();

  const fs::path summary = OutputPath(out_dir, s.output.summary, s.name + ".summary.json");
  std::ofstream f(summary);
  if (!f) throw Error(ErrorCode::kConfig, "cannot write " + summary.string());
  f << j.dump(2) << '\n';
  return res;
}

// Collects scenario files: a single path, or every *.scenario in a directory
// sorted by filename.
std::vector<fs::path> ScenarioPaths(const fs::path& p) {
  if (!fs::exists(p)) throw Error(ErrorCode::kConfig, "no such scenario path " + p.string());
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_regular_file() && e.path().extension() == kScenarioExtension) out.push_back(e.path());
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  if (out.empty()) throw Error(ErrorCode::kConfig, "no *.scenario files in " + p.string());
  return out;
}

int CodeFor(const Error& e) { return e.code() == ErrorCode::kConfig ? kExitUsage : kExitDomain; }

json ErrorJson(const Error& e) {
  return {{"error", std::string(ErrorName(e.code()))}, {"message", e.what()}};
}

struct CommonOptions {
  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool dump_config = false;
};

void AddCommon(CLI::App* cmd, CommonOptions& o, bool scenario_required) {
  auto* opt = cmd->add_option("--scenario", o.scenario, "Scenario file (or directory for simulate)");
  if (scenario_required) opt->required();
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Override the scenario seed");
  cmd->add_flag("--dump-config", o.dump_config, "Print the parsed scenario and exit");
}

Scenario LoadWithOverrides(const std::string& path, const CommonOptions& o) {
  Scenario s = LoadScenario(path);
  if (o.seed) s.sim.seed = *o.seed;
  return s;
}

int CmdSynthesize(const CommonOptions& o, std::ostream& out) {
  const Scenario s = LoadWithOverrides(o.scenario, o);
  if (o.dump_config) {
    out << DumpScenario(s);
    return kExitOk;
  }
  const json j = SynthesisJson(s);
  out << j.dump(2) << '\n';
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    std::ofstream(fs::path(o.out_dir) / (s.name + ".synthesis.json")) << j.dump(2) << '\n';
  }
  return kExitOk;
}

int CmdSimulate(const CommonOptions& o, unsigned jobs, std::ostream& out, std::ostream& err) {
  const std::vector<fs::path> paths = ScenarioPaths(o.scenario);
  const fs::path out_dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);

  if (o.dump_config) {
    for (const fs::path& p : paths) out << DumpScenario(LoadWithOverrides(p.string(), o));
    return kExitOk;
  }

  std::vector<SimOutcome> results(paths.size());
  auto run_one = [&](std::size_t i) {
    try {
      results[i] = SimulateScenario(LoadWithOverrides(paths[i].string(), o), out_dir);
    } catch (const Error& e) {
      results[i].summary = ErrorJson(e);
      results[i].summary["scenario"] = paths[i].stem().string();
      results[i].code = CodeFor(e);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(paths.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < paths.size();) run_one(i);
    }));
  }
  for (auto& f : pool) f.get();

  int code = kExitOk;
  for (const SimOutcome& r : results) {
    code = std::max(code, r.code);
    if (r.summary.contains("message")) err << r.summary["message"].get<std::string>() << '\n';
  }
  if (results.size() == 1) {
    out << results[0].summary.dump(2) << '\n';
  } else {
    json all = json::array();
    for (SimOutcome& r : results) all.push_back(std::move(r.summary));
    out << all.dump(2) << '\n';
  }
  return code;
}

int CmdVerify(std::size_t rho, std::size_t trials, std::uint64_t seed, unsigned jobs, std::ostream& out) {
  const ConjectureReport rep = VerifyConjecture(rho, trials, seed, jobs);
  json results = json::array();
  for (const ConjectureTrial& t : rep.results) {
    json r = {{"index", t.index}, {"residual", t.residual}, {"ok", t.ok}};
    if (!t.error.empty()) r["error"] = t.error;
    results.push_back(std::move(r));
  }
  const json j = {{"rho", rep.rho},         {"trials", rep.trials},     {"seed", rep.seed},
                  {"tolerance", kConjectureTol}, {"max_residual", rep.max_residual}, {"pass", rep.pass},
                  {"results", std::move(results)}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

CanonicalPlant PlantFromOptions(const CommonOptions& o, const std::vector<double>& a, double b) {
  if (!o.scenario.empty()) return ResolvePlant(LoadWithOverrides(o.scenario, o).plant).plant;
  if (a.empty()) throw Error(ErrorCode::kConfig, "need --scenario or --a");
  return ResolvePlant(CanonicalPlantSpec{a, b}).plant;
}

int CmdPidCheck(const CommonOptions& o, const std::vector<double>& a, double b, std::ostream& out) {
  if (o.dump_config) {
    out << DumpScenario(LoadWithOverrides(o.scenario, o));
    return kExitOk;
  }
  const CanonicalPlant plant = PlantFromOptions(o, a, b);
  const json j = {{"a", ToJson(plant.a)},
                  {"b", plant.b},
                  {"a3", plant.rho() == 3 ? json(plant.a(2)) : json(nullptr)},
                  {"pid_stabilizable_necessary", PidNecessaryCondition(plant)}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

SplitPolicy ParseSplitFlag(const std::string& name) {
  if (name == "slowest") return {SplitKind::kSlowestToController, {}};
  if (name == "fastest") return {SplitKind::kFastestToController, {}};
  throw Error(ErrorCode::kConfig, "--split must be slowest or fastest");
}

int CmdMatchModelBased(const CommonOptions& o, const std::string& split, std::ostream& out) {
  const Scenario s = LoadWithOverrides(o.scenario, o);
  if (o.dump_config) {
    out << DumpScenario(s);
    return kExitOk;
  }
  if (!s.model) throw Error(ErrorCode::kConfig, "scenario has no model section");
  const CanonicalPlant plant = ResolvePlant(s.plant).plant;
  const Vector k_star = Eigen::Map<const Vector>(s.model->K_star.data(), static_cast<Eigen::Index>(s.model->K_star.size()));
  const Vector g_star = Eigen::Map<const Vector>(s.model->G_star.data(), static_cast<Eigen::Index>(s.model->G_star.size()));
  const double b_hat = s.model->b_hat.value_or(DefaultBHat(plant.b));
  const AdrcGains gains = MatchModelBased(k_star, g_star, plant, b_hat, ParseSplitFlag(split));

  const RationalTF target = ModelBasedTransfer(k_star, g_star, plant);
  const RationalTF got = AdrcTransfer(gains);
  const double err = std::max(MaxRelativeCoeffError(got.num, target.num), MaxRelativeCoeffError(got.den, target.den));
  json j = GainsJson(gains);
  j["scenario"] = s.name;
  j["h_star"] = {{"num", ToJson(target.num)}, {"den", ToJson(target.den)}};
  j["h_adrc"] = {{"num", ToJson(got.num)}, {"den", ToJson(got.den)}};
  j["max_relative_error"] = err;
  j["eig"] = ToJson(SortedEig(BuildClosedLoop(plant, gains).A));
  out << j.dump(2) << '\n';
  return kExitOk;
}

int CmdCost(const CommonOptions& o, const std::string& trajectory, std::optional<double> lambda, std::ostream& out,
            std::ostream& err) {
  if (!trajectory.empty()) {
    std::ifstream in(trajectory);
    if (!in) throw Error(ErrorCode::kConfig, "cannot open " + trajectory);
    const double l = lambda.value_or(0.1);
    const CostBreakdown c = Cost(ReadTrajectoryCsv(in), l);
    out << json({{"C", c.total}, {"C_y", c.output}, {"C_u", c.input}, {"lambda", l}}).dump(2) << '\n';
    return kExitOk;
  }
  if (o.scenario.empty()) throw Error(ErrorCode::kConfig, "need --scenario or --trajectory");
  Scenario s = LoadWithOverrides(o.scenario, o);
  if (lambda) s.sim.lambda = *lambda;
  if (o.dump_config) {
    out << DumpScenario(s);
    return kExitOk;
  }
  const fs::path out_dir = o.out_dir.empty() ? fs::temp_directory_path() / ("adrc-cost-" + s.name) : fs::path(o.out_dir);
  SimOutcome r = SimulateScenario(s, out_dir);
  if (r.code != kExitOk) {
    out << r.summary.dump(2) << '\n';
    err << "simulation blew up\n";
    return r.code;
  }
  json j = r.summary["cost"];
  j["scenario"] = s.name;
  out << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear ADRC gain synthesis and simulation"};
  app.require_subcommand(1);

  CommonOptions synth_opts, sim_opts, pid_opts, match_opts, cost_opts;
  unsigned sim_jobs = 1;
  std::size_t rho = 3, trials = 200;
  std::uint64_t verify_seed = 0;
  unsigned verify_jobs = 1;
  std::vector<double> pid_a;
  double pid_b = 1.0;
  std::string split = "slowest";
  std::string trajectory;
  std::optional<double> cost_lambda;

  auto* synth = app.add_subcommand("synthesize", "Gains for a desired closed-loop spectrum");
  AddCommon(synth, synth_opts, true);

  auto* sim = app.add_subcommand("simulate", "Simulate one scenario or a directory of them");
  AddCommon(sim, sim_opts, true);
  sim->add_option("--jobs", sim_jobs, "Parallel scenario runs")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify-conjecture", "Random trials of pole assignment at order rho");
  verify->add_option("--rho", rho, "Relative degree")->check(CLI::Range(1, 8));
  verify->add_option("--trials", trials, "Number of trials");
  verify->add_option("--seed", verify_seed, "Trial seed");
  verify->add_option("--jobs", verify_jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* pid = app.add_subcommand("pid-check", "Necessary condition for PID stabilizability");
  AddCommon(pid, pid_opts, false);
  pid->add_option("--a", pid_a, "Canonical plant coefficients a_1 .. a_rho");
  pid->add_option("--b", pid_b, "Input gain");

  auto* match = app.add_subcommand("match-model-based", "ADRC gains reproducing a model-based observer");
  AddCommon(match, match_opts, true);
  match->add_option("--split", split, "slowest or fastest");

  auto* cost = app.add_subcommand("cost", "Quadratic cost of a scenario run or a trajectory CSV");
  AddCommon(cost, cost_opts, false);
  cost->add_option("--trajectory", trajectory, "Trajectory CSV");
  cost->add_option("--lambda", cost_lambda, "Input weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) return CmdSynthesize(synth_opts, out);
    if (*sim) return CmdSimulate(sim_opts, sim_jobs, out, err);
    if (*verify) return CmdVerify(rho, trials, verify_seed, verify_jobs, out);
    if (*pid) return CmdPidCheck(pid_opts, pid_a, pid_b, out);
    if (*match) return CmdMatchModelBased(match_opts, split, out);
    if (*cost) return CmdCost(cost_opts, trajectory, cost_lambda, out, err);
  } catch (const Error& e) {
    out << ErrorJson(e).dump(2) << '\n';
    err << e.what() << '\n';
    return CodeFor(e);
  } catch (const fs::filesystem_error& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"adrc"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace adrc
