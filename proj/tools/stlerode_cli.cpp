// Command line front end: bound tables, verification verdicts, simulation
// dumps, and plots for scenario files.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stlerode/report.hpp"
#include "stlerode/verify.hpp"

namespace {

constexpr int kExitVerified = 0;
constexpr int kExitFalsified = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitUnknown = 3;

struct Options {
  std::string scenario_path;
  std::string out = "out";
  std::uint64_t seed = 0;
  long trials = 0;
  long budget = 0;
};

std::filesystem::path ensure_out_dir(const std::string& out) {
  std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  return dir;
}

int cmd_bound(const Options& opt) {
  stlerode::Scenario sc = stlerode::load_scenario(opt.scenario_path);
  stlerode::PipelineResult pipe = stlerode::erosion_pipeline(sc);
  auto dir = ensure_out_dir(opt.out);
  stlerode::write_bound_csv((dir / "bounds.csv").string(), pipe.bounds);
  stlerode::write_eroded_audit((dir / "eroded_spec.json").string(), sc, pipe);
  std::cout << "scenario " << sc.name << ": horizon " << sc.horizon_steps << ", theta "
            << sc.theta << ", epsilon " << pipe.bounds.epsilon << "\n";
  std::cout << "lipschitz " << pipe.bounds.lipschitz.front() << ", sigma2 "
            << pipe.bounds.sigma2.front() << "\n";
  std::cout << "max radius tight " << pipe.bounds.tight.back() << ", worst "
            << pipe.bounds.worst.back() << "\n";
  std::cout << "wrote " << (dir / "bounds.csv").string() << " and "
            << (dir / "eroded_spec.json").string() << "\n";
  return kExitVerified;
}

int cmd_verify(const Options& opt) {
  stlerode::Scenario sc = stlerode::load_scenario(opt.scenario_path);
  stlerode::PipelineResult pipe = stlerode::erosion_pipeline(sc);
  stlerode::DeterministicCheck det = stlerode::verify_deterministic(sc, pipe);

  stlerode::FalsifyResult fals;
  if (det.verdict != stlerode::Verdict::Verified && opt.budget > 0) {
    fals = stlerode::falsify(sc, pipe.model, opt.budget, opt.seed);
  }

  auto dir = ensure_out_dir(opt.out);
  stlerode::write_bound_csv((dir / "bounds.csv").string(), pipe.bounds);
  stlerode::write_eroded_audit((dir / "eroded_spec.json").string(), sc, pipe);
  stlerode::write_verdict_report((dir / "report.txt").string(), sc, pipe, det, &fals);
  if (fals.found) {
    stlerode::write_trajectory_csv((dir / "counterexample.csv").string(),
                                   fals.witness.trajectory, stlerode::state_names(pipe.model));
  }

  for (const std::string& key : det.empty_predicates) {
    std::cerr << "warning: eroded predicate \"" << key << "\" is empty\n";
  }
  stlerode::Verdict verdict = fals.found ? stlerode::Verdict::Falsified : det.verdict;
  std::cout << "verdict: " << stlerode::verdict_name(verdict) << " (" << det.centers
            << " tubes, " << det.failed_centers << " failed)\n";
  if (!fals.found && fals.trials_run > 0) {
    std::cout << "falsification: no counterexample in " << fals.trials_run
              << " stochastic trials\n";
  }
  if (verdict == stlerode::Verdict::Verified) {
    std::cout << "satisfaction probability at least " << 1.0 - sc.delta << "\n";
  }

  if (opt.trials > 0) {
    stlerode::McResult mc =
        stlerode::monte_carlo_estimate(sc, pipe.model, opt.trials, opt.seed + 1);
    std::cout << "monte carlo: " << mc.successes << "/" << mc.trials << " satisfied, rate "
              << mc.rate << ", one-sided " << mc.confidence * 100 << "% lower bound "
              << mc.lower_bound << "\n";
  }

  std::cout << "wrote " << (dir / "report.txt").string() << "\n";
  switch (verdict) {
    case stlerode::Verdict::Verified: return kExitVerified;
    case stlerode::Verdict::Falsified: return kExitFalsified;
    case stlerode::Verdict::Unknown: return kExitUnknown;
  }
  return kExitUnknown;
}

int cmd_simulate(const Options& opt) {
  stlerode::Scenario sc = stlerode::load_scenario(opt.scenario_path);
  stlerode::SystemModel model = stlerode::build_model(sc);
  auto dir = ensure_out_dir(opt.out);
  auto names = stlerode::state_names(model);

  stlerode::Trajectory det = stlerode::simulate(model, sc.initial_set.center(), {},
                                                sc.horizon_steps, stlerode::SimMode::Det, 0);
  stlerode::write_trajectory_csv((dir / "sim_det.csv").string(), det, names);
  bool det_ok = stlerode::eval_bool(sc.formula, det, sc.predicates, 0);
  std::cout << "deterministic run from the initial set center: "
            << (det_ok ? "satisfies" : "violates") << " the formula\n";

  long runs = opt.trials > 0 ? opt.trials : 5;
  long satisfied = 0;
  for (long i = 0; i < runs; ++i) {
    stlerode::Rng rng = stlerode::Rng::stream(opt.seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd x0 = rng.uniform_box(sc.initial_set.lo, sc.initial_set.hi);
    std::vector<Eigen::VectorXd> d_seq;
    for (int t = 0; t < sc.horizon_steps; ++t) d_seq.push_back(rng.uniform_box(model.D.lo, model.D.hi));
    stlerode::Trajectory traj = stlerode::simulate(model, x0, d_seq, sc.horizon_steps,
                                                   stlerode::SimMode::Stoch, rng.next());
    if (stlerode::eval_bool(sc.formula, traj, sc.predicates, 0)) satisfied += 1;
    if (i < 20) {
      stlerode::write_trajectory_csv((dir / ("sim_stoch_" + std::to_string(i) + ".csv")).string(),
                                     traj, names);
    }
  }
  std::cout << "stochastic runs: " << satisfied << "/" << runs << " satisfied the formula\n";
  std::cout << "wrote trajectory CSVs to " << dir.string() << "\n";
  return kExitVerified;
}

int cmd_plot(const Options& opt) {
  stlerode::Scenario sc = stlerode::load_scenario(opt.scenario_path);
  stlerode::PipelineResult pipe = stlerode::erosion_pipeline(sc);

  std::vector<stlerode::Trajectory> trajectories;
  trajectories.push_back(stlerode::simulate(pipe.model, sc.initial_set.center(), {},
                                            sc.horizon_steps, stlerode::SimMode::Det, 0));
  long runs = opt.trials > 0 ? opt.trials : 3;
  for (long i = 0; i < runs; ++i) {
    stlerode::Rng rng = stlerode::Rng::stream(opt.seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd x0 = rng.uniform_box(sc.initial_set.lo, sc.initial_set.hi);
    std::vector<Eigen::VectorXd> d_seq;
    for (int t = 0; t < sc.horizon_steps; ++t) d_seq.push_back(rng.uniform_box(pipe.model.D.lo, pipe.model.D.hi));
    trajectories.push_back(stlerode::simulate(pipe.model, x0, d_seq, sc.horizon_steps,
                                              stlerode::SimMode::Stoch, rng.next()));
  }

  std::filesystem::path out(opt.out);
  if (out.extension() != ".svg") {
    std::filesystem::create_directories(out);
    out /= "plot.svg";
  } else if (out.has_parent_path()) {
    std::filesystem::create_directories(out.parent_path());
  }
  stlerode::write_plot_svg(out.string(), sc, pipe, trajectories);
  std::cout << "wrote " << out.string() << "\n";
  return kExitVerified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic signal temporal logic verification via predicate erosion"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* cmd, bool needs_out_default) {
    cmd->add_option("--scenario", opt.scenario_path, "scenario JSON file")->required();
    cmd->add_option("--out", opt.out,
                    needs_out_default ? "output directory" : "output file or directory");
    cmd->add_option("--seed", opt.seed, "random seed");
    cmd->add_option("--trials", opt.trials, "number of stochastic runs");
    cmd->add_option("--budget", opt.budget, "falsification trial budget");
  };

  CLI::App* bound = app.add_subcommand("bound", "write the per-step deviation radius table");
  add_common(bound, true);
  CLI::App* verify = app.add_subcommand("verify", "verify the scenario and report a verdict");
  add_common(verify, true);
  CLI::App* simulate = app.add_subcommand("simulate", "roll out and dump trajectories");
  add_common(simulate, true);
  CLI::App* plot = app.add_subcommand("plot", "render the position plane as SVG");
  add_common(plot, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidInput;
  }

  try {
    if (bound->parsed()) return cmd_bound(opt);
    if (verify->parsed()) return cmd_verify(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (plot->parsed()) return cmd_plot(opt);
  } catch (const stlerode::ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const stlerode::ParseError& e) {
    std::cerr << "invalid formula: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitInvalidInput;
}
