// Command-line driver: optimize / baselines / exhaustive / simulate / sweep.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bacache/baselines.hpp"
#include "bacache/config.hpp"
#include "bacache/experiment.hpp"
#include "bacache/placement.hpp"
#include "bacache/solver.hpp"

namespace {

using nlohmann::json;
using namespace bacache;

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::domain: return 3;
    case ErrorCategory::infeasible: return 4;
    case ErrorCategory::refused: return 5;
    case ErrorCategory::io: return 6;
    case ErrorCategory::numerical: return 7;
  }
  return 1;
}

struct Globals {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

ExperimentConfig load(const Globals& g) {
  auto cfg = load_config(g.config_path);
  if (g.seed) cfg.sim.rng_seed = *g.seed;
  cfg.solver.threads = g.threads;
  cfg.sim.threads = g.threads;
  return cfg;
}

void emit_json(const json& j, const Globals& g) {
  if (g.out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(g.out, std::ios::binary);
  if (!out) throw Error(ErrorCategory::io, "cannot open '" + g.out + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCategory::io, "write to '" + g.out + "' failed");
}

void write_placement_file(const std::string& path, const ReplicaVector& x, const Scenario& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::io, "cannot open '" + path + "' for writing");
  write_sparse(out, realize_placement(x, s));
  if (!out) throw Error(ErrorCategory::io, "write to '" + path + "' failed");
}

json strategy_json(const std::string& name, const ReplicaVector& x, const Scenario& s, const DelayModel& m) {
  return {{"strategy", name}, {"objective_slots", exact_objective(x, s, m)}, {"budget_used", x.total()},
          {"replicas", x.counts()}};
}

int cmd_optimize(const Globals& g, const std::string& placement_out) {
  const auto cfg = load(g);
  const Scenario s = cfg.make_scenario();
  const auto report = sca_solve(s, cfg.solver);
  json trace = json::array();
  for (const auto& t : report.trace) trace.push_back({{"objective", t.objective}, {"step_norm", t.step_norm}});
  json j = {{"strategy", "sca"},
            {"objective_slots", report.exact_objective},
            {"iterations", report.iterations},
            {"hit_max_iters", report.hit_max_iters},
            {"budget_used", report.rounded.total()},
            {"replicas", report.rounded.counts()},
            {"trace", trace}};
  emit_json(j, g);
  if (!placement_out.empty()) write_placement_file(placement_out, report.rounded, s);
  return 0;
}

int cmd_baselines(const Globals& g) {
  const auto cfg = load(g);
  const Scenario s = cfg.make_scenario();
  const DelayModel m(s, cfg.solver.smoothing_a, cfg.solver.domain_floor);
  json j = json::array({strategy_json("lcd", lcd_placement(s), s, m), strategy_json("mpc", mpc_placement(s), s, m),
                        strategy_json("mpc-paper-formula", mpc_paper_formula_placement(s), s, m)});
  emit_json(j, g);
  return 0;
}

int cmd_exhaustive(const Globals& g) {
  const auto cfg = load(g);
  const Scenario s = cfg.make_scenario();
  const DelayModel m(s, cfg.solver.smoothing_a, cfg.solver.domain_floor);
  const auto r = exhaustive_search(s, m, cfg.sweep.exhaustive_cap, g.threads);
  json j = strategy_json("exhaustive", r.best, s, m);
  j["evaluated"] = r.evaluated;
  emit_json(j, g);
  return 0;
}

int cmd_simulate(const Globals& g, const std::string& strategy, const std::string& placement_in) {
  auto cfg = load(g);
  if (cfg.sim.trials == 0) cfg.sim.trials = SimConfig{}.trials;
  const Scenario s = cfg.make_scenario();
  const DelayModel m(s, cfg.solver.smoothing_a, cfg.solver.domain_floor);
  ReplicaVector x;
  std::string label;
  if (!placement_in.empty()) {
    std::ifstream in(placement_in);
    if (!in) throw Error(ErrorCategory::io, "cannot open placement '" + placement_in + "'");
    const auto p = read_sparse(in, s);
    if (const auto v = validate(p, s); !v.empty()) throw Error(ErrorCategory::infeasible, v.front().message);
    x = replica_counts(p);
    label = placement_in;
  } else {
    x = run_strategy(parse_strategy(strategy), s, cfg.solver, cfg.sweep.exhaustive_cap, nullptr, g.threads);
    label = strategy;
  }
  const auto est = simulate_strategy(x, s, cfg.sim);
  json j = strategy_json(label, x, s, m);
  j["simulated_mean_slots"] = est.mean_delay;
  j["simulated_stderr"] = est.std_error;
  j["trials"] = est.trials_used;
  j["seed"] = cfg.sim.rng_seed;
  emit_json(j, g);
  return 0;
}

int cmd_sweep(const Globals& g, const std::string& placements_dir) {
  const auto cfg = load(g);
  const auto table = run_sweep(cfg, g.threads);
  if (g.out.empty()) {
    write_csv(std::cout, table);
  } else {
    emit_csv(table, g.out);
  }
  if (!placements_dir.empty()) write_placements(table, cfg, placements_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backhaul-aware cache placement: optimize, compare and simulate"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--config", g.config_path, "Experiment file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", g.out, "Output file (default: stdout)");
    sub->add_option("--seed", seed, "Override sim.seed");
    sub->add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  std::string placement_out, placement_in, strategy = "sca", placements_dir;
  auto* optimize = app.add_subcommand("optimize", "Run SCA + rounding at the configured backhaul delay");
  add_globals(optimize);
  optimize->add_option("--placement", placement_out, "Also write the realized placement (sparse format)");
  auto* baselines = app.add_subcommand("baselines", "Evaluate MPC, MPC (symbolic formula) and LCD");
  add_globals(baselines);
  auto* exhaustive = app.add_subcommand("exhaustive", "Enumerate all replica vectors (small instances)");
  add_globals(exhaustive);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo HARQ download delay of a strategy or placement");
  add_globals(simulate);
  simulate->add_option("--strategy", strategy, "sca, mpc, mpc-paper-formula, lcd or exhaustive");
  simulate->add_option("--placement", placement_in, "Sparse placement file to simulate instead");
  auto* sweep = app.add_subcommand("sweep", "Delta x strategy table as CSV");
  add_globals(sweep);
  sweep->add_option("--placements", placements_dir, "Directory for per-cell sparse placement dumps");

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto* sub : {optimize, baselines, exhaustive, simulate, sweep})
      if (sub->parsed() && sub->count("--seed")) g.seed = seed;
    if (optimize->parsed()) return cmd_optimize(g, placement_out);
    if (baselines->parsed()) return cmd_baselines(g);
    if (exhaustive->parsed()) return cmd_exhaustive(g);
    if (simulate->parsed()) return cmd_simulate(g, strategy, placement_in);
    if (sweep->parsed()) return cmd_sweep(g, placements_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.category()) << ": " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
