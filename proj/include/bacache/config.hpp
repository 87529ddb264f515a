#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bacache/arq_simulator.hpp"
#include "bacache/scenario.hpp"
#include "bacache/solver.hpp"

namespace bacache {

/// P_f proportional to f^-gamma, files ranked from most popular.
inline std::vector<double> zipf_popularity(int num_files, double gamma) {
  if (num_files < 1) throw Error(ErrorCategory::domain, "zipf_popularity: num_files must be >= 1");
  if (!(gamma >= 0.0)) throw Error(ErrorCategory::domain, "zipf_popularity: gamma must be >= 0");
  std::vector<double> p(static_cast<std::size_t>(num_files));
  double total = 0.0;
  for (int f = 0; f < num_files; ++f) total += p[static_cast<std::size_t>(f)] = std::pow(f + 1.0, -gamma);
  for (double& v : p) v /= total;
  return p;
}

enum class Strategy { sca, mpc, mpc_paper_formula, lcd, exhaustive };

inline std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::sca: return "sca";
    case Strategy::mpc: return "mpc";
    case Strategy::mpc_paper_formula: return "mpc-paper-formula";
    case Strategy::lcd: return "lcd";
    case Strategy::exhaustive: return "exhaustive";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::sca, Strategy::mpc, Strategy::mpc_paper_formula, Strategy::lcd, Strategy::exhaustive})
    if (strategy_name(s) == name) return s;
  throw Error(ErrorCategory::config, "unknown strategy '" + name + "'");
}

/// Scenario block as written in the file (SNR in dB, popularity by Zipf
/// exponent or explicit list).
struct ScenarioSpec {
  int num_bs = 4;
  int num_files = 3;
  int segments_per_file = 3;
  int cache_capacity = 2;
  double backhaul_delay_slots = 0.0;
  double rate_bits = 2.5;
  int buffer_m = 1;
  double avg_snr_db = 10.0;
  std::optional<double> zipf_gamma = 0.6;
  std::optional<std::vector<double>> popularity;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

struct SweepSpec {
  std::vector<double> delta_values{0.0};
  std::vector<Strategy> strategies{Strategy::sca};
  double exhaustive_cap = 1e7;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  SolverConfig solver;
  SimConfig sim{0, 1, 1000000, 1};  // trials = 0 disables simulation
  SweepSpec sweep;

  /// The concrete instance, optionally with a different backhaul delay.
  Scenario make_scenario(std::optional<double> backhaul_delay = std::nullopt) const {
    Scenario s;
    s.num_bs = scenario.num_bs;
    s.num_files = scenario.num_files;
    s.segments_per_file = scenario.segments_per_file;
    s.cache_capacity = scenario.cache_capacity;
    s.backhaul_delay = backhaul_delay.value_or(scenario.backhaul_delay_slots);
    s.rate = scenario.rate_bits;
    s.buffer = scenario.buffer_m;
    s.avg_snr = db_to_linear(scenario.avg_snr_db);
    s.popularity = scenario.popularity ? *scenario.popularity : zipf_popularity(scenario.num_files, *scenario.zipf_gamma);
    s.validate();
    return s;
  }

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    const auto solver_eq = [](const SolverConfig& x, const SolverConfig& y) {
      return x.step_size == y.step_size && x.step_rule == y.step_rule && x.prox_weight == y.prox_weight &&
             x.smoothing_a == y.smoothing_a && x.domain_floor == y.domain_floor && x.tol == y.tol &&
             x.max_iters == y.max_iters && x.init == y.init && x.subproblem_tol == y.subproblem_tol;
    };
    return a.scenario == b.scenario && solver_eq(a.solver, b.solver) && a.sim.trials == b.sim.trials &&
           a.sim.rng_seed == b.sim.rng_seed && a.sim.max_slots_per_segment == b.sim.max_slots_per_segment &&
           a.sweep == b.sweep;
  }
};

namespace detail {

using nlohmann::json;

inline const char* init_name(InitRule r) {
  switch (r) {
    case InitRule::uniform: return "uniform";
    case InitRule::popularity: return "popularity";
    case InitRule::mpc: return "mpc";
    case InitRule::lcd: return "lcd";
  }
  return "?";
}

inline InitRule parse_init(const std::string& s) {
  for (InitRule r : {InitRule::uniform, InitRule::popularity, InitRule::mpc, InitRule::lcd})
    if (s == init_name(r)) return r;
  throw Error(ErrorCategory::config, "solver.init: unknown rule '" + s + "'");
}

class Block {
 public:
  Block(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(ErrorCategory::config, name_ + ": expected an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCategory::config, name_ + "." + key + ": " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  void mark(const char* key) { seen_.insert(key); }

  void reject_unknown() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw Error(ErrorCategory::config, name_ + ": unknown key '" + item.key() + "'");
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace detail

/// Parses the experiment file (JSON). Unknown keys anywhere are an error.
inline ExperimentConfig parse_config(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::config, std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  detail::Block top(root, "config");
  top.mark("scenario");
  if (!root.contains("scenario")) throw Error(ErrorCategory::config, "config: missing 'scenario' block");
  {
    detail::Block b(root.at("scenario"), "scenario");
    auto& s = cfg.scenario;
    b.read("num_bs", s.num_bs);
    b.read("num_files", s.num_files);
    b.read("segments_per_file", s.segments_per_file);
    b.read("cache_capacity", s.cache_capacity);
    b.read("backhaul_delay_slots", s.backhaul_delay_slots);
    b.read("rate_bits", s.rate_bits);
    b.read("buffer_m", s.buffer_m);
    b.read("avg_snr_db", s.avg_snr_db);
    const bool has_gamma = b.has("zipf_gamma"), has_list = b.has("popularity");
    if (has_gamma == has_list)
      throw Error(ErrorCategory::config, "scenario: exactly one of 'zipf_gamma' and 'popularity' is required");
    s.zipf_gamma.reset();
    if (has_gamma) {
      double g = 0.0;
      b.read("zipf_gamma", g);
      s.zipf_gamma = g;
    }
    if (has_list) {
      std::vector<double> p;
      b.read("popularity", p);
      s.popularity = std::move(p);
    }
    b.reject_unknown();
  }

  json solver_block = root.value("solver", json::object());
  top.mark("solver");
  {
    detail::Block b(solver_block, "solver");
    auto& s = cfg.solver;
    b.read("step_size", s.step_size);
    std::string rule = s.step_rule == StepRule::constant ? "constant" : "diminishing";
    b.read("step_rule", rule);
    if (rule == "constant") s.step_rule = StepRule::constant;
    else if (rule == "diminishing") s.step_rule = StepRule::diminishing;
    else throw Error(ErrorCategory::config, "solver.step_rule: unknown rule '" + rule + "'");
    b.read("prox_weight", s.prox_weight);
    b.read("smoothing_a", s.smoothing_a);
    b.read("domain_floor", s.domain_floor);
    b.read("tol", s.tol);
    b.read("max_iters", s.max_iters);
    std::string init = detail::init_name(s.init);
    b.read("init", init);
    s.init = detail::parse_init(init);
    b.read("subproblem_tol", s.subproblem_tol);
    b.reject_unknown();
    s.validate();
  }

  json sim_block = root.value("sim", json::object());
  top.mark("sim");
  {
    detail::Block b(sim_block, "sim");
    b.read("trials", cfg.sim.trials);
    b.read("seed", cfg.sim.rng_seed);
    b.read("max_slots_per_segment", cfg.sim.max_slots_per_segment);
    b.reject_unknown();
    if (cfg.sim.trials < 0) throw Error(ErrorCategory::config, "sim.trials must be >= 0");
  }

  json sweep_block = root.value("sweep", json::object());
  top.mark("sweep");
  {
    detail::Block b(sweep_block, "sweep");
    b.read("delta_values", cfg.sweep.delta_values);
    std::vector<std::string> names;
    for (Strategy s : cfg.sweep.strategies) names.push_back(strategy_name(s));
    b.read("strategies", names);
    cfg.sweep.strategies.clear();
    for (const auto& n : names) cfg.sweep.strategies.push_back(parse_strategy(n));
    b.read("exhaustive_cap", cfg.sweep.exhaustive_cap);
    b.reject_unknown();
    for (double d : cfg.sweep.delta_values)
      if (!(d >= 0.0)) throw Error(ErrorCategory::config, "sweep.delta_values must be >= 0");
  }
  top.reject_unknown();

  cfg.make_scenario();  // surfaces scenario invariant violations at load time
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  using detail::json;
  json j;
  auto& sc = j["scenario"];
  sc["num_bs"] = cfg.scenario.num_bs;
  sc["num_files"] = cfg.scenario.num_files;
  sc["segments_per_file"] = cfg.scenario.segments_per_file;
  sc["cache_capacity"] = cfg.scenario.cache_capacity;
  sc["backhaul_delay_slots"] = cfg.scenario.backhaul_delay_slots;
  sc["rate_bits"] = cfg.scenario.rate_bits;
  sc["buffer_m"] = cfg.scenario.buffer_m;
  sc["avg_snr_db"] = cfg.scenario.avg_snr_db;
  if (cfg.scenario.zipf_gamma) sc["zipf_gamma"] = *cfg.scenario.zipf_gamma;
  if (cfg.scenario.popularity) sc["popularity"] = *cfg.scenario.popularity;

  auto& so = j["solver"];
  so["step_size"] = cfg.solver.step_size;
  so["step_rule"] = cfg.solver.step_rule == StepRule::constant ? "constant" : "diminishing";
  so["prox_weight"] = cfg.solver.prox_weight;
  so["smoothing_a"] = cfg.solver.smoothing_a;
  so["domain_floor"] = cfg.solver.domain_floor;
  so["tol"] = cfg.solver.tol;
  so["max_iters"] = cfg.solver.max_iters;
  so["init"] = detail::init_name(cfg.solver.init);
  so["subproblem_tol"] = cfg.solver.subproblem_tol;

  j["sim"] = {{"trials", cfg.sim.trials}, {"seed", cfg.sim.rng_seed}, {"max_slots_per_segment", cfg.sim.max_slots_per_segment}};

  std::vector<std::string> names;
  for (Strategy s : cfg.sweep.strategies) names.push_back(strategy_name(s));
  j["sweep"] = {{"delta_values", cfg.sweep.delta_values}, {"strategies", names}, {"exhaustive_cap", cfg.sweep.exhaustive_cap}};
  return j.dump(2) + "\n";
}

}  // namespace bacache
