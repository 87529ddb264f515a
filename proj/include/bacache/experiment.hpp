#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bacache/arq_simulator.hpp"
#include "bacache/baselines.hpp"
#include "bacache/config.hpp"
#include "bacache/placement.hpp"
#include "bacache/solver.hpp"

namespace bacache {

struct SweepRow {
  double delta = 0.0;
  Strategy strategy = Strategy::sca;
  bool refused = false;
  std::string refusal;
  ReplicaVector replicas;
  double objective = 0.0;
  std::optional<SimEstimate> simulated;
  long long budget_used = 0;
  int iterations = 0;
};

struct ResultTable {
  std::vector<SweepRow> rows;
};

/// Replica vector chosen by one strategy; `iterations` is filled for SCA only.
inline ReplicaVector run_strategy(Strategy strategy, const Scenario& s, const SolverConfig& solver,
                                  double exhaustive_cap, int* iterations = nullptr, unsigned threads = 1) {
  switch (strategy) {
    case Strategy::sca: {
      auto report = sca_solve(s, solver);
      if (iterations) *iterations = report.iterations;
      return report.rounded;
    }
    case Strategy::mpc: return mpc_placement(s);
    case Strategy::mpc_paper_formula: return mpc_paper_formula_placement(s);
    case Strategy::lcd: return lcd_placement(s);
    case Strategy::exhaustive: {
      const DelayModel model(s, solver.smoothing_a, solver.domain_floor);
      return exhaustive_search(s, model, exhaustive_cap, threads).best;
    }
  }
  throw Error(ErrorCategory::config, "unhandled strategy");
}

/**
 * Every (delta, strategy) cell of the sweep, sorted by delta then strategy
 * name. Cells are independent and run on up to `threads` workers; the
 * contents do not depend on the worker count. An exhaustive cell beyond the
 * enumeration cap is reported as refused and the sweep carries on.
 */
inline ResultTable run_sweep(const ExperimentConfig& cfg, unsigned threads = 1) {
  std::vector<double> deltas = cfg.sweep.delta_values;
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
  std::vector<Strategy> strategies = cfg.sweep.strategies;
  std::sort(strategies.begin(), strategies.end(),
            [](Strategy a, Strategy b) { return strategy_name(a) < strategy_name(b); });
  strategies.erase(std::unique(strategies.begin(), strategies.end()), strategies.end());

  ResultTable table;
  for (double d : deltas)
    for (Strategy s : strategies) {
      SweepRow row;
      row.delta = d;
      row.strategy = s;
      table.rows.push_back(std::move(row));
    }

  SolverConfig solver = cfg.solver;
  solver.threads = 1;
  SimConfig sim = cfg.sim;
  sim.threads = 1;

  detail::parallel_for(table.rows.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      auto& row = table.rows[r];
      const Scenario s = cfg.make_scenario(row.delta);
      try {
        row.replicas = run_strategy(row.strategy, s, solver, cfg.sweep.exhaustive_cap, &row.iterations);
      } catch (const Error& err) {
        if (err.category() != ErrorCategory::refused) throw;
        row.refused = true;
        row.refusal = err.what();
        continue;
      }
      const DelayModel model(s, solver.smoothing_a, solver.domain_floor);
      row.objective = exact_objective(row.replicas, s, model);
      row.budget_used = row.replicas.total();
      if (sim.trials > 0) row.simulated = simulate_strategy(row.replicas, s, sim);
    }
  });
  return table;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline const char* csv_header = "delta,strategy,objective_slots,simulated_mean_slots,simulated_stderr,budget_used,iterations";

inline void write_csv(std::ostream& os, const ResultTable& table) {
  os << csv_header << '\n';
  for (const auto& r : table.rows) {
    os << format_number(r.delta) << ',' << strategy_name(r.strategy) << ',';
    if (r.refused) {
      os << "refused,,,,\n";
      continue;
    }
    os << format_number(r.objective) << ',';
    if (r.simulated) os << format_number(r.simulated->mean_delay) << ',' << format_number(r.simulated->std_error);
    else os << ',';
    os << ',' << r.budget_used << ',' << r.iterations << '\n';
  }
}

inline void emit_csv(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::io, "cannot open '" + path.string() + "' for writing");
  write_csv(out, table);
  out.flush();
  if (!out) throw Error(ErrorCategory::io, "write to '" + path.string() + "' failed");
}

inline std::string placement_file_name(const SweepRow& row) {
  return "delta_" + format_number(row.delta) + "_" + strategy_name(row.strategy) + ".txt";
}

/// One sparse placement file per non-refused cell, realized from its
/// replica vector.
inline void write_placements(const ResultTable& table, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::io, "cannot create '" + dir.string() + "': " + ec.message());
  for (const auto& row : table.rows) {
    if (row.refused) continue;
    const auto path = dir / placement_file_name(row);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::io, "cannot open '" + path.string() + "' for writing");
    write_sparse(out, realize_placement(row.replicas, cfg.make_scenario(row.delta)));
    if (!out) throw Error(ErrorCategory::io, "write to '" + path.string() + "' failed");
  }
}

}  // namespace bacache
