#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "bacache/baselines.hpp"
#include "bacache/delay_model.hpp"
#include "bacache/detail/parallel.hpp"
#include "bacache/replica_vector.hpp"
#include "bacache/scenario.hpp"

namespace bacache {

enum class InitRule { uniform, popularity, mpc, lcd };
enum class StepRule { constant, diminishing };

struct SolverConfig {
  double step_size = 1.0;
  StepRule step_rule = StepRule::constant;
  double prox_weight = 1e-2;
  double smoothing_a = 0.1;
  double domain_floor = 1e-2;
  double tol = 1e-4;
  int max_iters = 500;
  InitRule init = InitRule::popularity;
  double subproblem_tol = 1e-8;
  unsigned threads = 1;

  void validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCategory::config, "solver: " + m); };
    if (!(step_size > 0.0 && step_size <= 1.0)) fail("step_size must lie in (0, 1]");
    if (!(prox_weight > 0.0)) fail("prox_weight must be > 0");
    if (!(smoothing_a > 0.0 && smoothing_a < 1.0)) fail("smoothing_a must lie in (0, 1)");
    if (!(domain_floor > 0.0)) fail("domain_floor must be > 0");
    if (!(tol > 0.0)) fail("tol must be > 0");
    if (max_iters < 1) fail("max_iters must be >= 1");
    if (!(subproblem_tol > 0.0)) fail("subproblem_tol must be > 0");
  }
};

struct TraceEntry {
  double objective = 0.0;  // smooth f at the iterate
  double step_norm = 0.0;
};

struct SolverReport {
  std::vector<double> relaxed;
  ReplicaVector rounded;
  std::vector<TraceEntry> trace;  // trace[0] is the starting point
  int iterations = 0;
  bool hit_max_iters = false;
  double exact_objective = 0.0;
  double effective_floor = 0.0;
};

struct SubproblemResult {
  std::vector<double> x;
  double multiplier = 0.0;
  double stationarity_residual = 0.0;  // max projected-gradient residual
  double budget_violation = 0.0;       // max(0, sum x - budget)
  double complementarity = 0.0;        // multiplier * (budget - sum x)
  int outer_iterations = 0;
};

namespace detail {

/// One coordinate of the proximal subproblem:
///   phi(x) = w (D(x) + P a^x) + c x + rho (x - t)^2
struct CoordinateProblem {
  double weight;
  double anchor;
  double linear;   // gradient of the concave part at the anchor
  double penalty;  // D(K) + delta
  double rho;

  double slope(const DelayModel& m, double x) const {
    return weight * (m.delay_slope(x) + penalty * std::exp(x * m.log_a()) * m.log_a()) + linear +
           2.0 * rho * (x - anchor);
  }
  double curvature(const DelayModel& m, double x) const {
    return weight * (m.delay_curvature(x) + penalty * std::exp(x * m.log_a()) * m.log_a() * m.log_a()) + 2.0 * rho;
  }

  /// argmin over [lo, hi] of phi(x) + lambda x, by Newton steps kept inside
  /// a sign bracket of the derivative.
  double minimize(const DelayModel& m, double lambda, double lo, double hi) const {
    if (slope(m, lo) + lambda >= 0.0) return lo;
    if (slope(m, hi) + lambda <= 0.0) return hi;
    double a = lo, b = hi;
    double x = std::clamp(anchor, lo, hi);
    for (int it = 0; it < 200; ++it) {
      const double g = slope(m, x) + lambda;
      if (g == 0.0) return x;
      (g < 0.0 ? a : b) = x;
      double next = x - g / curvature(m, x);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x)) || b - a <= 1e-15 * std::max(1.0, std::abs(b)))
        return next;
      x = next;
    }
    return x;
  }
};

/// Runs of consecutive coordinates sharing weight and anchor have identical
/// subproblems; segments of one file usually form such a run.
struct Run {
  std::size_t begin, end;
  CoordinateProblem problem;
};

inline std::vector<Run> build_runs(std::span<const double> anchor, std::span<const double> grad,
                                   std::span<const double> weight, double penalty, double rho) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < anchor.size();) {
    std::size_t j = i + 1;
    while (j < anchor.size() && anchor[j] == anchor[i] && weight[j] == weight[i]) ++j;
    runs.push_back({i, j, {weight[i], anchor[i], grad[i], penalty, rho}});
    i = j;
  }
  return runs;
}

inline double projected_residual(double g, double x, double lo, double hi) {
  if (x <= lo) return std::max(0.0, -g);
  if (x >= hi) return std::max(0.0, g);
  return std::abs(g);
}

/// Euclidean projection onto {lo <= x <= hi, sum x <= budget}.
inline std::vector<double> project_feasible(std::span<const double> y, double lo, double hi, double budget) {
  auto shifted = [&](double mu, std::vector<double>& out) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      out[i] = std::clamp(y[i] - mu, lo, hi);
      total += out[i];
    }
    return total;
  };
  std::vector<double> x(y.size());
  if (shifted(0.0, x) <= budget) return x;
  double a = 0.0, b = 1.0;
  while (shifted(b, x) > budget) b *= 2.0;
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double mid = 0.5 * (a + b);
    (shifted(mid, x) > budget ? a : b) = mid;
  }
  shifted(b, x);
  return x;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

}  // namespace detail

/**
 * Minimizes the convex surrogate anchored at `anchor` over the box
 * [floor, K] intersected with the aggregate budget.
 *
 * The only coupling is the budget row, so we dualize it: for a fixed
 * multiplier each coordinate is an independent strictly convex 1-D problem,
 * and the total allocation is non-increasing in the multiplier. Outer
 * bisection brackets the multiplier; the returned point is taken from the
 * feasible end of the bracket.
 */
inline SubproblemResult solve_subproblem(std::span<const double> anchor, const SolverConfig& config,
                                         const Scenario& scenario, const DelayModel& model) {
  detail::check_relaxed(anchor, scenario, model, "solve_subproblem");
  const double lo = model.domain_floor();
  const double hi = scenario.num_bs;
  const double budget = static_cast<double>(scenario.budget());
  const std::size_t n = anchor.size();
  if (lo * static_cast<double>(n) > budget)
    throw Error(ErrorCategory::domain, "solve_subproblem: domain floor leaves no room under the budget");

  const auto grad = grad_concave_part(anchor, scenario, model);
  const auto runs = detail::build_runs(anchor, grad, model.segment_weight(),
                                       model.base_delay_full() + scenario.backhaul_delay, config.prox_weight);

  std::vector<double> run_x(runs.size());
  auto allocate = [&](double lambda, std::vector<double>& x) {
    detail::parallel_for(runs.size(), config.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t r = b; r < e; ++r) run_x[r] = runs[r].problem.minimize(model, lambda, lo, hi);
    });
    double total = 0.0;
    for (std::size_t r = 0; r < runs.size(); ++r)
      for (std::size_t i = runs[r].begin; i < runs[r].end; ++i) {
        x[i] = run_x[r];
        total += x[i];
      }
    return total;
  };

  SubproblemResult out;
  out.x.assign(n, 0.0);
  double lambda = 0.0;
  double used = allocate(0.0, out.x);
  if (used > budget) {
    constexpr int max_outer = 200;
    constexpr double complementarity_target = 1e-9;
    std::vector<double> trial(n);
    double a = 0.0, b = 1.0;
    int it = 0;
    for (; (used = allocate(b, out.x)) > budget; ++it) {
      if (it >= max_outer)
        throw Error(ErrorCategory::numerical, "solve_subproblem: could not bracket the budget multiplier");
      a = b;
      b *= 2.0;
    }
    bool converged = false;
    for (; it < max_outer; ++it) {
      const bool narrow = b - a <= config.subproblem_tol * std::max(1.0, b);
      if ((narrow && b * (budget - used) <= complementarity_target) ||
          b - a <= 4.0 * std::numeric_limits<double>::epsilon() * b) {
        converged = true;
        break;
      }
      const double mid = 0.5 * (a + b);
      const double s = allocate(mid, trial);
      if (s > budget) {
        a = mid;
      } else {
        b = mid;
        used = s;
        out.x.swap(trial);
      }
    }
    if (!converged)
      throw Error(ErrorCategory::numerical, "solve_subproblem: multiplier bisection did not converge in " +
                                                std::to_string(max_outer) + " iterations");
    lambda = b;
    out.outer_iterations = it;
  }

  out.multiplier = lambda;
  out.budget_violation = std::max(0.0, used - budget);
  out.complementarity = lambda * (budget - used);
  for (const auto& run : runs) {
    const double x = out.x[run.begin];
    const double g = run.problem.slope(model, x) + lambda;
    out.stationarity_residual = std::max(out.stationarity_residual, detail::projected_residual(g, x, lo, hi));
  }
  return out;
}

/// Delay of a segment held by k BSs, k = 0..K, with the backhaul branch at 0.
inline std::vector<double> replica_value_table(const Scenario& s, const DelayModel& model) {
  std::vector<double> v(static_cast<std::size_t>(s.num_bs) + 1);
  for (int k = 0; k <= s.num_bs; ++k) v[static_cast<std::size_t>(k)] = segment_delay_with_backhaul(k, s, model);
  return v;
}

/**
 * Maps a relaxed point to an integer replica vector.
 *
 * 1. Floor every coordinate (entries within 1e-9 of an integer snap to it).
 * 2. Spend the leftover budget greedily: repeatedly take the unit increment
 *    with the largest decrease of the exact objective.
 * 3. Local repair of the zero branch, which unit steps cannot see because
 *    the per-segment delay is non-convex between 0 and 1 replicas: release
 *    any segment whose cached delay is worse than the backhaul branch, and
 *    let an uncached segment jump straight to its best replica count when
 *    that fits the remaining budget. Steps 2-3 repeat until nothing changes.
 *
 * Every accepted move strictly lowers the exact objective, so the result is
 * never worse than the floored vector.
 */
inline ReplicaVector round_solution(std::span<const double> relaxed, const Scenario& scenario,
                                   const DelayModel& model) {
  if (relaxed.size() != scenario.num_segments())
    throw Error(ErrorCategory::domain, "round_solution: wrong dimension");
  const int K = scenario.num_bs;
  const auto w = model.segment_weight();
  const auto value = replica_value_table(scenario, model);
  const std::size_t n = relaxed.size();

  ReplicaVector x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = std::clamp(static_cast<int>(std::floor(relaxed[i] + 1e-9)), 0, K);
  long long left = scenario.budget() - x.total();
  if (left < 0) throw Error(ErrorCategory::infeasible, "round_solution: relaxed point exceeds the budget");

  auto gain = [&](std::size_t i, int from, int to) {
    return w[i] * (value[static_cast<std::size_t>(from)] - value[static_cast<std::size_t>(to)]);
  };

  auto greedy_increments = [&] {
    using Item = std::pair<double, std::size_t>;
    auto worse = [](const Item& p, const Item& q) { return p.first < q.first || (p.first == q.first && p.second > q.second); };
    std::priority_queue<Item, std::vector<Item>, decltype(worse)> heap(worse);
    for (std::size_t i = 0; i < n; ++i)
      if (x[i] < K)
        if (const double g = gain(i, x[i], x[i] + 1); g > 0.0) heap.push({g, i});
    bool changed = false;
    while (left > 0 && !heap.empty()) {
      const auto [g, i] = heap.top();
      heap.pop();
      ++x[i];
      --left;
      changed = true;
      if (x[i] < K)
        if (const double next = gain(i, x[i], x[i] + 1); next > 0.0) heap.push({next, i});
    }
    return changed;
  };

  auto repair_zero_branch = [&] {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i)
      if (x[i] > 0 && gain(i, x[i], 0) > 0.0) {
        left += x[i];
        x[i] = 0;
        changed = true;
      }
    // Best jump out of zero per unit of budget, most valuable first.
    struct Jump {
      double ratio;
      std::size_t index;
      int to;
    };
    std::vector<Jump> jumps;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] != 0) continue;
      Jump best{0.0, i, 0};
      for (int k = 1; k <= K && k <= left; ++k)
        if (const double r = gain(i, 0, k) / k; r > best.ratio) best = {r, i, k};
      if (best.to > 0) jumps.push_back(best);
    }
    std::stable_sort(jumps.begin(), jumps.end(), [](const Jump& p, const Jump& q) { return p.ratio > q.ratio; });
    for (const auto& j : jumps)
      if (j.to <= left) {
        x[j.index] = j.to;
        left -= j.to;
        changed = true;
      }
    return changed;
  };

  greedy_increments();
  for (int round = 0; round < 64 && repair_zero_branch(); ++round) greedy_increments();
  return x;
}

namespace detail {

inline std::vector<double> initial_point(const Scenario& s, const SolverConfig& config, const DelayModel& model) {
  const std::size_t n = s.num_segments();
  const double K = s.num_bs;
  const double budget = static_cast<double>(s.budget());
  std::vector<double> raw(n);
  switch (config.init) {
    case InitRule::uniform:
      std::fill(raw.begin(), raw.end(), std::min(K, budget / static_cast<double>(n)));
      break;
    case InitRule::popularity: {
      const auto w = model.segment_weight();
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) raw[i] = std::min(K, budget * w[i] / total);
      break;
    }
    case InitRule::mpc:
    case InitRule::lcd: {
      const auto base = config.init == InitRule::mpc ? mpc_placement(s) : lcd_placement(s);
      for (std::size_t i = 0; i < n; ++i) raw[i] = base[i];
      break;
    }
  }
  return project_feasible(raw, model.domain_floor(), K, budget);
}

}  // namespace detail

/**
 * Successive convex approximation on the smoothed relaxation, followed by
 * rounding. Each iteration solves the proximal subproblem at the current
 * point and moves toward its minimizer with step eta (eta = 1 jumps there).
 *
 * If the configured floor does not fit under the budget (K·C̄ < F·L·floor)
 * the floor is lowered to half the per-segment share; with C̄ = 0 the only
 * feasible vector is zero and it is returned without iterating.
 */
inline SolverReport sca_solve(const Scenario& scenario, const SolverConfig& config) {
  scenario.validate();
  config.validate();
  const std::size_t n = scenario.num_segments();
  const double budget = static_cast<double>(scenario.budget());
  DelayModel model(scenario, config.smoothing_a, config.domain_floor);

  SolverReport report;
  if (scenario.budget() == 0) {
    report.relaxed.assign(n, 0.0);
    report.rounded = ReplicaVector(n);
    report.exact_objective = exact_objective(report.rounded, scenario, model);
    return report;
  }
  const double floor = std::min(config.domain_floor, 0.5 * budget / static_cast<double>(n));
  model = model.with_floor(floor);
  report.effective_floor = floor;

  std::vector<double> x = detail::initial_point(scenario, config, model);
  report.trace.push_back({smooth_objective(x, scenario, model).total, 0.0});

  std::vector<double> next(n);
  for (int t = 0; t < config.max_iters; ++t) {
    const auto sub = solve_subproblem(x, config, scenario, model);
    const double eta = config.step_rule == StepRule::constant ? config.step_size
                                                              : config.step_size / (1.0 + t / 50.0);
    if (eta == 1.0) {
      next = sub.x;
    } else {
      for (std::size_t i = 0; i < n; ++i) next[i] = std::clamp(x[i] + eta * (sub.x[i] - x[i]), floor, static_cast<double>(scenario.num_bs));
    }
    double step = 0.0;
    for (std::size_t i = 0; i < n; ++i) step += (next[i] - x[i]) * (next[i] - x[i]);
    step = std::sqrt(step);
    const double scale = detail::norm2(x);
    x.swap(next);
    report.iterations = t + 1;
    report.trace.push_back({smooth_objective(x, scenario, model).total, step});
    if (step < 1e-12 || step < config.tol * scale) break;
    if (t + 1 == config.max_iters) report.hit_max_iters = true;
  }

  report.relaxed = x;
  report.rounded = round_solution(x, scenario, model);
  report.exact_objective = exact_objective(report.rounded, scenario, model);
  return report;
}

}  // namespace bacache
