#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "bacache/delay_model.hpp"
#include "bacache/detail/parallel.hpp"
#include "bacache/replica_vector.hpp"
#include "bacache/scenario.hpp"

namespace bacache {

/// Segment indices by request weight, most popular first; ties keep index order.
inline std::vector<std::size_t> segments_by_popularity(const Scenario& s) {
  std::vector<std::size_t> order(s.num_segments());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.popularity[static_cast<std::size_t>(s.file_of(a))] > s.popularity[static_cast<std::size_t>(s.file_of(b))];
  });
  return order;
}

/// Most popular content: the top C̄ segments are cached at every BS.
inline ReplicaVector mpc_placement(const Scenario& s) {
  s.validate();
  ReplicaVector x(s.num_segments());
  const auto order = segments_by_popularity(s);
  for (std::size_t j = 0; j < static_cast<std::size_t>(s.cache_capacity); ++j) x[order[j]] = s.num_bs;
  return x;
}

/// The symbolic variant x_1 = ... = x_K = C̄ (entries clamped to K).
/// Only equivalent to mpc_placement when K == C̄.
inline ReplicaVector mpc_paper_formula_placement(const Scenario& s) {
  s.validate();
  ReplicaVector x(s.num_segments());
  const auto order = segments_by_popularity(s);
  const std::size_t n = std::min(order.size(), static_cast<std::size_t>(s.num_bs));
  for (std::size_t j = 0; j < n; ++j) x[order[j]] = std::min(s.cache_capacity, s.num_bs);
  return x;
}

/// Largest content diversity: one copy each of the K·C̄ most popular segments.
inline ReplicaVector lcd_placement(const Scenario& s) {
  s.validate();
  ReplicaVector x(s.num_segments());
  const auto order = segments_by_popularity(s);
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(s.budget()), order.size());
  for (std::size_t j = 0; j < n; ++j) x[order[j]] = 1;
  return x;
}

struct ExhaustiveResult {
  ReplicaVector best;
  double objective = 0.0;
  unsigned long long evaluated = 0;
};

inline double enumeration_size(const Scenario& s) {
  return std::pow(static_cast<double>(s.num_bs) + 1.0, static_cast<double>(s.num_segments()));
}

namespace detail {

struct Enumerator {
  const std::vector<double>& weight;
  const std::vector<double>& value;  // value[k] = delay of a segment with k replicas
  int num_bs;
  long long budget;
  std::vector<int> current;
  std::vector<int> best;
  double best_value = std::numeric_limits<double>::infinity();
  unsigned long long evaluated = 0;

  void visit(std::size_t i, long long used, double partial) {
    if (i == current.size()) {
      ++evaluated;
      if (partial < best_value) {
        best_value = partial;
        best = current;
      }
      return;
    }
    const long long top = std::min<long long>(num_bs, budget - used);
    for (int k = 0; k <= top; ++k) {
      current[i] = k;
      visit(i + 1, used + k, partial + weight[i] * value[static_cast<std::size_t>(k)]);
    }
    current[i] = 0;
  }
};

}  // namespace detail

/**
 * Minimizes the exact objective over every integer replica vector inside the
 * box and budget. Enumeration is lexicographic with budget pruning, so the
 * lexicographically smallest minimizer wins ties. Work is split by the value
 * of the first coordinate; the reduction runs in that same order, so the
 * answer does not depend on `threads`.
 */
inline ExhaustiveResult exhaustive_search(const Scenario& s, const DelayModel& model, double cap = 1e7,
                                          unsigned threads = 1) {
  s.validate();
  const double size = enumeration_size(s);
  if (size > cap)
    throw Error(ErrorCategory::refused, "exhaustive_search: enumeration needs " + std::to_string(size) +
                                            " points, cap is " + std::to_string(cap));
  const std::vector<double> weight(model.segment_weight().begin(), model.segment_weight().end());
  std::vector<double> value(static_cast<std::size_t>(s.num_bs) + 1);
  for (int k = 0; k <= s.num_bs; ++k) value[static_cast<std::size_t>(k)] = segment_delay_with_backhaul(k, s, model);

  const std::size_t n = s.num_segments();
  const int lead_top = static_cast<int>(std::min<long long>(s.num_bs, s.budget()));
  std::vector<detail::Enumerator> parts;
  for (int k = 0; k <= lead_top; ++k)
    parts.push_back({weight, value, s.num_bs, s.budget(), std::vector<int>(n, 0), {}, std::numeric_limits<double>::infinity(), 0});

  bacache::detail::parallel_for(parts.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      auto& e = parts[j];
      const int k = static_cast<int>(j);
      e.current[0] = k;
      e.visit(1, k, 0.0 + weight[0] * value[static_cast<std::size_t>(k)]);
    }
  });

  ExhaustiveResult out;
  out.objective = std::numeric_limits<double>::infinity();
  for (auto& e : parts) {
    out.evaluated += e.evaluated;
    if (e.best_value < out.objective) {
      out.objective = e.best_value;
      out.best = ReplicaVector(e.best);
    }
  }
  return out;
}

}  // namespace bacache
