#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "bacache/scenario.hpp"

namespace bacache {

/// Number of base stations holding each segment, indexed file-major:
/// entry (f, l) lives at f * L + l (zero-based).
class ReplicaVector {
 public:
  ReplicaVector() = default;
  explicit ReplicaVector(std::size_t n, int fill = 0) : counts_(n, fill) {}
  ReplicaVector(std::initializer_list<int> init) : counts_(init) {}
  explicit ReplicaVector(std::vector<int> counts) : counts_(std::move(counts)) {}

  std::size_t size() const { return counts_.size(); }
  int& operator[](std::size_t i) { return counts_[i]; }
  int operator[](std::size_t i) const { return counts_[i]; }
  auto begin() const { return counts_.begin(); }
  auto end() const { return counts_.end(); }
  auto begin() { return counts_.begin(); }
  auto end() { return counts_.end(); }
  const std::vector<int>& counts() const { return counts_; }

  long long total() const { return std::accumulate(counts_.begin(), counts_.end(), 0LL); }

  friend bool operator==(const ReplicaVector&, const ReplicaVector&) = default;
  friend auto operator<=>(const ReplicaVector&, const ReplicaVector&) = default;

  friend std::ostream& operator<<(std::ostream& os, const ReplicaVector& x) {
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    return os << ')';
  }

 private:
  std::vector<int> counts_;
};

/// Empty string when x fits the scenario's box and aggregate budget.
inline std::string replica_violation(const ReplicaVector& x, const Scenario& s) {
  if (x.size() != s.num_segments())
    return "replica vector has " + std::to_string(x.size()) + " entries, expected " +
           std::to_string(s.num_segments());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < 0 || x[i] > s.num_bs)
      return "entry " + std::to_string(i) + " = " + std::to_string(x[i]) + " outside [0, " +
             std::to_string(s.num_bs) + "]";
  if (x.total() > s.budget())
    return "replica total " + std::to_string(x.total()) + " exceeds budget " + std::to_string(s.budget());
  return {};
}

inline void require_feasible(const ReplicaVector& x, const Scenario& s) {
  if (auto v = replica_violation(x, s); !v.empty()) throw Error(ErrorCategory::infeasible, v);
}

}  // namespace bacache
