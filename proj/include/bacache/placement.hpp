#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "bacache/replica_vector.hpp"
#include "bacache/scenario.hpp"

namespace bacache {

/**
 * Binary F x L x K cache tensor; entry (f, l, k) is 1 when BS k stores
 * segment l of file f. Entries are stored as bytes so that a corrupted
 * tensor (value 2, say) can still be represented and reported by validate().
 */
class PlacementMatrix {
 public:
  PlacementMatrix() = default;
  PlacementMatrix(int num_files, int segments_per_file, int num_bs)
      : files_(num_files),
        segments_(segments_per_file),
        bs_(num_bs),
        cells_(static_cast<std::size_t>(num_files) * segments_per_file * num_bs, 0) {}
  explicit PlacementMatrix(const Scenario& s) : PlacementMatrix(s.num_files, s.segments_per_file, s.num_bs) {}

  int num_files() const { return files_; }
  int segments_per_file() const { return segments_; }
  int num_bs() const { return bs_; }

  std::uint8_t& at(int file, int segment, int bs) { return cells_[offset(file, segment, bs)]; }
  std::uint8_t at(int file, int segment, int bs) const { return cells_[offset(file, segment, bs)]; }

  int load(int bs) const {
    int n = 0;
    for (int f = 0; f < files_; ++f)
      for (int l = 0; l < segments_; ++l) n += at(f, l, bs);
    return n;
  }

  /// Same tensor with BS k moved to position perm[k].
  PlacementMatrix permuted(const std::vector<int>& perm) const {
    PlacementMatrix out(files_, segments_, bs_);
    for (int f = 0; f < files_; ++f)
      for (int l = 0; l < segments_; ++l)
        for (int k = 0; k < bs_; ++k) out.at(f, l, perm[static_cast<std::size_t>(k)]) = at(f, l, k);
    return out;
  }

  friend bool operator==(const PlacementMatrix&, const PlacementMatrix&) = default;

 private:
  std::size_t offset(int file, int segment, int bs) const {
    return (static_cast<std::size_t>(file) * segments_ + segment) * bs_ + bs;
  }

  int files_ = 0;
  int segments_ = 0;
  int bs_ = 0;
  std::vector<std::uint8_t> cells_;
};

inline ReplicaVector replica_counts(const PlacementMatrix& placement) {
  ReplicaVector x(static_cast<std::size_t>(placement.num_files()) * placement.segments_per_file());
  std::size_t i = 0;
  for (int f = 0; f < placement.num_files(); ++f)
    for (int l = 0; l < placement.segments_per_file(); ++l, ++i) {
      int n = 0;
      for (int k = 0; k < placement.num_bs(); ++k) n += placement.at(f, l, k);
      x[i] = n;
    }
  return x;
}

/**
 * Builds a concrete cache assignment whose replica counts equal x.
 *
 * Segments are handled in decreasing x_i (ties: lower index first); each goes
 * to its x_i least-loaded BSs (ties: lower BS index). Loads never differ by
 * more than one, so any x inside the box and budget fits.
 */
inline PlacementMatrix realize_placement(const ReplicaVector& x, const Scenario& scenario) {
  require_feasible(x, scenario);
  const int K = scenario.num_bs;
  const int L = scenario.segments_per_file;
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });

  PlacementMatrix out(scenario);
  std::vector<int> load(static_cast<std::size_t>(K), 0);
  std::vector<int> bs_order(static_cast<std::size_t>(K));
  for (std::size_t i : order) {
    if (x[i] == 0) break;
    std::iota(bs_order.begin(), bs_order.end(), 0);
    std::stable_sort(bs_order.begin(), bs_order.end(),
                     [&](int a, int b) { return load[static_cast<std::size_t>(a)] < load[static_cast<std::size_t>(b)]; });
    for (int j = 0; j < x[i]; ++j) {
      const int k = bs_order[static_cast<std::size_t>(j)];
      if (load[static_cast<std::size_t>(k)] >= scenario.cache_capacity)
        throw Error(ErrorCategory::numerical, "realize_placement: BS " + std::to_string(k) + " overflowed");
      out.at(static_cast<int>(i) / L, static_cast<int>(i) % L, k) = 1;
      ++load[static_cast<std::size_t>(k)];
    }
  }
  return out;
}

enum class Constraint { capacity, replica_range, binary, shape };

struct Violation {
  Constraint constraint;
  std::string message;
};

/// Capacity (per-BS load), replica range and binary-entry checks. Empty
/// result means the placement is admissible for the scenario.
inline std::vector<Violation> validate(const PlacementMatrix& p, const Scenario& s) {
  std::vector<Violation> out;
  if (p.num_files() != s.num_files || p.segments_per_file() != s.segments_per_file || p.num_bs() != s.num_bs) {
    out.push_back({Constraint::shape, "placement shape does not match scenario"});
    return out;
  }
  for (int f = 0; f < p.num_files(); ++f)
    for (int l = 0; l < p.segments_per_file(); ++l) {
      int replicas = 0;
      for (int k = 0; k < p.num_bs(); ++k) {
        const int v = p.at(f, l, k);
        replicas += v;
        if (v > 1)
          out.push_back({Constraint::binary, "entry (file " + std::to_string(f) + ", segment " + std::to_string(l) +
                                                 ", bs " + std::to_string(k) + ") = " + std::to_string(v)});
      }
      if (replicas > s.num_bs)
        out.push_back({Constraint::replica_range, "segment (" + std::to_string(f) + ", " + std::to_string(l) +
                                                      ") held " + std::to_string(replicas) + " times"});
    }
  for (int k = 0; k < p.num_bs(); ++k)
    if (const int n = p.load(k); n > s.cache_capacity)
      out.push_back({Constraint::capacity,
                     "bs " + std::to_string(k) + " stores " + std::to_string(n) + " > " + std::to_string(s.cache_capacity)});
  return out;
}

/// Sparse text form: one "bs file segment" line (1-based) per cached
/// segment, in lexicographic order.
inline void write_sparse(std::ostream& os, const PlacementMatrix& p) {
  for (int k = 0; k < p.num_bs(); ++k)
    for (int f = 0; f < p.num_files(); ++f)
      for (int l = 0; l < p.segments_per_file(); ++l)
        if (p.at(f, l, k)) os << k + 1 << ' ' << f + 1 << ' ' << l + 1 << '\n';
}

inline PlacementMatrix read_sparse(std::istream& is, const Scenario& s) {
  PlacementMatrix p(s);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    int k = 0, f = 0, l = 0;
    std::string extra;
    if (!(ls >> k >> f >> l) || (ls >> extra))
      throw Error(ErrorCategory::config, "placement line " + std::to_string(lineno) + ": expected 'bs file segment'");
    if (k < 1 || k > s.num_bs || f < 1 || f > s.num_files || l < 1 || l > s.segments_per_file)
      throw Error(ErrorCategory::config, "placement line " + std::to_string(lineno) + ": index out of range");
    p.at(f - 1, l - 1, k - 1) = 1;
  }
  return p;
}

}  // namespace bacache
