#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bacache {

/// Coarse failure classes. The CLI maps each one to its own exit code and
/// prints the name so scripts can dispatch on it.
enum class ErrorCategory { config, domain, infeasible, refused, io, numerical };

inline std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::infeasible: return "infeasible";
    case ErrorCategory::refused: return "refused";
    case ErrorCategory::io: return "io";
    case ErrorCategory::numerical: return "numerical";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/**
 * One problem instance: K base stations with C̄ segment slots each, a library
 * of F files cut into L equal segments, the physical-layer parameters that
 * drive the per-slot decoding probability, and the backhaul penalty paid by
 * segments nobody caches.
 *
 * avg_snr is linear. Config files carry dB; conversion happens once in the
 * config loader.
 */
struct Scenario {
  int num_bs = 1;
  int num_files = 1;
  int segments_per_file = 1;
  int cache_capacity = 0;
  double backhaul_delay = 0.0;  // slots
  double rate = 2.5;            // bits/s/Hz
  int buffer = 1;               // HARQ window m
  double avg_snr = 10.0;        // linear
  std::vector<double> popularity{1.0};

  std::size_t num_segments() const {
    return static_cast<std::size_t>(num_files) * static_cast<std::size_t>(segments_per_file);
  }
  long long budget() const { return static_cast<long long>(num_bs) * cache_capacity; }

  std::size_t segment_index(int file, int segment) const {
    return static_cast<std::size_t>(file) * segments_per_file + segment;
  }
  int file_of(std::size_t segment_index) const {
    return static_cast<int>(segment_index / static_cast<std::size_t>(segments_per_file));
  }

  /// Throws Error{domain} on the first broken invariant.
  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCategory::domain, "scenario: " + msg); };
    if (num_bs < 1) fail("num_bs must be >= 1");
    if (num_files < 1) fail("num_files must be >= 1");
    if (segments_per_file < 1) fail("segments_per_file must be >= 1");
    if (cache_capacity < 0) fail("cache_capacity must be >= 0");
    if (static_cast<std::size_t>(cache_capacity) > num_segments())
      fail("cache_capacity exceeds the number of distinct segments");
    if (!(backhaul_delay >= 0.0) || !std::isfinite(backhaul_delay)) fail("backhaul_delay must be finite and >= 0");
    if (!(rate > 0.0) || !std::isfinite(rate)) fail("rate must be finite and > 0");
    if (buffer < 1) fail("buffer must be >= 1");
    if (!(avg_snr > 0.0) || !std::isfinite(avg_snr)) fail("avg_snr must be finite and > 0");
    if (popularity.size() != static_cast<std::size_t>(num_files))
      fail("popularity has " + std::to_string(popularity.size()) + " entries, expected " +
           std::to_string(num_files));
    for (double p : popularity)
      if (!(p > 0.0)) fail("popularity entries must be > 0");
    const double total = std::accumulate(popularity.begin(), popularity.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) fail("popularity must sum to 1");
  }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace bacache
