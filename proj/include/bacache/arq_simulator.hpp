#pragma once

// Monte Carlo model of segment download over block-fading Rayleigh channels
// with an incremental-redundancy HARQ receiver. Nothing here evaluates the
// analytical delay formulas; this file is the independent check on them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bacache/detail/parallel.hpp"
#include "bacache/replica_vector.hpp"
#include "bacache/scenario.hpp"

namespace bacache {

struct SimConfig {
  long long trials = 100000;
  std::uint64_t rng_seed = 1;
  long long max_slots_per_segment = 1000000;
  unsigned threads = 1;

  void validate() const {
    if (trials < 1) throw Error(ErrorCategory::config, "sim: trials must be >= 1");
    if (max_slots_per_segment < 1) throw Error(ErrorCategory::config, "sim: max_slots_per_segment must be >= 1");
  }
};

struct SimEstimate {
  double mean_delay = 0.0;  // slots
  double std_error = 0.0;
  long long trials_used = 0;
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/**
 * Counter-based bit source: the n-th output of the stream keyed by
 * (seed, k1, k2, ...) is a hash of the key and n, so any trial or slot can
 * be regenerated without replaying the ones before it. Satisfies
 * UniformRandomBitGenerator.
 */
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  template <class... Ids>
  static CounterRng keyed(std::uint64_t seed, Ids... ids) {
    std::uint64_t k = mix64(seed + 0x9e3779b97f4a7c15ULL);
    ((k = mix64(k ^ (static_cast<std::uint64_t>(ids) + 0x632be59bd9b4e019ULL))), ...);
    return CounterRng(k);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

namespace detail {

template <class Rng>
double uniform01(Rng& rng) {
  // 53 random mantissa bits in [0, 1).
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng>
double exponential(double mean, Rng& rng) {
  return -mean * std::log1p(-uniform01(rng));
}

/// Pairwise summation; the split points depend only on the length.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double e : v) s += e;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline SimEstimate summarize(std::span<const double> samples) {
  SimEstimate est;
  est.trials_used = static_cast<long long>(samples.size());
  const double n = static_cast<double>(samples.size());
  est.mean_delay = pairwise_sum(samples) / n;
  if (samples.size() > 1) {
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) sq[i] = (samples[i] - est.mean_delay) * (samples[i] - est.mean_delay);
    est.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return est;
}

}  // namespace detail

/// SNR seen by the user in one slot: the best of `num_candidates` independent
/// Rayleigh links, each exponentially distributed with mean avg_snr.
template <class Rng>
double draw_effective_snr(int num_candidates, double avg_snr, Rng& rng) {
  if (num_candidates < 1) throw Error(ErrorCategory::domain, "draw_effective_snr: num_candidates must be >= 1");
  double best = 0.0;
  for (int k = 0; k < num_candidates; ++k) best = std::max(best, detail::exponential(avg_snr, rng));
  return best;
}

namespace detail {

/// Slots needed to decode one segment. Slot s uses stream (seed, ids..., s);
/// candidate k's link in that slot is the k-th draw of the stream, so runs
/// with more candidates see a superset of the same links.
template <class... Ids>
long long segment_slots(int num_candidates, const Scenario& s, const SimConfig& cfg, Ids... ids) {
  const auto m = static_cast<std::size_t>(s.buffer);
  std::vector<double> window(m, 0.0);
  for (long long slot = 1; slot <= cfg.max_slots_per_segment; ++slot) {
    auto rng = CounterRng::keyed(cfg.rng_seed, ids..., slot);
    window[static_cast<std::size_t>(slot - 1) % m] = std::log2(1.0 + draw_effective_snr(num_candidates, s.avg_snr, rng));
    // Only the last m slots count; older bursts have left the buffer.
    double info = 0.0;
    for (double v : window) info += v;
    if (info >= s.rate) return slot;
  }
  throw Error(ErrorCategory::numerical,
              "simulation: segment not decoded within " + std::to_string(cfg.max_slots_per_segment) +
                  " slots (candidates=" + std::to_string(num_candidates) + ", rate=" + std::to_string(s.rate) +
                  ", snr=" + std::to_string(s.avg_snr) + "); decoding failure probability is close to 1");
}

constexpr std::uint64_t segment_stream_tag = 1;
constexpr std::uint64_t strategy_stream_tag = 2;

}  // namespace detail

/// Mean number of slots until a segment decodes, over cfg.trials downloads.
inline SimEstimate simulate_segment(int num_candidates, const Scenario& scenario, const SimConfig& cfg) {
  cfg.validate();
  if (num_candidates < 1) throw Error(ErrorCategory::domain, "simulate_segment: num_candidates must be >= 1");
  std::vector<double> samples(static_cast<std::size_t>(cfg.trials));
  detail::parallel_for(samples.size(), cfg.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t)
      samples[t] = static_cast<double>(detail::segment_slots(num_candidates, scenario, cfg, detail::segment_stream_tag, t));
  });
  return detail::summarize(samples);
}

/// File download delay under placement x: a file is drawn from the
/// popularity law, then its segments are fetched one after another.
/// Uncached segments pay the backhaul delay and are then served by all K BSs.
inline SimEstimate simulate_strategy(const ReplicaVector& x, const Scenario& scenario, const SimConfig& cfg) {
  cfg.validate();
  scenario.validate();
  require_feasible(x, scenario);
  std::vector<double> cumulative(scenario.popularity.size());
  double acc = 0.0;
  for (std::size_t f = 0; f < cumulative.size(); ++f) cumulative[f] = acc += scenario.popularity[f];

  std::vector<double> samples(static_cast<std::size_t>(cfg.trials));
  detail::parallel_for(samples.size(), cfg.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) {
      auto pick = CounterRng::keyed(cfg.rng_seed, detail::strategy_stream_tag, t, std::uint64_t{0});
      const double u = detail::uniform01(pick) * acc;
      const auto file = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin(),
                                   static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
      double delay = 0.0;
      for (int l = 0; l < scenario.segments_per_file; ++l) {
        const int held = x[scenario.segment_index(static_cast<int>(file), l)];
        const int candidates = held > 0 ? held : scenario.num_bs;
        if (held == 0) delay += scenario.backhaul_delay;
        delay += static_cast<double>(detail::segment_slots(candidates, scenario, cfg, detail::strategy_stream_tag, t,
                                                           static_cast<std::uint64_t>(l) + 1));
      }
      samples[t] = delay;
    }
  });
  return detail::summarize(samples);
}

}  // namespace bacache
