#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "bacache/arq_simulator.hpp"
#include "bacache/baselines.hpp"
#include "bacache/delay_model.hpp"
#include "test_support.hpp"

namespace bacache {
namespace {

using testing::reference_scenario;

// Lower bound 1 / (1 - beta_m^n) for R = 2.5, rho = 10, frozen with mpmath.
double frozen_bound(int m, int n) {
  if (m == 2 && n == 1) return 1.01685948103281529693960174804;
  if (m == 2 && n == 2) return 1.00027497038472417252800026594;
  if (m == 2 && n == 4) return 1.00000007556715501598493961206;
  if (m == 4 && n == 1) return 1.0000077587733608904267291669;
  if (m == 4 && n == 2) return 1.00000000006019762994612769846;
  if (m == 4 && n == 4) return 1.0;
  ADD_FAILURE() << "no frozen bound for m=" << m << " n=" << n;
  return 0.0;
}

std::vector<double> draw_many(int candidates, double snr, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(count);
  for (auto& x : v) x = draw_effective_snr(candidates, snr, rng);
  return v;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) / static_cast<double>(v.size()));
}

TEST(DrawEffectiveSnr, SingleLinkHasMeanSnr) {
  const auto v = draw_many(1, 10.0, 1000000, 1);
  EXPECT_NEAR(mean_of(v), 10.0, 3 * stderr_of(v));
}

TEST(DrawEffectiveSnr, BestOfTwoHasHarmonicMean) {
  // E[max of n iid Exp(mean r)] = r (1 + 1/2 + ... + 1/n).
  const auto v = draw_many(2, 10.0, 1000000, 2);
  EXPECT_NEAR(mean_of(v), 15.0, 3 * stderr_of(v));
}

TEST(DrawEffectiveSnr, BestOfFourPassesKolmogorovSmirnov) {
  auto v = draw_many(4, 10.0, 100000, 3);
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double cdf = std::pow(1.0 - std::exp(-v[i] / 10.0), 4);
    d = std::max({d, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
  }
  EXPECT_LT(d, 1.628 / std::sqrt(n));  // alpha = 0.01
}

TEST(DrawEffectiveSnr, RejectsEmptyCandidateSet) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(draw_effective_snr(0, 10.0, rng), Error);
}

TEST(SimulateSegment, GeometricDelayIsExactForSingleSlotBuffer) {
  const auto s = reference_scenario(1, 1, 8, 1, 0.0);
  const DelayModel model(s);
  SimConfig cfg;
  cfg.rng_seed = 12345;
  const auto one = simulate_segment(1, s, cfg);
  EXPECT_NEAR(one.mean_delay, testing::kD1, 3 * one.std_error);
  EXPECT_EQ(one.trials_used, 100000);
  const auto four = simulate_segment(4, s, cfg);
  EXPECT_NEAR(four.mean_delay, testing::kD4, 3 * four.std_error);
  for (int n = 1; n <= 8; ++n) {
    const auto est = simulate_segment(n, s, cfg);
    EXPECT_NEAR(est.mean_delay, segment_delay(n, model), 3 * est.std_error) << "candidates=" << n;
    EXPECT_GE(est.mean_delay, 1.0);
  }
}

TEST(SimulateSegment, AnalyticalValueIsALowerBoundForLongerBuffers) {
  SimConfig cfg;
  cfg.rng_seed = 777;
  for (int m : {2, 4}) {
    const auto s = reference_scenario(1, 1, 4, 1, 0.0, m);
    const DelayModel model(s);
    for (int n : {1, 2, 4}) {
      EXPECT_NEAR(model.delay(n), frozen_bound(m, n), 1e-12);
      const auto est = simulate_segment(n, s, cfg);
      EXPECT_GE(est.mean_delay, frozen_bound(m, n) - 3 * est.std_error) << "m=" << m << " n=" << n;
    }
  }
}

TEST(SimulateSegment, MoreCandidatesNeverSlowDownWithCommonRandomNumbers) {
  SimConfig cfg;
  cfg.trials = 20000;
  cfg.rng_seed = 5;
  for (int m : {1, 3}) {
    const auto s = reference_scenario(1, 1, 8, 1, 0.0, m);
    double previous = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 8; ++n) {
      const double mean = simulate_segment(n, s, cfg).mean_delay;
      EXPECT_LE(mean, previous) << "m=" << m << " n=" << n;
      previous = mean;
    }
  }
}

TEST(SimulateSegment, SeedDeterministicAcrossWorkerCounts) {
  const auto s = reference_scenario(1, 1, 4, 1, 0.0, 2);
  SimConfig a;
  a.trials = 30000;
  a.rng_seed = 99;
  SimConfig b = a;
  b.threads = 4;
  const auto ea = simulate_segment(3, s, a), eb = simulate_segment(3, s, b);
  EXPECT_EQ(ea.mean_delay, eb.mean_delay);
  EXPECT_EQ(ea.std_error, eb.std_error);
  SimConfig c = a;
  c.rng_seed = 100;
  EXPECT_NE(simulate_segment(3, s, c).mean_delay, ea.mean_delay);
}

TEST(SimulateSegment, AbortsWhenDecodingNeverSucceeds) {
  auto s = reference_scenario(1, 1, 1, 1, 0.0);
  s.rate = 40.0;
  s.avg_snr = 1.0;
  SimConfig cfg;
  cfg.trials = 10;
  cfg.max_slots_per_segment = 50;
  try {
    simulate_segment(1, s, cfg);
    FAIL() << "expected a diagnostic";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::numerical);
    EXPECT_NE(std::string(e.what()).find("50 slots"), std::string::npos);
  }
}

TEST(SimulateStrategy, MatchesExactObjectiveOfEnumeratedOptimum) {
  const auto s = reference_scenario(3, 3, 4, 2, 2.0);
  const DelayModel m(s);
  const auto x = exhaustive_search(s, m).best;
  SimConfig cfg;
  cfg.rng_seed = 31;
  const auto est = simulate_strategy(x, s, cfg);
  EXPECT_NEAR(est.mean_delay, exact_objective(x, s, m), 3 * est.std_error);
}

TEST(SimulateStrategy, EmptyCachesWithFreeBackhaul) {
  const auto s = reference_scenario(3, 3, 4, 2, 0.0);
  const DelayModel m(s);
  SimConfig cfg;
  cfg.rng_seed = 37;
  const auto est = simulate_strategy(ReplicaVector(9), s, cfg);
  EXPECT_NEAR(est.mean_delay, 3 * m.base_delay_full(), 3 * est.std_error);
}

TEST(SimulateStrategy, FractionalBackhaulDelayIsAddedPerUncachedSegment) {
  const auto s = reference_scenario(2, 2, 3, 1, 0.75);
  SimConfig cfg;
  cfg.trials = 1;
  // Every requested segment is uncached: the delay is 2 * 0.75 plus an integer slot count.
  const double d = simulate_strategy(ReplicaVector(4), s, cfg).mean_delay;
  EXPECT_DOUBLE_EQ(d - 1.5, std::round(d - 1.5));
}

TEST(SimulateStrategy, SingleTrialIsReproducible) {
  const auto s = reference_scenario(3, 3, 4, 2, 1.3);
  SimConfig cfg;
  cfg.trials = 1;
  cfg.rng_seed = 2718;
  const ReplicaVector x{4, 2, 1, 1, 0, 0, 0, 0, 0};
  const auto a = simulate_strategy(x, s, cfg), b = simulate_strategy(x, s, cfg);
  EXPECT_EQ(a.mean_delay, b.mean_delay);
  EXPECT_EQ(a.std_error, 0.0);
  EXPECT_EQ(a.trials_used, 1);
}

TEST(SimulateStrategy, RejectsInfeasiblePlacement) {
  const auto s = reference_scenario(3, 3, 4, 1, 1.0);
  EXPECT_THROW(simulate_strategy(ReplicaVector(9, 1), s, SimConfig{}), Error);
}

TEST(PairwiseSum, MatchesCompensatedReference) {
  std::vector<double> v(100001);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 1e-7 * static_cast<double>(i % 97);
  long double ref = 0.0L;
  for (double x : v) ref += x;
  EXPECT_NEAR(detail::pairwise_sum(v), static_cast<double>(ref), 1e-8);
}

}  // namespace
}  // namespace bacache
