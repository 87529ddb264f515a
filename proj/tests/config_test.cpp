#include <gtest/gtest.h>

#include <string>

#include "bacache/config.hpp"
#include "test_support.hpp"

namespace bacache {
namespace {

TEST(ZipfPopularity, ThreeFilesAtPointSix) {
  const auto p = zipf_popularity(3, 0.6);
  ASSERT_EQ(p.size(), 3u);
  for (std::size_t f = 0; f < 3; ++f) EXPECT_NEAR(p[f], testing::kZipf3[f], 1e-12);
}

TEST(ZipfPopularity, FlatExponentIsUniform) {
  for (int n : {1, 2, 7, 100}) {
    const auto p = zipf_popularity(n, 0.0);
    for (double v : p) EXPECT_DOUBLE_EQ(v, 1.0 / n);
  }
}

TEST(ZipfPopularity, SingleFileGetsEverything) {
  for (double g : {0.0, 0.6, 3.0}) EXPECT_EQ(zipf_popularity(1, g), std::vector<double>{1.0});
}

TEST(ZipfPopularity, DecreasingAndNormalized) {
  const auto p = zipf_popularity(1000, 0.6);
  double sum = 0.0;
  for (std::size_t f = 0; f < p.size(); ++f) {
    sum += p[f];
    if (f > 0) {
      EXPECT_LT(p[f], p[f - 1]);
    }
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(ZipfPopularity, RejectsBadArguments) {
  EXPECT_THROW(zipf_popularity(0, 0.6), Error);
  EXPECT_THROW(zipf_popularity(3, -0.1), Error);
}

const char* kFull = R"({
  "scenario": {"num_bs": 4, "num_files": 3, "segments_per_file": 3, "cache_capacity": 2,
               "backhaul_delay_slots": 1.5, "rate_bits": 2.5, "buffer_m": 1, "avg_snr_db": 10,
               "zipf_gamma": 0.6},
  "solver": {"step_size": 0.5, "step_rule": "diminishing", "prox_weight": 0.02, "smoothing_a": 0.2,
             "domain_floor": 0.01, "tol": 1e-5, "max_iters": 300, "init": "lcd", "subproblem_tol": 1e-9},
  "sim": {"trials": 5000, "seed": 42, "max_slots_per_segment": 1000},
  "sweep": {"delta_values": [0, 1, 2.5], "strategies": ["sca", "mpc-paper-formula", "exhaustive"],
            "exhaustive_cap": 1e6}
})";

TEST(ParseConfig, ReadsEveryDocumentedKey) {
  const auto c = parse_config(kFull);
  EXPECT_EQ(c.scenario.num_bs, 4);
  EXPECT_EQ(c.scenario.backhaul_delay_slots, 1.5);
  EXPECT_EQ(c.scenario.zipf_gamma, 0.6);
  EXPECT_FALSE(c.scenario.popularity);
  EXPECT_EQ(c.solver.step_rule, StepRule::diminishing);
  EXPECT_EQ(c.solver.init, InitRule::lcd);
  EXPECT_EQ(c.solver.max_iters, 300);
  EXPECT_EQ(c.sim.trials, 5000);
  EXPECT_EQ(c.sim.rng_seed, 42u);
  EXPECT_EQ(c.sweep.delta_values, (std::vector<double>{0, 1, 2.5}));
  EXPECT_EQ(c.sweep.strategies, (std::vector<Strategy>{Strategy::sca, Strategy::mpc_paper_formula, Strategy::exhaustive}));
  EXPECT_EQ(c.sweep.exhaustive_cap, 1e6);

  const auto s = c.make_scenario();
  EXPECT_NEAR(s.avg_snr, 10.0, 1e-12);
  EXPECT_EQ(s.backhaul_delay, 1.5);
  EXPECT_EQ(c.make_scenario(3.0).backhaul_delay, 3.0);
}

TEST(ParseConfig, MinimalFileUsesDefaults) {
  const auto c = parse_config(R"({"scenario": {"zipf_gamma": 0.6}})");
  EXPECT_EQ(c.solver.step_size, 1.0);
  EXPECT_EQ(c.solver.tol, 1e-4);
  EXPECT_EQ(c.sim.trials, 0);
  EXPECT_EQ(c.sweep.strategies, std::vector<Strategy>{Strategy::sca});
}

TEST(ParseConfig, ExplicitPopularity) {
  const auto c = parse_config(R"({"scenario": {"num_files": 2, "popularity": [0.7, 0.3]}})");
  EXPECT_EQ(c.make_scenario().popularity, (std::vector<double>{0.7, 0.3}));
}

TEST(ParseConfig, RoundTripIsIdentity) {
  const auto a = parse_config(kFull);
  const auto b = parse_config(serialize_config(a));
  EXPECT_EQ(a, b);
  EXPECT_EQ(serialize_config(a), serialize_config(b));

  const auto p = parse_config(R"({"scenario": {"num_files": 3, "popularity": [0.5, 0.3, 0.2]},
                                  "sim": {"trials": 1, "seed": 18446744073709551615}})");
  EXPECT_EQ(parse_config(serialize_config(p)), p);
  EXPECT_EQ(p.sim.rng_seed, 18446744073709551615ull);
}

void expect_config_error(const std::string& text, const std::string& fragment) {
  try {
    parse_config(text);
    ADD_FAILURE() << "accepted: " << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::config) << e.what();
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, UnknownKeysAreErrors) {
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6, "num_bss": 3}})", "num_bss");
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6}, "solver": {"stepsize": 1}})", "stepsize");
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6}, "sim": {"rng_seed": 1}})", "rng_seed");
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6}, "sweep": {"deltas": [1]}})", "deltas");
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6}, "plots": {}})", "plots");
}

TEST(ParseConfig, PopularitySourceMustBeUnique) {
  expect_config_error(R"({"scenario": {"num_files": 2}})", "exactly one");
  expect_config_error(R"({"scenario": {"num_files": 2, "zipf_gamma": 0.6, "popularity": [0.5, 0.5]}})", "exactly one");
}

TEST(ParseConfig, UnknownStrategyOrRule) {
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6}, "sweep": {"strategies": ["sca", "random"]}})", "random");
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6}, "solver": {"init": "zeros"}})", "zeros");
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6}, "solver": {"step_rule": "armijo"}})", "armijo");
}

TEST(ParseConfig, TypeAndValueErrors) {
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6, "num_bs": "four"}})", "num_bs");
  expect_config_error("{not json", "JSON");
  expect_config_error(R"({"solver": {}})", "scenario");
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6}, "sweep": {"delta_values": [-1]}})", "delta_values");
  expect_config_error(R"({"scenario": {"zipf_gamma": 0.6}, "solver": {"tol": 0}})", "tol");
}

TEST(ParseConfig, ScenarioInvariantsSurfaceAtLoad) {
  try {
    parse_config(R"({"scenario": {"num_files": 2, "popularity": [0.6, 0.6]}})");
    FAIL() << "accepted an unnormalized popularity";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::domain);
  }
}

TEST(LoadConfig, MissingFileIsAnIoError) {
  try {
    load_config("/nonexistent/bacache.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::io);
  }
}

TEST(Strategy, NamesRoundTrip) {
  for (Strategy s : {Strategy::sca, Strategy::mpc, Strategy::mpc_paper_formula, Strategy::lcd, Strategy::exhaustive})
    EXPECT_EQ(parse_strategy(strategy_name(s)), s);
}

}  // namespace
}  // namespace bacache
