#include <gtest/gtest.h>

#include <cmath>

#include "layoutfuse/random.hpp"
#include "layoutfuse/error.hpp"
#include "layoutfuse/theory.hpp"
#include "gate_fixtures.hpp"

using namespace layoutfuse;

TEST(Dimension, Values) {
  EXPECT_NEAR(complementarity_dimension(3, 10, 26000), 22.158392948822, 1e-9);
  EXPECT_DOUBLE_EQ(complementarity_dimension(3, 0, 12345), 0.0);
  EXPECT_NEAR(complementarity_dimension(3, 10, 1e6), 27.631321100930, 1e-9);
}

TEST(Dimension, MonotoneInEachArgument) {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double d = rng.uniform(1, 10), l = rng.uniform(0, 50), n = rng.uniform(1, 1e6);
    const double k = complementarity_dimension(d, l, n);
    ASSERT_LE(k, complementarity_dimension(d + 0.5, l, n));
    ASSERT_LE(k, complementarity_dimension(d, l + 0.5, n));
    ASSERT_LE(k, complementarity_dimension(d, l, n + 10));
  }
}

TEST(Gap, Values) {
  const TheoryConfig cfg;
  const auto g = predicted_gap(22.17, 26000, cfg);
  EXPECT_NEAR(g.simple, 100 * std::sqrt(22.17 / 26000), 1e-12);
  EXPECT_NEAR(g.simple, 2.92, 0.01);
  EXPECT_NEAR(g.sqrt_k_over_n, 0.0292, 1e-4);
  EXPECT_NEAR(g.test3, 100 * std::sqrt(22.17 * std::log(26000 / 0.05) / 26000), 1e-12);
  EXPECT_DOUBLE_EQ(predicted_gap(0, 500, cfg).simple, 0.0);
  EXPECT_DOUBLE_EQ(predicted_gap(0, 500, cfg).test3, 0.0);
  EXPECT_LT(predicted_gap(22, 1e15, cfg).test3, 1e-3);
}

TEST(Gap, DecreasingInNIncreasingInK) {
  const TheoryConfig cfg;
  for (double n = 10; n < 1e7; n *= 1.7) {
    EXPECT_GT(predicted_gap(20, n, cfg).simple, predicted_gap(20, n * 1.1, cfg).simple);
    EXPECT_GT(predicted_gap(20, n, cfg).test3, predicted_gap(20, n * 1.1, cfg).test3);
    EXPECT_LT(predicted_gap(20, n, cfg).simple, predicted_gap(21, n, cfg).simple);
    EXPECT_LT(predicted_gap(20, n, cfg).test3, predicted_gap(21, n, cfg).test3);
  }
}

TEST(Gamma, Values) {
  EXPECT_DOUBLE_EQ(complementarity_factor(0.3, 0.3, 0.4), -0.8);
  EXPECT_NEAR(complementarity_factor(2, 1, 0.2), 0.6, 1e-15);
  EXPECT_THROW((void)complementarity_factor(0.0, 1, 0.2), Error);
}

TEST(Regime, Classification) {
  const TheoryConfig cfg;
  EXPECT_EQ(classify_regime(0.3, cfg), Regime::kBoundary);
  EXPECT_EQ(classify_regime(0.52, cfg), Regime::kInterior);
  EXPECT_EQ(classify_regime(0.04, cfg), Regime::kInterior);
  TheoryConfig main_text = cfg;
  main_text.boundary_center = 0.0;
  EXPECT_EQ(classify_regime(0.04, main_text), Regime::kBoundary);
}

TEST(Regime, BoundaryMeasure) {
  const TheoryConfig cfg;
  EXPECT_DOUBLE_EQ(boundary_measure(std::vector<double>{1.0, -1.0, 0.95}, cfg), 0.0);
  EXPECT_DOUBLE_EQ(boundary_measure(std::vector<double>{0.2, 0.3, 0.45}, cfg), 1.0);
  std::vector<double> g(41, 0.9);
  g.insert(g.end(), 9, 0.25);
  EXPECT_NEAR(boundary_measure(g, cfg), 0.18, 1e-15);
  EXPECT_THROW((void)boundary_measure(std::vector<double>{}, cfg), Error);
}

TEST(Slope, ExactPowerLaws) {
  std::vector<ConvergencePoint> half, one;
  for (double n : {500.0, 1000.0, 4000.0, 32000.0}) {
    half.push_back({n, 3.0 / std::sqrt(n)});
    one.push_back({n, 7.0 / n});
  }
  const auto h = fit_convergence_slope(half);
  EXPECT_NEAR(h.slope, -0.5, 1e-9);
  EXPECT_NEAR(h.slope_stderr, 0.0, 1e-9);
  EXPECT_NEAR(fit_convergence_slope(one).slope, -1.0, 1e-9);
}

TEST(Slope, NoisyPowerLawWithinThreeStderr) {
  Rng rng(8);
  int inside = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<ConvergencePoint> pts;
    for (double n = 500; n <= 32000; n *= 2) pts.push_back({n, 2.0 * std::pow(n, -0.5) * std::exp(0.05 * rng.normal())});
    const auto f = fit_convergence_slope(pts);
    inside += std::abs(f.slope + 0.5) <= 3 * f.slope_stderr;
  }
  EXPECT_GE(inside, 190);
}

TEST(Slope, Errors) {
  EXPECT_THROW((void)fit_convergence_slope(std::vector<ConvergencePoint>{{1, 1}, {2, 1}}), Error);
  EXPECT_THROW((void)fit_convergence_slope(std::vector<ConvergencePoint>{{1, 1}, {2, 0}, {3, 1}}), Error);
  EXPECT_THROW((void)fit_convergence_slope(std::vector<ConvergencePoint>{{5, 1}, {5, 2}, {5, 3}}), Error);
}

TEST(Diagnostics, Defaults) {
  const auto r = theory_diagnostics(26000, {});
  EXPECT_GE(r.k, 21.5);
  EXPECT_LE(r.k, 22.5);
  EXPECT_GE(r.sqrt_k_over_n, 0.028);
  EXPECT_LE(r.sqrt_k_over_n, 0.030);
}

TEST(Experiment, NoiselessTaskIsDegenerate) {
  SampleComplexityConfig cfg;
  cfg.sim = default_sim_config();
  cfg.sim.sigma_teacher = 0.0;
  cfg.sim.sigma_llm = 0.0;
  cfg.sizes = {100, 200, 300, 400};
  cfg.seeds = 1;
  cfg.test_samples = 200;
  cfg.train = fixtures::small_train_config();
  cfg.train.epochs = 2;
  const auto r = run_sample_complexity_experiment(cfg);
  EXPECT_FALSE(r.slope.has_value());
  ASSERT_FALSE(r.notes.empty());
  EXPECT_NE(r.notes.front().find("degenerate gaps"), std::string::npos);
}

TEST(Experiment, ConfigValidation) {
  SampleComplexityConfig cfg = default_sample_complexity_config();
  cfg.sizes = {500, 1000, 2000};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.sizes = {500, 1000, 2000, 2000};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.sizes = {50, 1000, 2000, 4000};
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Experiment, SmallGridIsDeterministicAndShrinks) {
  SampleComplexityConfig cfg = default_sample_complexity_config();
  cfg.sizes = {200, 400, 1600, 6400};
  cfg.seeds = 2;
  cfg.test_samples = 4000;
  cfg.train.epochs = 10;
  cfg.regime_analysis = false;
  const auto a = run_sample_complexity_experiment(cfg);
  const auto b = run_sample_complexity_experiment(cfg);
  ASSERT_EQ(a.cells.size(), 8u);
  for (std::size_t i = 0; i < a.cells.size(); ++i) EXPECT_EQ(a.cells[i].gap, b.cells[i].gap);
  ASSERT_TRUE(a.slope.has_value());
  EXPECT_LT(a.slope->slope, 0.0);
  EXPECT_GT(a.mean_gaps.front().gap, a.mean_gaps.back().gap);
}

TEST(Regimes, SummaryCountsAndSeparation) {
  SimConfig sim = default_sim_config();
  sim.noise_confidence_coupling = 0.5;
  const auto samples = sample_oracle_pairs(sim, 2000, 5);
  const auto s = analyze_regimes(zero_gate_params({4}), samples, sim.rho, {});
  EXPECT_EQ(s.boundary_count + s.interior_count, samples.size());
  EXPECT_NEAR(s.boundary_fraction, double(s.boundary_count) / samples.size(), 1e-15);
  EXPECT_TRUE(std::isfinite(s.separation_sigmas()));
}
