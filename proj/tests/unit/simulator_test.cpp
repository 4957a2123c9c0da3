#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "layoutfuse/error.hpp"
#include "layoutfuse/fusion.hpp"
#include "layoutfuse/simulator.hpp"
#include "oracles.hpp"

using namespace layoutfuse;

namespace {

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// x1 errors of both sources over region pairs
std::pair<std::vector<double>, std::vector<double>> paired_errors(double rho, std::size_t n) {
  SimConfig sim = default_sim_config();
  sim.rho = rho;
  std::vector<double> et, el;
  for (const auto& s : sample_oracle_pairs(sim, n, 17)) {
    et.push_back(s.sample.teacher_box.x1 - s.sample.truth_box.x1);
    el.push_back(s.sample.llm_box.x1 - s.sample.truth_box.x1);
  }
  return {et, el};
}

}  // namespace

TEST(Generate, ZeroPages) {
  SimConfig c = default_sim_config();
  c.pages = 0;
  EXPECT_TRUE(generate_pages(c).empty());
}

TEST(Generate, Deterministic) {
  SimConfig c = default_sim_config();
  c.pages = 30;
  EXPECT_EQ(simulate_dataset(c)[7].page, simulate_dataset(c)[7].page);
  const auto a = generate_pages(c);
  EXPECT_EQ(a, generate_pages(c));
  c.seed += 1;
  EXPECT_NE(a, generate_pages(c));
}

TEST(Generate, PagesAreIndependentOfPageCount) {
  SimConfig c = default_sim_config();
  c.pages = 5;
  const auto few = simulate_dataset(c);
  c.pages = 12;
  const auto many = simulate_dataset(c);
  for (std::size_t i = 0; i < few.size(); ++i) EXPECT_EQ(few[i].page, many[i].page);
}

TEST(Generate, GroundTruthDoesNotOverlapAndIsValid) {
  SimConfig c = default_sim_config();
  c.pages = 100;
  for (const auto& p : generate_pages(c)) {
    const auto& gt = *p.ground_truth;
    EXPECT_GE(gt.size(), c.regions_min);
    EXPECT_LE(gt.size(), c.regions_max);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      EXPECT_TRUE(is_valid(gt[i].box));
      for (std::size_t j = i + 1; j < gt.size(); ++j) EXPECT_DOUBLE_EQ(intersection_area(gt[i].box, gt[j].box), 0.0);
    }
  }
}

TEST(Generate, FrequenciesFollowTable) {
  SimConfig c = default_sim_config();
  c.pages = 1000;
  c.regions_min = c.regions_max = 8;
  std::map<std::string, double> counts;
  double total = 0;
  for (const auto& p : generate_pages(c))
    for (const auto& g : *p.ground_truth) counts[g.category] += 1, total += 1;
  for (const auto& [name, f] : c.category_frequencies) EXPECT_NEAR(counts[name] / total, f, 0.02) << name;
}

TEST(Generate, InfeasibleRegionCount) {
  SimConfig c = default_sim_config();
  c.grid_rows = 2;
  c.grid_cols = 2;
  c.regions_max = 5;
  EXPECT_THROW((void)generate_pages(c), ConfigError);
}

TEST(Simulate, NoiselessStreamsEqualGroundTruth) {
  SimConfig c = default_sim_config();
  c.pages = 20;
  c.sigma_teacher = c.sigma_llm = 0.0;
  c.teacher_confusion = c.llm_confusion = 0.0;
  for (const auto& sp : simulate_dataset(c)) {
    const auto& gt = *sp.page.ground_truth;
    ASSERT_EQ(sp.page.teacher.size(), gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
      EXPECT_DOUBLE_EQ(iou(sp.page.teacher[i].box, gt[i].box), 1.0);
      EXPECT_DOUBLE_EQ(iou(sp.page.llm[i].box, gt[i].box), 1.0);
      EXPECT_EQ(sp.page.teacher[i].category, gt[i].category);
      EXPECT_EQ(sp.page.llm[i].category, gt[i].category);
    }
  }
}

TEST(Simulate, RequiresGroundTruth) {
  Page p;
  p.page_id = "x";
  std::vector<Page> pages{p};
  EXPECT_THROW((void)simulate_predictions(pages, default_sim_config()), Error);
}

TEST(Simulate, ErrorCorrelationMatchesRho) {
  auto [a0, b0] = paired_errors(0.0, 100000);
  EXPECT_LT(std::abs(correlation(a0, b0)), 0.01);
  auto [a8, b8] = paired_errors(0.8, 100000);
  EXPECT_NEAR(correlation(a8, b8), 0.8, 0.02);
}

TEST(Simulate, PageLevelCorrelation) {
  SimConfig c = default_sim_config();
  c.pages = 4000;
  c.rho = 0.8;
  std::vector<double> et, el;
  for (const auto& sp : simulate_dataset(c))
    for (const auto& r : sp.regions) {
      if (!r.teacher_index || !r.llm_index) continue;
      const auto g = (*sp.page.ground_truth)[r.gt_index].box;
      et.push_back(sp.page.teacher[*r.teacher_index].box.y1 - g.y1);
      el.push_back(sp.page.llm[*r.llm_index].box.y1 - g.y1);
    }
  EXPECT_NEAR(correlation(et, el), 0.8, 0.03);
}

TEST(Simulate, ConfusionRateBounded) {
  SimConfig c = default_sim_config();
  c.pages = 3000;
  std::map<std::string, std::pair<double, double>> per;  // wrong, total
  for (const auto& sp : simulate_dataset(c))
    for (const auto& r : sp.regions) {
      const auto& g = (*sp.page.ground_truth)[r.gt_index];
      auto& e = per[g.category];
      e.second += 1;
      e.first += !r.teacher_correct;
      EXPECT_EQ(r.teacher_correct, sp.page.teacher[*r.teacher_index].category == g.category);
    }
  for (const auto& [name, e] : per) {
    const double rate = e.first / e.second;
    const double se = std::sqrt(c.teacher_confusion * (1 - c.teacher_confusion) / e.second);
    EXPECT_LE(rate, c.teacher_confusion + 3 * se) << name;
  }
}

TEST(Simulate, MissRatesDropPredictions) {
  SimConfig c = default_sim_config();
  c.pages = 400;
  c.llm_miss_rate = 0.3;
  double gt = 0, llm = 0;
  for (const auto& sp : simulate_dataset(c)) gt += sp.page.ground_truth->size(), llm += sp.page.llm.size();
  EXPECT_NEAR(llm / gt, 0.7, 0.03);
}

TEST(Simulate, CoordVarianceEmittedOnRequest) {
  SimConfig c = default_sim_config();
  c.pages = 3;
  EXPECT_FALSE(simulate_dataset(c)[0].page.teacher[0].coord_variance.has_value());
  c.emit_coord_var = true;
  const auto sp = simulate_dataset(c)[0];
  EXPECT_NEAR(*sp.page.teacher[0].coord_variance, sp.regions[0].sigma_teacher * sp.regions[0].sigma_teacher, 1e-15);
}

TEST(Logistic, MeanForErrorRate) {
  EXPECT_NEAR(logit_mean_for_error_rate(0.15, 0.0), std::log(0.85 / 0.15), 1e-9);
  Rng rng(1);
  const double mu = logit_mean_for_error_rate(0.15, 1.0);
  double wrong = 0;
  for (int i = 0; i < 200000; ++i) wrong += 1.0 - 1.0 / (1.0 + std::exp(-(mu + rng.normal())));
  EXPECT_NEAR(wrong / 200000, 0.15, 0.003);
}

TEST(MonteCarloVariance, Endpoints) {
  EXPECT_NEAR(monte_carlo_fusion_variance(0.3, 0.7, 0.2, 1.0, 100000, 1) / 0.09, 1.0, 0.02);
  EXPECT_NEAR(monte_carlo_fusion_variance(1, 1, 0, 0.5, 100000, 2), 0.5, 0.01);
  for (double a : {0.0, 0.3, 0.8}) EXPECT_NEAR(monte_carlo_fusion_variance(0.5, 0.5, 0.99, a, 100000, 3), 0.25, 0.005);
}

TEST(MonteCarloVariance, MatchesIndependentSimulation) {
  for (double a : {0.2, 0.5, 0.9}) {
    const double lib = monte_carlo_fusion_variance(0.4, 0.9, 0.3, a, 400000, 5);
    const double ref = oracle::direct_fusion_variance(0.4, 0.9, 0.3, a, 400000, 6);
    EXPECT_NEAR(lib / ref, 1.0, 0.015);
    EXPECT_NEAR(lib / linear_fusion_variance(0.4, 0.9, 0.3, a), 1.0, 0.015);
  }
}

TEST(MonteCarloVariance, GridArgminNearOptimalAlpha) {
  std::vector<double> alphas;
  for (int i = 0; i <= 100; ++i) alphas.push_back(i / 100.0);
  for (double st : {0.5, 1.0, 2.0})
    for (double sl : {0.5, 1.5})
      for (double rho : {0.0, 0.3, 0.6}) {
        const auto curve = monte_carlo_fusion_variance_curve(st, sl, rho, alphas, 100000, 7);
        const auto it = std::min_element(curve.begin(), curve.end());
        const double arg = alphas[static_cast<std::size_t>(it - curve.begin())];
        if (st == sl && rho == 0.0) EXPECT_NEAR(arg, 0.5, 0.0101);
        EXPECT_NEAR(arg, optimal_alpha(st, sl, rho), 0.0101) << st << ' ' << sl << ' ' << rho;
      }
}

TEST(SimConfig, ValidationNamesFields) {
  SimConfig c = default_sim_config();
  c.rho = 1.0;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("simulator.rho"), std::string::npos);
  }
  c = default_sim_config();
  c.category_frequencies[0].second = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = default_sim_config();
  c.sigma_llm = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
}
