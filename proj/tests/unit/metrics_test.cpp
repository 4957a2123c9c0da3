#include <gtest/gtest.h>

#include <cmath>

#include "layoutfuse/error.hpp"
#include "layoutfuse/metrics.hpp"
#include "layoutfuse/random.hpp"
#include "layoutfuse/stats.hpp"
#include "oracles.hpp"

using namespace layoutfuse;

namespace {

std::vector<EvalImage> random_images(Rng& rng, std::size_t count) {
  static const std::vector<std::string> cats{"text", "table", "caption"};
  std::vector<EvalImage> images(count);
  for (auto& im : images) {
    const std::size_t n = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) {
      GroundTruthAnnotation g{oracle::random_box(rng, 0.05), cats[rng.below(cats.size())]};
      im.ground_truth.push_back(g);
      if (rng.bernoulli(0.8)) {
        const double j = rng.uniform(0, 0.05);
        BoundingBox b{g.box.x1 + rng.uniform(0, j), g.box.y1 + rng.uniform(0, j), g.box.x2 - rng.uniform(0, j),
                      g.box.y2 - rng.uniform(0, j)};
        if (!is_valid(b)) b = g.box;
        im.predictions.push_back({b, rng.bernoulli(0.85) ? g.category : cats[rng.below(cats.size())], rng.uniform()});
      }
    }
    for (std::size_t i = rng.below(3); i > 0; --i)
      im.predictions.push_back({oracle::random_box(rng, 0.05), cats[rng.below(cats.size())], rng.uniform()});
  }
  return images;
}

}  // namespace

TEST(Ap, PerfectPrediction) {
  std::vector<EvalImage> im(1);
  im[0].ground_truth.push_back({{.1, .1, .4, .4}, "text"});
  im[0].predictions.push_back({{.1, .1, .4, .4}, "text", 0.9});
  const auto r = average_precision(im);
  EXPECT_DOUBLE_EQ(r.ap, 1.0);
  EXPECT_DOUBLE_EQ(r.ap50, 1.0);
  EXPECT_DOUBLE_EQ(r.ap75, 1.0);
}

TEST(Ap, NoPredictions) {
  std::vector<EvalImage> im(1);
  im[0].ground_truth.push_back({{.1, .1, .4, .4}, "text"});
  EXPECT_DOUBLE_EQ(average_precision(im).ap, 0.0);
}

TEST(Ap, FalsePositiveThenTruePositive) {
  // ranks: FP (P=0, R=0), TP (P=1/2, R=1); envelope is 1/2 at every recall
  std::vector<EvalImage> im(1);
  im[0].ground_truth.push_back({{.1, .1, .4, .4}, "text"});
  im[0].predictions.push_back({{.6, .6, .9, .9}, "text", 0.95});
  im[0].predictions.push_back({{.1, .1, .4, .4}, "text", 0.9});
  EXPECT_DOUBLE_EQ(average_precision(im).ap50, 0.5);
}

TEST(Ap, NoGroundTruthIsAnError) {
  std::vector<EvalImage> im(2);
  im[0].predictions.push_back({{.1, .1, .4, .4}, "text", 0.9});
  EXPECT_THROW((void)average_precision(im), Error);
}

TEST(Ap, MacroIsMeanOfCategoriesWithGroundTruth) {
  Rng rng(4);
  const auto im = random_images(rng, 40);
  const auto r = average_precision(im);
  double sum = 0;
  std::size_t gt = 0;
  double weighted = 0;
  for (const auto& c : r.per_category) {
    sum += c.ap;
    gt += c.gt_count;
    weighted += c.ap * c.gt_count;
    EXPECT_GT(c.gt_count, 0u);
  }
  EXPECT_NEAR(r.ap, sum / r.per_category.size(), 1e-15);
  EXPECT_NEAR(r.weighted_ap, weighted / gt, 1e-15);
  EXPECT_GE(r.ap, 0.0);
  EXPECT_LE(r.ap, 1.0);
}

TEST(Ap, InvariantUnderMonotoneConfidenceMaps) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    auto im = random_images(rng, 15);
    const double base = average_precision(im).ap;
    const double a = rng.uniform(0.5, 3.0);
    for (auto& i : im)
      for (auto& p : i.predictions) p.confidence = std::pow(p.confidence, a) * 0.5 + 0.1;
    EXPECT_DOUBLE_EQ(average_precision(im).ap, base);
  }
}

TEST(Ap, AntitoneInThreshold) {
  Rng rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    const auto r = average_precision(random_images(rng, 10));
    EXPECT_LE(r.ap75, r.ap50);
    for (std::size_t c = 0; c < r.per_category.size(); ++c)
      for (std::size_t t = 1; t < r.iou_thresholds.size(); ++t)
        EXPECT_LE(r.per_category[c].ap_per_threshold[t], r.per_category[c].ap_per_threshold[t - 1] + 1e-15);
  }
}

TEST(Ece, Cases) {
  EXPECT_DOUBLE_EQ(expected_calibration_error(std::vector<double>(10, 1.0), std::vector<bool>(10, true)).ece, 0.0);
  std::vector<bool> half{true, false, true, false};
  EXPECT_DOUBLE_EQ(expected_calibration_error(std::vector<double>(4, 0.5), half).ece, 0.0);
  EXPECT_NEAR(expected_calibration_error(std::vector<double>{0.8, 0.6}, {true, false}, 1).ece, 0.2, 1e-15);
  EXPECT_THROW((void)expected_calibration_error(std::vector<double>{}, {}), Error);
  EXPECT_THROW((void)expected_calibration_error(std::vector<double>{0.5}, {true, false}), Error);
  EXPECT_THROW((void)expected_calibration_error(std::vector<double>{0.5}, {true}, 0), Error);
}

TEST(Ece, BinCountsSumToSampleCount) {
  Rng rng(7);
  std::vector<double> c;
  std::vector<bool> o;
  for (int i = 0; i < 997; ++i) {
    c.push_back(rng.uniform());
    o.push_back(rng.bernoulli(0.6));
  }
  c.push_back(1.0);
  o.push_back(true);
  const auto r = expected_calibration_error(c, o);
  std::size_t total = 0;
  for (const auto& b : r.bins) total += b.count;
  EXPECT_EQ(total, c.size());
  EXPECT_EQ(r.bins.size(), 15u);
  EXPECT_GE(r.ece, 0.0);
  EXPECT_LE(r.ece, 1.0);
}

TEST(Stats, IncompleteBetaAgainstBoost) {
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform(0.1, 20), b = rng.uniform(0.1, 20), x = rng.uniform();
    ASSERT_NEAR(stats::incomplete_beta(a, b, x), oracle::boost_incomplete_beta(a, b, x), 1e-10) << a << ' ' << b << ' ' << x;
  }
  EXPECT_DOUBLE_EQ(stats::incomplete_beta(2, 3, 0), 0.0);
  EXPECT_DOUBLE_EQ(stats::incomplete_beta(2, 3, 1), 1.0);
}

TEST(Stats, StudentTAgainstBoost) {
  for (double dof : {1.0, 2.0, 4.0, 9.0, 30.0})
    for (double t = -8; t <= 8; t += 0.37) {
      ASSERT_NEAR(stats::student_t_cdf(t, dof), oracle::boost_student_t_cdf(t, dof), 1e-10) << t << ' ' << dof;
    }
  EXPECT_NEAR(stats::student_t_quantile(0.95, 4), 2.131846786327, 1e-8);
}

TEST(TTest, IdenticalRuns) {
  std::vector<double> a{1, 2, 3, 4, 5};
  const auto r = paired_t_test(a, a);
  EXPECT_DOUBLE_EQ(r.p, 1.0);
  EXPECT_DOUBLE_EQ(r.t, 0.0);
  EXPECT_TRUE(r.zero_variance);
}

TEST(TTest, FixedDifferenceVector) {
  std::vector<double> a{1.5, 1.7, 1.3, 1.6, 1.4}, b{1, 1, 1, 1, 1};
  const auto r = paired_t_test(a, b);
  EXPECT_NEAR(r.t, 7.0710678118655, 1e-9);
  EXPECT_NEAR(r.p, 0.0021106458451, 1e-9);
  EXPECT_NEAR(r.p, 0.0021, 0.0002);
}

TEST(TTest, ConstantNonzeroDifferenceConvention) {
  std::vector<double> a{2, 3, 4, 5, 6}, b{1, 2, 3, 4, 5};
  const auto r = paired_t_test(a, b);
  EXPECT_DOUBLE_EQ(r.p, 0.0);
  EXPECT_TRUE(r.zero_variance);
}

TEST(TTest, Errors) {
  EXPECT_THROW((void)paired_t_test(std::vector<double>{1}, std::vector<double>{2}), Error);
  EXPECT_THROW((void)paired_t_test(std::vector<double>{1, 2}, std::vector<double>{2}), Error);
  EXPECT_THROW((void)tost(std::vector<double>{1}, std::vector<double>{2}, 0.5), Error);
}

TEST(Tost, Verdicts) {
  std::vector<double> zero(5, 0.0);
  std::vector<double> gap{0.6, 0.7, 0.5, 0.65, 0.55};
  EXPECT_FALSE(tost(gap, zero, 0.5).equivalent);
  std::vector<double> near{0.05, -0.03, 0.01, 0.02, -0.04};
  const auto e = tost(near, zero, 0.5, 0.05);
  EXPECT_TRUE(e.equivalent);
  EXPECT_LT(std::max(e.p_lower, e.p_upper), 0.05);
  const auto same = tost(gap, gap, 0.5);
  EXPECT_TRUE(same.equivalent);
  EXPECT_TRUE(same.zero_variance);
}

TEST(Tost, NearTiesMatchCriticalValueChecks) {
  const double crit = 2.131846786326649;  // t(4) 0.95 quantile
  const std::vector<double> shape{0.1, -0.05, 0.0, 0.08, -0.13};
  for (double shift = 0.2; shift <= 0.45; shift += 0.01) {
    std::vector<double> d, zero(5, 0.0);
    double m = 0;
    for (double s : shape) d.push_back(s + shift), m += s + shift;
    m /= 5;
    double ss = 0;
    for (double v : d) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / 4 / 5);
    const bool hand = (m + 0.5) / se > crit && (0.5 - m) / se > crit;
    const auto r = tost(d, zero, 0.5);
    EXPECT_EQ(r.equivalent, hand) << shift;
    EXPECT_EQ(r.equivalent, std::max(r.p_lower, r.p_upper) < 0.05);
  }
}

TEST(TTest, AgreesWithMonteCarloNull) {
  Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 3 + rng.below(6);
    std::vector<double> a, b;
    for (std::size_t k = 0; k < n; ++k) {
      a.push_back(rng.normal() + 0.5 * rng.uniform());
      b.push_back(rng.normal());
    }
    const auto r = paired_t_test(a, b);
    const double ref = oracle::monte_carlo_t_pvalue(r.t, n, 60000, 1000 + i);
    ASSERT_NEAR(r.p, ref, 0.01) << "n=" << n << " t=" << r.t;
    const double margin = 0.5;
    const auto e = tost(a, b, margin);
    const double se = r.mean_difference / r.t;
    const double upper_ref = oracle::monte_carlo_t_upper_tail((margin - r.mean_difference) / se, n, 60000, 5000 + i);
    ASSERT_NEAR(e.p_upper, upper_ref, 0.01);
  }
}

TEST(Stars, Thresholds) {
  EXPECT_EQ(significance_stars(0.0005), "***");
  EXPECT_EQ(significance_stars(0.005), "**");
  EXPECT_EQ(significance_stars(0.03), "*");
  EXPECT_EQ(significance_stars(0.05), "");
  EXPECT_EQ(significance_stars(0.2), "");
}

TEST(MatchCorrectness, GreedyByConfidence) {
  std::vector<GroundTruthAnnotation> gt{{{.1, .1, .4, .4}, "text"}};
  std::vector<ScoredBox> p{{{.1, .1, .4, .4}, "text", 0.5}, {{.1, .1, .4, .41}, "text", 0.9}, {{.1, .1, .4, .4}, "table", 0.99}};
  EXPECT_EQ(match_correctness(p, gt), (std::vector<bool>{false, true, false}));
}
