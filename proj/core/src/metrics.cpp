#include "layoutfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "layoutfuse/error.hpp"
#include "layoutfuse/stats.hpp"

namespace layoutfuse {

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

namespace {

struct Candidate {
  std::size_t image;
  std::size_t index;
  double confidence;
};

// 101-point interpolated AP for one category at one threshold.
double category_ap(std::span<const EvalImage> images, const std::string& category,
                   const std::vector<Candidate>& ranked, std::size_t gt_count, double threshold) {
  if (gt_count == 0) return 0.0;
  std::vector<std::vector<bool>> used(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) used[i].assign(images[i].ground_truth.size(), false);

  std::vector<double> recall, precision;
  recall.reserve(ranked.size());
  precision.reserve(ranked.size());
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const auto& c : ranked) {
    const auto& img = images[c.image];
    const BoundingBox& box = img.predictions[c.index].box;
    double best = -1.0;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < img.ground_truth.size(); ++j) {
      if (used[c.image][j] || img.ground_truth[j].category != category) continue;
      const double v = iou(box, img.ground_truth[j].box);
      if (v >= threshold && v > best) {
        best = v;
        best_j = j;
      }
    }
    if (best >= 0.0) {
      used[c.image][best_j] = true;
      ++tp;
    } else {
      ++fp;
    }
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_count));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  for (int r = 0; r <= 100; ++r) {
    const double level = r / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

std::ptrdiff_t find_threshold(const std::vector<double>& thresholds, double value) {
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    if (std::abs(thresholds[i] - value) < 1e-9) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

}  // namespace

ApResult average_precision(std::span<const EvalImage> images, const std::vector<double>& iou_thresholds) {
  if (iou_thresholds.empty()) throw Error("average_precision: no IoU thresholds");
  for (double t : iou_thresholds)
    if (!(t > 0.0 && t <= 1.0)) throw Error("average_precision: IoU thresholds must be in (0, 1]");

  std::map<std::string, std::size_t> gt_counts;
  std::map<std::string, std::vector<Candidate>> candidates;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (const auto& g : images[i].ground_truth) ++gt_counts[g.category];
    for (std::size_t j = 0; j < images[i].predictions.size(); ++j) {
      const auto& p = images[i].predictions[j];
      if (!std::isfinite(p.confidence)) throw Error("average_precision: non-finite confidence");
      candidates[p.category].push_back({i, j, p.confidence});
    }
  }
  if (gt_counts.empty()) throw Error("average_precision: no ground truth");

  ApResult result;
  result.iou_thresholds = iou_thresholds;
  const auto i50 = find_threshold(iou_thresholds, 0.5);
  const auto i75 = find_threshold(iou_thresholds, 0.75);
  std::size_t total_gt = 0;
  for (const auto& [category, count] : gt_counts) {
    auto& ranked = candidates[category];
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Candidate& a, const Candidate& b) { return a.confidence > b.confidence; });
    CategoryAp cat;
    cat.category = category;
    cat.gt_count = count;
    cat.prediction_count = ranked.size();
    for (double t : iou_thresholds) cat.ap_per_threshold.push_back(category_ap(images, category, ranked, count, t));
    cat.ap = std::accumulate(cat.ap_per_threshold.begin(), cat.ap_per_threshold.end(), 0.0) /
             static_cast<double>(iou_thresholds.size());
    if (i50 >= 0) cat.ap50 = cat.ap_per_threshold[static_cast<std::size_t>(i50)];
    if (i75 >= 0) cat.ap75 = cat.ap_per_threshold[static_cast<std::size_t>(i75)];
    result.ap += cat.ap;
    result.ap50 += cat.ap50;
    result.ap75 += cat.ap75;
    result.weighted_ap += cat.ap * static_cast<double>(count);
    total_gt += count;
    result.per_category.push_back(std::move(cat));
  }
  const double k = static_cast<double>(result.per_category.size());
  result.ap /= k;
  result.ap50 /= k;
  result.ap75 /= k;
  result.weighted_ap /= static_cast<double>(total_gt);
  return result;
}

EceResult expected_calibration_error(std::span<const double> confidences, const std::vector<bool>& correct,
                                     std::size_t bins) {
  if (confidences.size() != correct.size()) throw Error("ece: confidences and outcomes differ in length");
  if (confidences.empty()) throw Error("ece: empty input");
  if (bins == 0) throw Error("ece: bins must be >= 1");
  EceResult r;
  r.bins.resize(bins);
  std::vector<double> conf_sum(bins, 0.0);
  std::vector<double> hit_sum(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    r.bins[b].lower = static_cast<double>(b) / static_cast<double>(bins);
    r.bins[b].upper = static_cast<double>(b + 1) / static_cast<double>(bins);
  }
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) throw Error("ece: confidence outside [0, 1] at index " + std::to_string(i));
    const auto b = std::min(bins - 1, static_cast<std::size_t>(c * static_cast<double>(bins)));
    ++r.bins[b].count;
    conf_sum[b] += c;
    hit_sum[b] += correct[i] ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(confidences.size());
  for (std::size_t b = 0; b < bins; ++b) {
    auto& bin = r.bins[b];
    if (bin.count == 0) continue;
    bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
    bin.accuracy = hit_sum[b] / static_cast<double>(bin.count);
    r.ece += static_cast<double>(bin.count) / n * std::abs(bin.accuracy - bin.mean_confidence);
  }
  return r;
}

namespace {

struct Differences {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  bool zero_variance = false;
};

Differences summarize(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.size() != b.size()) throw Error(std::string(who) + ": inputs differ in length");
  if (a.size() < 2) throw Error(std::string(who) + ": at least two pairs are required");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
    if (!std::isfinite(d[i])) throw Error(std::string(who) + ": non-finite input");
  }
  Differences s;
  s.n = d.size();
  s.mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(s.n);
  s.zero_variance = std::all_of(d.begin(), d.end(), [&](double x) { return x == d.front(); });
  if (s.zero_variance) {
    s.mean = d.front();
    return s;
  }
  double ss = 0.0;
  for (double x : d) ss += (x - s.mean) * (x - s.mean);
  s.se = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
  return s;
}

}  // namespace

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  const Differences s = summarize(a, b, "paired_t_test");
  TTestResult r;
  r.n = s.n;
  r.mean_difference = s.mean;
  r.zero_variance = s.zero_variance;
  if (s.zero_variance) {
    if (s.mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), s.mean);
      r.p = 0.0;
    }
    return r;
  }
  const double dof = static_cast<double>(s.n - 1);
  r.t = s.mean / s.se;
  r.p = std::min(1.0, 2.0 * stats::student_t_cdf(-std::abs(r.t), dof));
  return r;
}

TostResult tost(std::span<const double> a, std::span<const double> b, double margin, double alpha) {
  if (!(margin > 0.0)) throw Error("tost: margin must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("tost: alpha must be in (0, 1)");
  const Differences s = summarize(a, b, "tost");
  TostResult r;
  r.margin = margin;
  r.alpha = alpha;
  r.mean_difference = s.mean;
  r.zero_variance = s.zero_variance;
  if (s.zero_variance) {
    r.p_lower = s.mean > -margin ? 0.0 : 1.0;
    r.p_upper = s.mean < margin ? 0.0 : 1.0;
  } else {
    const double dof = static_cast<double>(s.n - 1);
    r.p_lower = stats::student_t_cdf(-(s.mean + margin) / s.se, dof);
    r.p_upper = stats::student_t_cdf((s.mean - margin) / s.se, dof);
  }
  r.equivalent = std::max(r.p_lower, r.p_upper) < alpha;
  return r;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::vector<bool> match_correctness(std::span<const ScoredBox> predictions,
                                    std::span<const GroundTruthAnnotation> ground_truth, double iou_threshold) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence > predictions[b].confidence;
  });
  std::vector<bool> used(ground_truth.size(), false);
  std::vector<bool> correct(predictions.size(), false);
  for (std::size_t i : order) {
    double best = -1.0;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < ground_truth.size(); ++j) {
      if (used[j] || ground_truth[j].category != predictions[i].category) continue;
      const double v = iou(predictions[i].box, ground_truth[j].box);
      if (v >= iou_threshold && v > best) {
        best = v;
        best_j = j;
      }
    }
    if (best >= 0.0) {
      used[best_j] = true;
      correct[i] = true;
    }
  }
  return correct;
}

}  // namespace layoutfuse
