#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "layoutfuse/geometry.hpp"
#include "layoutfuse/types.hpp"

namespace layoutfuse {

struct ScoredBox {
  BoundingBox box;
  std::string category;
  double confidence = 0.0;
};

/// Predictions and annotations of one page; matching never crosses pages.
struct EvalImage {
  std::vector<ScoredBox> predictions;
  std::vector<GroundTruthAnnotation> ground_truth;
};

[[nodiscard]] std::vector<double> coco_iou_thresholds();  // 0.50:0.05:0.95

struct CategoryAp {
  std::string category;
  std::size_t gt_count = 0;
  std::size_t prediction_count = 0;
  std::vector<double> ap_per_threshold;  // aligned with ApResult::iou_thresholds
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
};

struct ApResult {
  std::vector<double> iou_thresholds;
  double ap = 0.0;  // macro mean over categories with ground truth
  double ap50 = 0.0;
  double ap75 = 0.0;
  double weighted_ap = 0.0;  // weighted by ground-truth count
  std::vector<CategoryAp> per_category;
};

/// COCO-style AP: per category and threshold, predictions in descending
/// confidence are greedily matched to the best-IoU unmatched ground truth of
/// the same category; 101-point interpolated precision. Categories without
/// ground truth are left out. ap50/ap75 are read at thresholds 0.5/0.75 when
/// present. Throws Error when no ground truth exists at all.
ApResult average_precision(std::span<const EvalImage> images,
                           const std::vector<double>& iou_thresholds = coco_iou_thresholds());

struct EceBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
};

struct EceResult {
  double ece = 0.0;
  std::vector<EceBin> bins;
};

/// Equal-width bins on [0, 1]; confidence 1.0 lands in the last bin.
EceResult expected_calibration_error(std::span<const double> confidences, const std::vector<bool>& correct,
                                     std::size_t bins = 15);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  double mean_difference = 0.0;
  std::size_t n = 0;
  /// Set when the differences have zero variance: p = 1 for all-zero
  /// differences, p = 0 otherwise.
  bool zero_variance = false;
};

/// Paired t-test on a - b.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct TostResult {
  double p_lower = 1.0;  // H0: mean difference <= -margin
  double p_upper = 1.0;  // H0: mean difference >= +margin
  bool equivalent = false;
  double margin = 0.0;
  double alpha = 0.05;
  double mean_difference = 0.0;
  bool zero_variance = false;
};

/// Two one-sided paired t-tests; equivalent iff max(p_lower, p_upper) < alpha.
/// With zero-variance differences a one-sided test rejects exactly when the
/// mean lies strictly inside its side of the margin.
TostResult tost(std::span<const double> a, std::span<const double> b, double margin, double alpha = 0.05);

/// "***" for p < 0.001, "**" for p < 0.01, "*" for p < 0.05, else "".
[[nodiscard]] std::string significance_stars(double p);

/// Greedy same-category matching at `iou_threshold`, in descending confidence;
/// returns per-prediction correctness (aligned with `predictions`).
std::vector<bool> match_correctness(std::span<const ScoredBox> predictions,
                                    std::span<const GroundTruthAnnotation> ground_truth, double iou_threshold = 0.5);

}  // namespace layoutfuse
