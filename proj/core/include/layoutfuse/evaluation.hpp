#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "layoutfuse/metrics.hpp"
#include "layoutfuse/types.hpp"

namespace layoutfuse {

enum class Stream { kRefined, kTeacher, kLlm };

[[nodiscard]] std::string_view to_string(Stream s);

/// Predictions of one stream against each page's ground truth. Throws
/// DatasetError for a page without ground truth, or without refined labels
/// when the refined stream is requested.
std::vector<EvalImage> eval_images(std::span<const Page> pages, Stream stream);

struct ConfidenceOutcomes {
  std::vector<double> confidences;
  std::vector<bool> correct;
};

/// Per-prediction confidence and correctness (same-category match at the
/// given IoU), pooled over pages.
ConfidenceOutcomes confidence_outcomes(std::span<const EvalImage> images, double iou_threshold = 0.5);

}  // namespace layoutfuse
