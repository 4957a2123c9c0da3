#include "layoutfuse/evaluation.hpp"

#include "layoutfuse/error.hpp"

namespace layoutfuse {

std::string_view to_string(Stream s) {
  switch (s) {
    case Stream::kRefined: return "refined";
    case Stream::kTeacher: return "teacher";
    case Stream::kLlm: return "llm";
  }
  return "refined";
}

std::vector<EvalImage> eval_images(std::span<const Page> pages, Stream stream) {
  std::vector<EvalImage> out;
  out.reserve(pages.size());
  for (const auto& page : pages) {
    if (!page.ground_truth) throw DatasetError("page '" + page.page_id + "': ground truth is required for evaluation");
    EvalImage img;
    img.ground_truth = *page.ground_truth;
    switch (stream) {
      case Stream::kRefined:
        if (!page.refined) throw DatasetError("page '" + page.page_id + "': no refined labels; run fuse first");
        for (const auto& l : *page.refined) img.predictions.push_back({l.box, l.category, l.confidence});
        break;
      case Stream::kTeacher:
        for (const auto& t : page.teacher) img.predictions.push_back({t.box, t.category, t.confidence});
        break;
      case Stream::kLlm:
        for (const auto& r : page.llm) img.predictions.push_back({r.box, r.category, r.score});
        break;
    }
    out.push_back(std::move(img));
  }
  return out;
}

ConfidenceOutcomes confidence_outcomes(std::span<const EvalImage> images, double iou_threshold) {
  ConfidenceOutcomes out;
  for (const auto& img : images) {
    const auto correct = match_correctness(img.predictions, img.ground_truth, iou_threshold);
    for (std::size_t i = 0; i < img.predictions.size(); ++i) {
      out.confidences.push_back(img.predictions[i].confidence);
      out.correct.push_back(correct[i]);
    }
  }
  return out;
}

}  // namespace layoutfuse
