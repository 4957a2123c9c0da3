#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "layoutfuse/geometry.hpp"

namespace layoutfuse {

struct TeacherPrediction {
  BoundingBox box;
  std::string category;
  double confidence = 0.5;               // p_t in (0, 1)
  std::optional<double> coord_variance;  // sigma_t^2 of normalized coordinates

  friend bool operator==(const TeacherPrediction&, const TeacherPrediction&) = default;
};

struct LlmRegion {
  BoundingBox box;
  std::string category;
  double score = 0.5;   // s_l in (0, 1)
  double q_text = 1.0;  // (0, 1]
  double q_spatial = 1.0;
  std::string source;  // empty for LLM output, "heuristic" for the rule baseline

  friend bool operator==(const LlmRegion&, const LlmRegion&) = default;
};

struct OcrBlock {
  BoundingBox box;
  std::string text;
  bool is_bold = false;

  friend bool operator==(const OcrBlock&, const OcrBlock&) = default;
};

struct GroundTruthAnnotation {
  BoundingBox box;
  std::string category;

  friend bool operator==(const GroundTruthAnnotation&, const GroundTruthAnnotation&) = default;
};

enum class Provenance { kFused, kTeacher, kLlmSoft };

[[nodiscard]] std::string_view to_string(Provenance p);
[[nodiscard]] Provenance provenance_from_string(std::string_view s);

struct FusedLabel {
  BoundingBox box;
  std::string category;
  double confidence = 0.0;
  Provenance provenance = Provenance::kTeacher;
  double smoothing = 0.0;  // nonzero only for llm-soft labels
  std::optional<std::size_t> teacher_index;
  std::optional<std::size_t> llm_index;

  friend bool operator==(const FusedLabel&, const FusedLabel&) = default;
};

struct Page {
  std::string page_id;
  std::vector<OcrBlock> ocr_blocks;
  std::vector<TeacherPrediction> teacher;
  std::vector<LlmRegion> llm;
  std::optional<std::vector<GroundTruthAnnotation>> ground_truth;
  std::optional<std::vector<FusedLabel>> refined;

  friend bool operator==(const Page&, const Page&) = default;
};

}  // namespace layoutfuse
