#pragma once

#include <optional>
#include <vector>

#include "layoutfuse/curriculum.hpp"
#include "layoutfuse/fusion.hpp"
#include "layoutfuse/gating.hpp"
#include "layoutfuse/taxonomy.hpp"
#include "layoutfuse/types.hpp"

namespace layoutfuse {

enum class BoxRule { kFixed, kInverseVariance, kGate };

/// The pseudo-label fusion pass over one page.
///
/// Matched pairs become fused labels: the box uses the gate when one is
/// supplied, else inverse-variance weights when the teacher carries a
/// coordinate variance, else the fixed alpha. Confidences are temperature
/// scaled and fused in logit space with the gate weight, the precision
/// weight, or the fixed weights respectively. Unmatched teacher boxes at or
/// above their class threshold are kept as teacher labels; unmatched LLM
/// regions with a high enough score in a soft category become llm-soft
/// labels carrying the smoothing factor.
class PseudoLabelRefiner {
 public:
  PseudoLabelRefiner(FusionConfig config, Taxonomy taxonomy, CurriculumConfig curriculum = {},
                     std::optional<GateParams> gate = std::nullopt);

  [[nodiscard]] std::vector<FusedLabel> refine(const Page& page) const;
  [[nodiscard]] MatchOutcome match(const Page& page) const;
  [[nodiscard]] BoxRule box_rule_for(const TeacherPrediction& teacher) const;

  [[nodiscard]] const FusionConfig& config() const { return config_; }
  [[nodiscard]] const CategoryCompatibility& compatibility() const { return compatible_; }

 private:
  FusionConfig config_;
  CurriculumConfig curriculum_;
  CategoryCompatibility compatible_;
  std::optional<GateParams> gate_;
};

std::vector<FusedLabel> refine_pseudo_labels(const Page& page, const FusionConfig& config, const Taxonomy& taxonomy,
                                             const CurriculumConfig& curriculum = {},
                                             const GateParams* gate = nullptr);

}  // namespace layoutfuse
