#include "layoutfuse/refine.hpp"

#include <set>

#include "layoutfuse/calibration.hpp"

namespace layoutfuse {

PseudoLabelRefiner::PseudoLabelRefiner(FusionConfig config, Taxonomy taxonomy, CurriculumConfig curriculum,
                                       std::optional<GateParams> gate)
    : config_(std::move(config)),
      curriculum_(curriculum),
      compatible_(taxonomy, config_.confusable_pairs),
      gate_(std::move(gate)) {
  config_.validate();
  curriculum_.validate();
  if (gate_) gate_->validate();
}

MatchOutcome PseudoLabelRefiner::match(const Page& page) const {
  return match_regions(page.teacher, page.llm, config_.iou_threshold, compatible_);
}

BoxRule PseudoLabelRefiner::box_rule_for(const TeacherPrediction& teacher) const {
  if (gate_) return BoxRule::kGate;
  if (teacher.coord_variance) return BoxRule::kInverseVariance;
  return BoxRule::kFixed;
}

std::vector<FusedLabel> PseudoLabelRefiner::refine(const Page& page) const {
  const Taxonomy& taxonomy = compatible_.taxonomy();
  std::set<std::string> soft;
  for (const auto& c : config_.soft_categories) {
    if (taxonomy.contains(c)) soft.insert(taxonomy.canonical(c));
  }

  const MatchOutcome outcome = match(page);
  std::vector<FusedLabel> out;
  out.reserve(page.teacher.size() + page.llm.size());

  // Labels are emitted in teacher order, then unmatched LLM regions in list
  // order, as in the sequential algorithm.
  std::vector<const MatchResult*> by_teacher(page.teacher.size(), nullptr);
  for (const auto& m : outcome.matches) by_teacher[m.teacher_index] = &m;

  for (std::size_t t = 0; t < page.teacher.size(); ++t) {
    const TeacherPrediction& tp = page.teacher[t];
    if (const MatchResult* m = by_teacher[t]) {
      const LlmRegion& r = page.llm[m->llm_index];
      double box_weight = config_.box_alpha;
      double lambda = config_.weight_teacher;
      switch (box_rule_for(tp)) {
        case BoxRule::kGate:
          box_weight = lambda = gate_forward(*gate_, GateInput{extract_psi(tp, r, *m), r.q_text, r.q_spatial});
          break;
        case BoxRule::kInverseVariance: {
          const double llm_var = config_.llm_variance_scale * llm_spatial_variance(r.q_text, r.q_spatial);
          box_weight = lambda = inverse_variance_weight(*tp.coord_variance, llm_var);
          break;
        }
        case BoxRule::kFixed:
          break;
      }
      FusedLabel label;
      label.box = fuse_fixed_box(tp.box, r.box, box_weight);
      label.confidence = fuse_confidence_logit(apply_temperature(tp.confidence, config_.temperature_teacher),
                                               apply_temperature(r.score, config_.temperature_llm), lambda);
      label.category = resolve_category(tp.category, tp.confidence, r.category, r.score, compatible_);
      label.provenance = Provenance::kFused;
      label.teacher_index = t;
      label.llm_index = m->llm_index;
      out.push_back(std::move(label));
    } else if (tp.confidence >= category_threshold(tp.category, taxonomy, curriculum_)) {
      FusedLabel label;
      label.box = tp.box;
      label.category = tp.category;
      label.confidence = tp.confidence;
      label.provenance = Provenance::kTeacher;
      label.teacher_index = t;
      out.push_back(std::move(label));
    }
  }

  for (std::size_t k : outcome.unmatched_llm) {
    const LlmRegion& r = page.llm[k];
    if (r.score >= config_.soft_score_min && soft.contains(taxonomy.canonical(r.category))) {
      FusedLabel label;
      label.box = r.box;
      label.category = r.category;
      label.confidence = r.score;
      label.provenance = Provenance::kLlmSoft;
      label.smoothing = config_.smoothing;
      label.llm_index = k;
      out.push_back(std::move(label));
    }
  }
  return out;
}

std::vector<FusedLabel> refine_pseudo_labels(const Page& page, const FusionConfig& config, const Taxonomy& taxonomy,
                                             const CurriculumConfig& curriculum, const GateParams* gate) {
  std::optional<GateParams> g;
  if (gate != nullptr) g = *gate;
  return PseudoLabelRefiner(config, taxonomy, curriculum, std::move(g)).refine(page);
}

}  // namespace layoutfuse
