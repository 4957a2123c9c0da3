#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "layoutfuse/geometry.hpp"
#include "layoutfuse/taxonomy.hpp"
#include "layoutfuse/types.hpp"

namespace layoutfuse {

using CategoryPair = std::pair<std::string, std::string>;

/// Pairs of categories the two sources routinely confuse with each other.
[[nodiscard]] std::vector<CategoryPair> default_confusable_pairs();

struct FusionConfig {
  double iou_threshold = 0.5;  // tau
  double box_alpha = 0.6;      // fixed teacher box weight
  double weight_teacher = 0.7; // fixed logit weights, sum to 1
  double weight_llm = 0.3;
  double temperature_teacher = 1.0;
  double temperature_llm = 1.0;
  double soft_score_min = 0.6;
  std::vector<std::string> soft_categories{"header", "title", "caption"};
  double smoothing = 0.2;
  std::vector<CategoryPair> confusable_pairs = default_confusable_pairs();
  /// Multiplies 1/(q_text * q_spatial) to put the LLM variance in the same
  /// units as the teacher's coordinate variance.
  double llm_variance_scale = 1.0;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Reflexive, symmetric category compatibility over one taxonomy.
class CategoryCompatibility {
 public:
  CategoryCompatibility(const Taxonomy& taxonomy, const std::vector<CategoryPair>& confusable_pairs);

  /// Throws ConfigError when either category is outside the taxonomy.
  [[nodiscard]] bool operator()(std::string_view a, std::string_view b) const;
  [[nodiscard]] const Taxonomy& taxonomy() const { return taxonomy_; }

 private:
  Taxonomy taxonomy_;
  std::vector<std::vector<bool>> table_;
};

struct MatchResult {
  std::size_t teacher_index = 0;
  std::size_t llm_index = 0;
  double iou = 0.0;
  bool compatible = true;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

struct MatchOutcome {
  std::vector<MatchResult> matches;
  std::vector<std::size_t> unmatched_teacher;
  std::vector<std::size_t> unmatched_llm;
};

/// Greedy matching in teacher-list order. For each teacher box the
/// highest-IoU still-unmatched LLM region (first index wins ties) is taken iff
/// its IoU reaches the threshold and the categories are compatible.
MatchOutcome match_regions(std::span<const TeacherPrediction> teacher, std::span<const LlmRegion> llm,
                           double iou_threshold, const CategoryCompatibility& compatible);

/// Trust-LLM resolution: the teacher category when both agree, else the
/// LLM category. Throws Error on an incompatible pair.
std::string resolve_category(const std::string& teacher_category, double teacher_confidence,
                             const std::string& llm_category, double llm_score,
                             const CategoryCompatibility& compatible);

/// Coordinate-wise alpha * teacher + (1 - alpha) * llm.
[[nodiscard]] BoundingBox fuse_fixed_box(const BoundingBox& teacher, const BoundingBox& llm, double alpha);

/// 1 / (q_text * q_spatial).
[[nodiscard]] double llm_spatial_variance(double q_text, double q_spatial);

/// Precision weight of the teacher, (1/vt) / (1/vt + 1/vl). A zero variance
/// takes all the weight; both zero is an error.
[[nodiscard]] double inverse_variance_weight(double teacher_variance, double llm_variance);

[[nodiscard]] BoundingBox fuse_inverse_variance(const BoundingBox& teacher, double teacher_variance,
                                                const BoundingBox& llm, double llm_variance);

/// Variance of alpha * y_t + (1 - alpha) * y_l for errors with standard
/// deviations sigma_t, sigma_l and correlation rho.
[[nodiscard]] double linear_fusion_variance(double sigma_t, double sigma_l, double rho, double alpha);

/// Minimum-variance linear weight on the teacher, clamped to [0, 1].
/// Throws when sigma_t^2 + sigma_l^2 - 2 rho sigma_t sigma_l <= 1e-12.
[[nodiscard]] double optimal_alpha(double sigma_t, double sigma_l, double rho);

/// Minimum variance reachable with a weight in [0, 1]. Equals
/// sigma_t^2 sigma_l^2 (1 - rho^2) / (sigma_t^2 + sigma_l^2 - 2 rho sigma_t sigma_l)
/// whenever the unconstrained optimum lies inside [0, 1].
[[nodiscard]] double fused_variance(double sigma_t, double sigma_l, double rho);

/// sigmoid(lambda_t * logit(p_t) + (1 - lambda_t) * logit(s_l)).
[[nodiscard]] double fuse_confidence_logit(double teacher_prob, double llm_prob, double lambda_teacher);

}  // namespace layoutfuse
