#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "layoutfuse/taxonomy.hpp"
#include "layoutfuse/types.hpp"

namespace layoutfuse {

struct CurriculumConfig {
  int warmup_epochs = 2;
  int fusion_start_epoch = 3;
  int soft_start_epoch = 6;
  double threshold_frequent = 0.7;
  double threshold_rare = 0.5;
  int regeneration_period = 2;
  double ema_momentum = 0.999;
  double lambda_pseudo = 1.0;
  double lambda_cons = 0.2;

  void validate() const;
};

/// Frequent categories get threshold_frequent, rare ones threshold_rare.
[[nodiscard]] double category_threshold(std::string_view category, const Taxonomy& taxonomy,
                                        const CurriculumConfig& config);

struct SchedulePhase {
  int epoch = 1;
  std::set<Provenance> allowed;
  std::map<std::string, double> thresholds;  // teacher confidence floor per category
  std::set<std::string> soft_categories;     // categories admitted as llm-soft
  bool regenerate = false;

  /// Whether a refined label may be used for training in this phase.
  [[nodiscard]] bool admits(const FusedLabel& label) const;
};

/// Warm-up epochs admit teacher labels at the frequent threshold for every
/// category; fused labels follow, then rare-category llm-soft labels.
SchedulePhase schedule(int epoch, const Taxonomy& taxonomy, const CurriculumConfig& config);

/// mu * teacher + (1 - mu) * student, elementwise.
std::vector<double> ema_update(std::span<const double> teacher, std::span<const double> student, double momentum);

/// (1/N) sum over entries with text of (1 - cos(visual, text)); entries
/// without text contribute zero but still count in N.
double consistency_loss(std::span<const std::vector<double>> visual,
                        std::span<const std::optional<std::vector<double>>> text);

/// l_sup + lambda_pseudo * l_pseudo + lambda_cons * l_cons.
double total_loss(double l_sup, double l_pseudo, double l_cons, const CurriculumConfig& config);

}  // namespace layoutfuse
