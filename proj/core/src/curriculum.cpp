#include "layoutfuse/curriculum.hpp"

#include <cmath>

#include "layoutfuse/error.hpp"

namespace layoutfuse {

void CurriculumConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("curriculum." + m); };
  if (warmup_epochs < 0) fail("warmup_epochs: must be >= 0");
  if (fusion_start_epoch < 1 || fusion_start_epoch <= warmup_epochs)
    fail("fusion_start_epoch: must be >= 1 and after the warm-up");
  if (soft_start_epoch < fusion_start_epoch) fail("soft_start_epoch: must not precede fusion_start_epoch");
  if (!(threshold_frequent > 0.0 && threshold_frequent < 1.0)) fail("threshold_frequent: must be in (0, 1)");
  if (!(threshold_rare > 0.0 && threshold_rare < 1.0)) fail("threshold_rare: must be in (0, 1)");
  if (regeneration_period < 1) fail("regeneration_period: must be >= 1");
  if (!(ema_momentum >= 0.0 && ema_momentum <= 1.0)) fail("ema_momentum: must be in [0, 1]");
  if (!std::isfinite(lambda_pseudo) || !std::isfinite(lambda_cons)) fail("lambda: must be finite");
}

double category_threshold(std::string_view category, const Taxonomy& taxonomy, const CurriculumConfig& config) {
  return taxonomy.rarity(category) == Rarity::kFrequent ? config.threshold_frequent : config.threshold_rare;
}

bool SchedulePhase::admits(const FusedLabel& label) const {
  if (!allowed.contains(label.provenance)) return false;
  switch (label.provenance) {
    case Provenance::kTeacher: {
      auto it = thresholds.find(label.category);
      return it == thresholds.end() || label.confidence >= it->second;
    }
    case Provenance::kLlmSoft:
      return soft_categories.contains(label.category);
    case Provenance::kFused:
      return true;
  }
  return false;
}

SchedulePhase schedule(int epoch, const Taxonomy& taxonomy, const CurriculumConfig& config) {
  if (epoch < 1) throw Error("schedule: epoch must be >= 1");
  SchedulePhase phase;
  phase.epoch = epoch;
  phase.allowed.insert(Provenance::kTeacher);
  const bool warmup = epoch <= config.warmup_epochs;
  if (!warmup && epoch >= config.fusion_start_epoch) phase.allowed.insert(Provenance::kFused);
  if (!warmup && epoch >= config.soft_start_epoch) {
    phase.allowed.insert(Provenance::kLlmSoft);
    for (const auto& c : taxonomy.categories()) {
      if (c.rarity == Rarity::kRare) phase.soft_categories.insert(c.name);
    }
  }
  for (const auto& c : taxonomy.categories()) {
    phase.thresholds[c.name] = warmup ? config.threshold_frequent : category_threshold(c.name, taxonomy, config);
  }
  phase.regenerate = (epoch - 1) % config.regeneration_period == 0;
  return phase;
}

std::vector<double> ema_update(std::span<const double> teacher, std::span<const double> student, double momentum) {
  if (teacher.size() != student.size()) throw Error("ema_update: parameter vectors differ in length");
  if (!(momentum >= 0.0 && momentum <= 1.0)) throw Error("ema_update: momentum must be in [0, 1]");
  std::vector<double> out(teacher.size());
  for (std::size_t i = 0; i < teacher.size(); ++i) out[i] = momentum * teacher[i] + (1.0 - momentum) * student[i];
  return out;
}

double consistency_loss(std::span<const std::vector<double>> visual,
                        std::span<const std::optional<std::vector<double>>> text) {
  if (visual.size() != text.size()) throw Error("consistency_loss: visual and text lists differ in length");
  if (visual.empty()) throw Error("consistency_loss: at least one entry is required");
  double total = 0.0;
  for (std::size_t i = 0; i < visual.size(); ++i) {
    if (!text[i]) continue;
    const auto& v = visual[i];
    const auto& t = *text[i];
    if (v.size() != t.size()) throw Error("consistency_loss: embedding dimensions differ at entry " + std::to_string(i));
    double dot = 0.0, nv = 0.0, nt = 0.0;
    for (std::size_t d = 0; d < v.size(); ++d) {
      dot += v[d] * t[d];
      nv += v[d] * v[d];
      nt += t[d] * t[d];
    }
    if (nv == 0.0 || nt == 0.0) throw Error("consistency_loss: zero-norm embedding at entry " + std::to_string(i));
    total += 1.0 - dot / (std::sqrt(nv) * std::sqrt(nt));
  }
  return total / static_cast<double>(visual.size());
}

double total_loss(double l_sup, double l_pseudo, double l_cons, const CurriculumConfig& config) {
  if (!std::isfinite(l_sup) || !std::isfinite(l_pseudo) || !std::isfinite(l_cons))
    throw Error("total_loss: non-finite input");
  return l_sup + config.lambda_pseudo * l_pseudo + config.lambda_cons * l_cons;
}

}  // namespace layoutfuse
