#include "layoutfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "layoutfuse/calibration.hpp"
#include "layoutfuse/error.hpp"

namespace layoutfuse {

std::vector<CategoryPair> default_confusable_pairs() {
  return {{"caption", "footer"}, {"title", "section-header"}, {"table", "figure"}};
}

void FusionConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("fusion." + m); };
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) fail("iou_threshold: must be in (0, 1)");
  if (!(box_alpha >= 0.0 && box_alpha <= 1.0)) fail("box_alpha: must be in [0, 1]");
  if (!(weight_teacher >= 0.0 && weight_llm >= 0.0) || std::abs(weight_teacher + weight_llm - 1.0) > 1e-9)
    fail("weight_teacher/weight_llm: must be nonnegative and sum to 1");
  if (!(temperature_teacher > 0.0)) fail("temperature_teacher: must be > 0");
  if (!(temperature_llm > 0.0)) fail("temperature_llm: must be > 0");
  if (!(soft_score_min >= 0.0 && soft_score_min <= 1.0)) fail("soft_score_min: must be in [0, 1]");
  if (!(smoothing >= 0.0 && smoothing < 1.0)) fail("smoothing: must be in [0, 1)");
  if (!(llm_variance_scale > 0.0)) fail("llm_variance_scale: must be > 0");
}

CategoryCompatibility::CategoryCompatibility(const Taxonomy& taxonomy,
                                             const std::vector<CategoryPair>& confusable_pairs)
    : taxonomy_(taxonomy), table_(taxonomy.size(), std::vector<bool>(taxonomy.size(), false)) {
  for (std::size_t i = 0; i < taxonomy.size(); ++i) table_[i][i] = true;
  for (const auto& [a, b] : confusable_pairs) {
    // pairs naming categories outside this taxonomy simply do not apply
    if (!taxonomy.contains(a) || !taxonomy.contains(b)) continue;
    const auto i = taxonomy.index_of(a);
    const auto j = taxonomy.index_of(b);
    table_[i][j] = table_[j][i] = true;
  }
}

bool CategoryCompatibility::operator()(std::string_view a, std::string_view b) const {
  return table_[taxonomy_.index_of(a)][taxonomy_.index_of(b)];
}

MatchOutcome match_regions(std::span<const TeacherPrediction> teacher, std::span<const LlmRegion> llm,
                           double iou_threshold, const CategoryCompatibility& compatible) {
  MatchOutcome out;
  std::vector<bool> used(llm.size(), false);
  for (std::size_t t = 0; t < teacher.size(); ++t) {
    std::size_t best = llm.size();
    double best_iou = -1.0;
    for (std::size_t k = 0; k < llm.size(); ++k) {
      if (used[k]) continue;
      const double v = iou(teacher[t].box, llm[k].box);
      if (v > best_iou) {
        best_iou = v;
        best = k;
      }
    }
    if (best < llm.size() && best_iou >= iou_threshold && compatible(teacher[t].category, llm[best].category)) {
      used[best] = true;
      out.matches.push_back({t, best, best_iou, true});
    } else {
      out.unmatched_teacher.push_back(t);
    }
  }
  for (std::size_t k = 0; k < llm.size(); ++k) {
    if (!used[k]) out.unmatched_llm.push_back(k);
  }
  return out;
}

std::string resolve_category(const std::string& teacher_category, double /*teacher_confidence*/,
                             const std::string& llm_category, double /*llm_score*/,
                             const CategoryCompatibility& compatible) {
  if (!compatible(teacher_category, llm_category))
    throw Error("resolve_category: '" + teacher_category + "' and '" + llm_category + "' are not compatible");
  if (teacher_category == llm_category) return teacher_category;
  return llm_category;
}

BoundingBox fuse_fixed_box(const BoundingBox& teacher, const BoundingBox& llm, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("fuse_fixed_box: alpha must be in [0, 1]");
  if (alpha == 1.0) return teacher;
  if (alpha == 0.0) return llm;
  const auto t = teacher.coords();
  const auto l = llm.coords();
  std::array<double, 4> f{};
  for (std::size_t i = 0; i < 4; ++i) f[i] = alpha * t[i] + (1.0 - alpha) * l[i];
  return BoundingBox::from_coords(f);
}

double llm_spatial_variance(double q_text, double q_spatial) {
  if (!(q_text > 0.0 && q_text <= 1.0) || !(q_spatial > 0.0 && q_spatial <= 1.0))
    throw Error("llm_spatial_variance: qualities must be in (0, 1]");
  return 1.0 / (q_text * q_spatial);
}

double inverse_variance_weight(double teacher_variance, double llm_variance) {
  if (!(teacher_variance >= 0.0) || !(llm_variance >= 0.0))
    throw Error("inverse_variance_weight: variances must be >= 0");
  if (teacher_variance == 0.0 && llm_variance == 0.0)
    throw Error("inverse_variance_weight: both variances are zero");
  if (teacher_variance == 0.0) return 1.0;
  if (llm_variance == 0.0) return 0.0;
  if (std::isinf(llm_variance)) return std::isinf(teacher_variance) ? 0.5 : 1.0;
  if (std::isinf(teacher_variance)) return 0.0;
  // (1/vt) / (1/vt + 1/vl) = vl / (vt + vl)
  return llm_variance / (teacher_variance + llm_variance);
}

BoundingBox fuse_inverse_variance(const BoundingBox& teacher, double teacher_variance, const BoundingBox& llm,
                                  double llm_variance) {
  return fuse_fixed_box(teacher, llm, inverse_variance_weight(teacher_variance, llm_variance));
}

namespace {

void check_noise_args(double sigma_t, double sigma_l, double rho, const char* fn) {
  if (!(sigma_t > 0.0) || !(sigma_l > 0.0)) throw Error(std::string(fn) + ": sigmas must be > 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(std::string(fn) + ": rho must be in [0, 1]");
}

double denominator(double st, double sl, double rho) { return st * st + sl * sl - 2.0 * rho * st * sl; }

}  // namespace

double linear_fusion_variance(double sigma_t, double sigma_l, double rho, double alpha) {
  const double b = 1.0 - alpha;
  return alpha * alpha * sigma_t * sigma_t + b * b * sigma_l * sigma_l + 2.0 * alpha * b * rho * sigma_t * sigma_l;
}

double optimal_alpha(double sigma_t, double sigma_l, double rho) {
  check_noise_args(sigma_t, sigma_l, rho, "optimal_alpha");
  const double den = denominator(sigma_t, sigma_l, rho);
  if (den <= 1e-12) throw Error("optimal_alpha: degenerate noise (equal sigmas with rho -> 1)");
  const double alpha = (sigma_l * sigma_l - rho * sigma_t * sigma_l) / den;
  return std::clamp(alpha, 0.0, 1.0);
}

double fused_variance(double sigma_t, double sigma_l, double rho) {
  check_noise_args(sigma_t, sigma_l, rho, "fused_variance");
  const double den = denominator(sigma_t, sigma_l, rho);
  // every weight gives the same variance when the errors are identical
  if (den <= 1e-12) return sigma_t * sigma_l;
  const double raw = (sigma_l * sigma_l - rho * sigma_t * sigma_l) / den;
  if (raw >= 0.0 && raw <= 1.0) {
    return sigma_t * sigma_t * sigma_l * sigma_l * (1.0 - rho * rho) / den;
  }
  return linear_fusion_variance(sigma_t, sigma_l, rho, std::clamp(raw, 0.0, 1.0));
}

double fuse_confidence_logit(double teacher_prob, double llm_prob, double lambda_teacher) {
  if (!(lambda_teacher >= 0.0 && lambda_teacher <= 1.0))
    throw Error("fuse_confidence_logit: lambda must be in [0, 1]");
  if (lambda_teacher == 1.0) return teacher_prob;
  if (lambda_teacher == 0.0) return llm_prob;
  return sigmoid(lambda_teacher * logit(teacher_prob) + (1.0 - lambda_teacher) * logit(llm_prob));
}

}  // namespace layoutfuse
