#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "layoutfuse/fusion.hpp"
#include "layoutfuse/gating.hpp"
#include "layoutfuse/taxonomy.hpp"
#include "layoutfuse/types.hpp"

namespace layoutfuse {

/// Controllable two-source noise model. Coordinate errors of the teacher and
/// the LLM are Gaussian with standard deviations sigma_t(x), sigma_l(x) and
/// correlation rho; category errors flip to a confusable partner; confidences
/// follow a logistic correctness model.
struct SimConfig {
  std::size_t pages = 100;
  std::size_t regions_min = 3;
  std::size_t regions_max = 8;
  std::size_t grid_rows = 8;
  std::size_t grid_cols = 2;
  std::string taxonomy = "doclaynet";
  /// Ordered (category, probability); must sum to 1.
  std::vector<std::pair<std::string, double>> category_frequencies;

  double sigma_teacher = 0.010;
  double sigma_llm = 0.020;
  std::map<std::string, double> sigma_teacher_by_category;
  std::map<std::string, double> sigma_llm_by_category;
  double rho = 0.2;  // in [0, 0.99]

  /// sigma(x) = sigma * exp(-coupling * zscore(confidence logit)): confident
  /// predictions are also spatially tighter. 0 gives homoscedastic noise.
  double noise_confidence_coupling = 0.0;
  /// Extra log-normal spread of sigma(x) that no observable carries.
  double noise_hidden_spread = 0.0;

  double teacher_confusion = 0.15;
  double llm_confusion = 0.05;
  std::vector<CategoryPair> confusion_pairs;
  /// Standard deviation of the latent confidence logit.
  double confidence_spread = 1.0;
  /// Reported logit = temperature * calibrated logit, so fitting recovers it.
  double teacher_temperature = 1.0;
  double llm_temperature = 1.0;

  double teacher_miss_rate = 0.0;
  double llm_miss_rate = 0.0;
  bool emit_coord_var = false;
  std::uint64_t seed = 7;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  [[nodiscard]] double teacher_sigma_for(const std::string& category) const;
  [[nodiscard]] double llm_sigma_for(const std::string& category) const;
};

[[nodiscard]] std::vector<std::pair<std::string, double>> default_category_frequencies();
[[nodiscard]] std::vector<CategoryPair> default_simulator_confusions();
/// SimConfig{} with the default frequency table and confusion pairs filled in.
[[nodiscard]] SimConfig default_sim_config();

/// Hidden per-region facts the oracle needs.
struct SimulatedRegion {
  std::size_t gt_index = 0;
  std::optional<std::size_t> teacher_index;
  std::optional<std::size_t> llm_index;
  double sigma_teacher = 0.0;
  double sigma_llm = 0.0;
  bool teacher_correct = true;
  bool llm_correct = true;
};

struct SimulatedPage {
  Page page;
  std::vector<SimulatedRegion> regions;
};

/// Ground-truth pages with OCR stubs, laid out on a jittered grid.
/// Deterministic; each page draws from its own stream of the master seed.
std::vector<Page> generate_pages(const SimConfig& config);

/// Adds teacher and LLM streams to pages carrying ground truth.
std::vector<SimulatedPage> simulate_predictions(std::span<const Page> pages, const SimConfig& config);

/// generate_pages followed by simulate_predictions.
std::vector<SimulatedPage> simulate_dataset(const SimConfig& config);

/// One matched teacher/LLM pair with its oracle facts.
struct OracleSample {
  GateSample sample;
  double sigma_teacher = 0.0;
  double sigma_llm = 0.0;
  double oracle_weight = 0.5;  // optimal_alpha at the true sigmas and rho
  bool disagree = false;       // teacher and LLM categories differ
};

/// Draws n region-level pairs without page layout.
std::vector<OracleSample> sample_oracle_pairs(const SimConfig& config, std::size_t n, std::uint64_t seed);

/// Latent-logit mean whose logistic model yields the requested error rate.
[[nodiscard]] double logit_mean_for_error_rate(double error_rate, double spread);

/// Empirical variance of alpha * e_t + (1 - alpha) * e_l under the
/// correlated Gaussian noise model.
double monte_carlo_fusion_variance(double sigma_t, double sigma_l, double rho, double alpha, std::size_t samples,
                                   std::uint64_t seed);

/// Same draws, evaluated at every alpha in `alphas`.
std::vector<double> monte_carlo_fusion_variance_curve(double sigma_t, double sigma_l, double rho,
                                                      std::span<const double> alphas, std::size_t samples,
                                                      std::uint64_t seed);

}  // namespace layoutfuse
