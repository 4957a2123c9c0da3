#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "layoutfuse/gating.hpp"
#include "layoutfuse/simulator.hpp"

namespace layoutfuse {

struct TheoryConfig {
  double psi_dim = 3.0;
  double lipschitz_scale = 10.0;  // L * B_theta * sigma
  double delta = 0.05;
  double boundary_center = 0.3;
  double boundary_half_width = 0.2;
  double gap_constant = 1.0;  // C
  double ap_scale = 100.0;

  void validate() const;
};

/// dim * ln(1 + lipschitz_scale * sqrt(n)).
[[nodiscard]] double complementarity_dimension(double psi_dim, double lipschitz_scale, double n);

struct GapPrediction {
  double sqrt_k_over_n = 0.0;
  double simple = 0.0;  // scale * C * sqrt(k / n)
  double test3 = 0.0;   // scale * C * sqrt(k * ln(n / delta) / n)
};

[[nodiscard]] GapPrediction predicted_gap(double k, double n, const TheoryConfig& config);

/// |sigma_t - sigma_l| / min(sigma_t, sigma_l) - 2 rho_hat.
[[nodiscard]] double complementarity_factor(double sigma_t, double sigma_l, double rho_hat);

enum class Regime { kInterior, kBoundary };

/// Boundary iff |gamma - center| <= half_width.
[[nodiscard]] Regime classify_regime(double gamma, const TheoryConfig& config);
[[nodiscard]] double boundary_measure(std::span<const double> gammas, const TheoryConfig& config);

struct ConvergencePoint {
  double n = 0.0;
  double gap = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

/// OLS of ln(gap) on ln(n). Needs >= 3 points, positive gaps, and at least
/// two distinct n.
SlopeFit fit_convergence_slope(std::span<const ConvergencePoint> points);

enum class RhoHat { kDisagreement, kModelCorrelation };

struct RegimeSummary {
  std::size_t boundary_count = 0;
  std::size_t interior_count = 0;
  double boundary_mean_residual = 0.0;
  double interior_mean_residual = 0.0;
  double boundary_stderr = 0.0;
  double interior_stderr = 0.0;
  double boundary_fraction = 0.0;

  /// (boundary mean - interior mean) in units of its standard error.
  [[nodiscard]] double separation_sigmas() const;
};

/// Per-instance gamma from the true sigmas; residual = |g(psi) - g*(x)|.
RegimeSummary analyze_regimes(const GateParams& gate, std::span<const OracleSample> samples, double rho,
                              const TheoryConfig& config, RhoHat rho_hat = RhoHat::kDisagreement);

enum class GapMetric {
  kExcessRisk,  // held-out fused squared error of g minus that of g*
  kWeightL1,    // held-out mean |g(psi) - g*(x)|
};

struct SampleComplexityConfig {
  SimConfig sim;
  std::vector<std::size_t> sizes{500, 1000, 2000, 4000, 8000, 16000, 32000};
  std::size_t seeds = 3;
  std::size_t test_samples = 20000;
  GateTrainConfig train;
  TheoryConfig theory;
  GapMetric metric = GapMetric::kExcessRisk;
  std::uint64_t master_seed = 2024;
  /// Mean gaps within this of zero (relative to the oracle risk for excess
  /// risk) mark the experiment degenerate.
  double degenerate_tolerance = 1e-6;
  bool regime_analysis = true;

  void validate() const;
};

/// Simulator task on which the gate can learn the oracle: the noise level of
/// each source is a smooth function of its own confidence.
[[nodiscard]] SampleComplexityConfig default_sample_complexity_config();

struct ExperimentCell {
  std::size_t n = 0;
  std::size_t seed_index = 0;
  double gap = 0.0;  // value of the selected metric
  double weight_gap = 0.0;
  double excess_risk = 0.0;
  double learned_risk = 0.0;
  double oracle_risk = 0.0;
  std::size_t best_epoch = 0;
};

struct TheoryReport {
  double n = 0.0;  // sample count the diagnostics refer to
  double k = 0.0;
  double sqrt_k_over_n = 0.0;
  double predicted_gap_simple = 0.0;
  double predicted_gap_test3 = 0.0;
  std::optional<double> boundary_fraction;
  std::optional<RegimeSummary> regimes;

  std::vector<ExperimentCell> cells;
  std::vector<ConvergencePoint> mean_gaps;  // averaged over seeds, per n
  std::optional<SlopeFit> slope;
  std::optional<double> calibrated_constant;   // C fitted at the smallest n
  std::optional<bool> bound_holds_at_largest_n;
  std::vector<std::string> notes;
};

/// k, sqrt(k/n) and both gap variants at sample count n.
TheoryReport theory_diagnostics(double n, const TheoryConfig& config);

/// For each (n, seed) trains a gate on n simulated pairs, measures the
/// held-out gap to the oracle gate, fits the convergence slope, and
/// calibrates C at the smallest n. Cells are independent: each derives its
/// streams from (master seed, n, seed index).
TheoryReport run_sample_complexity_experiment(const SampleComplexityConfig& config);

}  // namespace layoutfuse
