#include "layoutfuse/theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "layoutfuse/error.hpp"
#include "layoutfuse/random.hpp"

namespace layoutfuse {

void TheoryConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("theory." + m); };
  if (!(psi_dim >= 1.0)) fail("psi_dim: must be >= 1");
  if (!(lipschitz_scale >= 0.0) || !std::isfinite(lipschitz_scale)) fail("lipschitz_scale: must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta: must be in (0, 1)");
  if (!std::isfinite(boundary_center)) fail("boundary_center: must be finite");
  if (!(boundary_half_width > 0.0) || !std::isfinite(boundary_half_width)) fail("boundary_half_width: must be > 0");
  if (!(gap_constant > 0.0) || !std::isfinite(gap_constant)) fail("gap_constant: must be > 0");
  if (!(ap_scale > 0.0) || !std::isfinite(ap_scale)) fail("ap_scale: must be > 0");
}

double complementarity_dimension(double psi_dim, double lipschitz_scale, double n) {
  if (!(n >= 1.0)) throw Error("complementarity_dimension: n must be >= 1");
  if (!(lipschitz_scale >= 0.0)) throw Error("complementarity_dimension: lipschitz_scale must be >= 0");
  return psi_dim * std::log1p(lipschitz_scale * std::sqrt(n));
}

GapPrediction predicted_gap(double k, double n, const TheoryConfig& config) {
  if (!(n >= 1.0)) throw Error("predicted_gap: n must be >= 1");
  if (!(k >= 0.0)) throw Error("predicted_gap: k must be >= 0");
  GapPrediction g;
  g.sqrt_k_over_n = std::sqrt(k / n);
  g.simple = config.ap_scale * config.gap_constant * g.sqrt_k_over_n;
  g.test3 = config.ap_scale * config.gap_constant * std::sqrt(k * std::log(n / config.delta) / n);
  return g;
}

double complementarity_factor(double sigma_t, double sigma_l, double rho_hat) {
  const double lo = std::min(sigma_t, sigma_l);
  if (!(lo > 0.0)) throw Error("complementarity_factor: sigmas must be positive");
  if (!(rho_hat >= 0.0 && rho_hat <= 1.0)) throw Error("complementarity_factor: rho_hat must be in [0, 1]");
  return std::abs(sigma_t - sigma_l) / lo - 2.0 * rho_hat;
}

Regime classify_regime(double gamma, const TheoryConfig& config) {
  return std::abs(gamma - config.boundary_center) <= config.boundary_half_width ? Regime::kBoundary
                                                                                : Regime::kInterior;
}

double boundary_measure(std::span<const double> gammas, const TheoryConfig& config) {
  if (gammas.empty()) throw Error("boundary_measure: empty input");
  const auto count = std::count_if(gammas.begin(), gammas.end(),
                                   [&](double g) { return classify_regime(g, config) == Regime::kBoundary; });
  return static_cast<double>(count) / static_cast<double>(gammas.size());
}

SlopeFit fit_convergence_slope(std::span<const ConvergencePoint> points) {
  if (points.size() < 3) throw Error("fit_convergence_slope: at least three points are required");
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (!(p.n > 0.0)) throw Error("fit_convergence_slope: n must be positive");
    if (!(p.gap > 0.0)) throw Error("fit_convergence_slope: gaps must be positive");
    x.push_back(std::log(p.n));
    y.push_back(std::log(p.gap));
  }
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error("fit_convergence_slope: n values must not all coincide");
  SlopeFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += r * r;
  }
  fit.slope_stderr = std::sqrt(sse / (m - 2.0) / sxx);
  return fit;
}

double RegimeSummary::separation_sigmas() const {
  const double se = std::sqrt(boundary_stderr * boundary_stderr + interior_stderr * interior_stderr);
  const double diff = boundary_mean_residual - interior_mean_residual;
  if (se > 0.0) return diff / se;
  return diff > 0.0 ? INFINITY : (diff < 0.0 ? -INFINITY : 0.0);
}

RegimeSummary analyze_regimes(const GateParams& gate, std::span<const OracleSample> samples, double rho,
                              const TheoryConfig& config, RhoHat rho_hat) {
  if (samples.empty()) throw Error("analyze_regimes: empty sample");
  double sum[2] = {0, 0}, sq[2] = {0, 0};
  std::size_t count[2] = {0, 0};
  for (const auto& s : samples) {
    const double rh = rho_hat == RhoHat::kDisagreement ? (s.disagree ? 1.0 : 0.0) : rho;
    const double gamma = complementarity_factor(s.sigma_teacher, s.sigma_llm, rh);
    const int b = classify_regime(gamma, config) == Regime::kBoundary ? 1 : 0;
    const double r = std::abs(gate_forward(gate, s.sample.input) - s.oracle_weight);
    sum[b] += r;
    sq[b] += r * r;
    ++count[b];
  }
  auto mean_se = [&](int b, double& mean, double& se) {
    if (count[b] == 0) return;
    const double n = static_cast<double>(count[b]);
    mean = sum[b] / n;
    if (count[b] > 1) se = std::sqrt(std::max(0.0, (sq[b] - n * mean * mean) / (n - 1.0)) / n);
  };
  RegimeSummary out;
  out.boundary_count = count[1];
  out.interior_count = count[0];
  mean_se(1, out.boundary_mean_residual, out.boundary_stderr);
  mean_se(0, out.interior_mean_residual, out.interior_stderr);
  out.boundary_fraction = static_cast<double>(count[1]) / static_cast<double>(samples.size());
  return out;
}

void SampleComplexityConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("experiment." + m); };
  sim.validate();
  train.validate();
  theory.validate();
  if (sizes.size() < 4) fail("sizes: at least four sample sizes are required");
  if (std::set<std::size_t>(sizes.begin(), sizes.end()).size() != sizes.size()) fail("sizes: must be distinct");
  for (std::size_t n : sizes)
    if (n < 100) fail("sizes: every size must be >= 100");
  if (seeds == 0) fail("seeds: must be >= 1");
  if (test_samples < 100) fail("test_samples: must be >= 100");
  if (!(degenerate_tolerance >= 0.0)) fail("degenerate_tolerance: must be >= 0");
}

SampleComplexityConfig default_sample_complexity_config() {
  SampleComplexityConfig c;
  c.sim = default_sim_config();
  c.sim.noise_confidence_coupling = 0.5;
  c.sim.noise_hidden_spread = 0.0;
  c.train.epochs = 40;
  c.train.learning_rate = 0.1;
  // the oracle is defined by box risk alone
  c.train.confidence_weight = 0.0;
  c.metric = GapMetric::kExcessRisk;
  return c;
}

TheoryReport theory_diagnostics(double n, const TheoryConfig& config) {
  config.validate();
  TheoryReport r;
  r.n = n;
  r.k = complementarity_dimension(config.psi_dim, config.lipschitz_scale, n);
  const GapPrediction g = predicted_gap(r.k, n, config);
  r.sqrt_k_over_n = g.sqrt_k_over_n;
  r.predicted_gap_simple = g.simple;
  r.predicted_gap_test3 = g.test3;
  return r;
}

namespace {

double fused_error(double g, const GateSample& s) {
  const auto t = s.teacher_box.coords();
  const auto l = s.llm_box.coords();
  const auto y = s.truth_box.coords();
  double e = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    const double r = g * t[c] + (1.0 - g) * l[c] - y[c];
    e += r * r;
  }
  return e / 4.0;
}

}  // namespace

TheoryReport run_sample_complexity_experiment(const SampleComplexityConfig& config) {
  config.validate();
  std::vector<std::size_t> sizes = config.sizes;
  std::sort(sizes.begin(), sizes.end());

  TheoryReport report = theory_diagnostics(static_cast<double>(sizes.back()), config.theory);
  const auto test = sample_oracle_pairs(config.sim, config.test_samples, derive_seed(config.master_seed, 0x7e57));
  double oracle_risk = 0.0;
  for (const auto& s : test) oracle_risk += fused_error(s.oracle_weight, s.sample);
  oracle_risk /= static_cast<double>(test.size());

  std::optional<GateParams> largest_gate;
  for (std::size_t n : sizes) {
    double gap_sum = 0.0;
    for (std::size_t seed = 0; seed < config.seeds; ++seed) {
      const std::uint64_t cell_seed = derive_seed(config.master_seed, n, seed + 1);
      std::vector<GateSample> train;
      train.reserve(n);
      for (auto& s : sample_oracle_pairs(config.sim, n, cell_seed)) train.push_back(s.sample);
      GateTrainConfig tc = config.train;
      tc.seed = derive_seed(cell_seed, 0x9a7e);
      const GateTrainResult trained = train_gate(train, tc);

      ExperimentCell cell;
      cell.n = n;
      cell.seed_index = seed;
      cell.best_epoch = trained.best_epoch;
      cell.oracle_risk = oracle_risk;
      double weight_gap = 0.0;
      double risk = 0.0;
      for (const auto& s : test) {
        const double g = gate_forward(trained.params, s.sample.input);
        weight_gap += std::abs(g - s.oracle_weight);
        risk += fused_error(g, s.sample);
      }
      const double m = static_cast<double>(test.size());
      cell.weight_gap = weight_gap / m;
      cell.learned_risk = risk / m;
      cell.excess_risk = cell.learned_risk - oracle_risk;
      cell.gap = config.metric == GapMetric::kWeightL1 ? cell.weight_gap : cell.excess_risk;
      gap_sum += cell.gap;
      report.cells.push_back(cell);
      if (n == sizes.back() && seed == 0) largest_gate = trained.params;
    }
    report.mean_gaps.push_back({static_cast<double>(n), gap_sum / static_cast<double>(config.seeds)});
  }

  // excess risk is compared relative to the oracle risk, the weight gap as is
  const double unit = config.metric == GapMetric::kExcessRisk && oracle_risk > 0.0 ? oracle_risk : 1.0;
  const bool degenerate = std::all_of(report.mean_gaps.begin(), report.mean_gaps.end(), [&](const auto& p) {
    return std::abs(p.gap) <= config.degenerate_tolerance * unit;
  });
  const bool nonpositive =
      std::any_of(report.mean_gaps.begin(), report.mean_gaps.end(), [](const auto& p) { return !(p.gap > 0.0); });
  if (degenerate) {
    report.notes.push_back("degenerate gaps: all mean gaps are within tolerance of zero; slope fit skipped");
  } else if (nonpositive) {
    report.notes.push_back("nonpositive mean gap at some n; slope fit skipped");
  } else {
    report.slope = fit_convergence_slope(report.mean_gaps);
    const double n0 = report.mean_gaps.front().n;
    const GapPrediction unit0 =
        predicted_gap(complementarity_dimension(config.theory.psi_dim, config.theory.lipschitz_scale, n0), n0,
                      config.theory);
    report.calibrated_constant = report.mean_gaps.front().gap / (config.theory.ap_scale * unit0.sqrt_k_over_n);
    const double bound_last = config.theory.ap_scale * *report.calibrated_constant * report.sqrt_k_over_n;
    report.bound_holds_at_largest_n = report.mean_gaps.back().gap <= bound_last;
  }

  const bool sigmas_positive = std::all_of(test.begin(), test.end(), [](const OracleSample& s) {
    return s.sigma_teacher > 0.0 && s.sigma_llm > 0.0;
  });
  if (config.regime_analysis && largest_gate && !sigmas_positive)
    report.notes.push_back("regime analysis skipped: zero noise level in the test set");
  if (config.regime_analysis && largest_gate && sigmas_positive) {
    report.regimes = analyze_regimes(*largest_gate, test, config.sim.rho, config.theory);
    report.boundary_fraction = report.regimes->boundary_fraction;
  }
  return report;
}

}  // namespace layoutfuse
