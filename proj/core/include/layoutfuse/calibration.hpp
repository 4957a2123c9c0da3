#pragma once

#include <span>
#include <vector>

namespace layoutfuse {

[[nodiscard]] double sigmoid(double z);
/// log(p / (1 - p)); p is clamped to [1e-12, 1 - 1e-12] first.
[[nodiscard]] double logit(double p);

/// sigmoid(logit(p) / T). Identity at T = 1.
[[nodiscard]] double apply_temperature(double p, double temperature);

/// Mean binary negative log-likelihood of temperature-scaled confidences.
[[nodiscard]] double temperature_nll(std::span<const double> confidences, const std::vector<bool>& correct,
                                     double temperature);

struct TemperatureFit {
  double temperature = 1.0;
  double nll = 0.0;
  int iterations = 0;
};

struct TemperatureSearch {
  double lower = 0.05;
  double upper = 20.0;
  double tolerance = 1e-4;
};

/// Golden-section search for the NLL-minimizing temperature. Requires at
/// least 10 samples with both outcomes present.
TemperatureFit fit_temperature(std::span<const double> confidences, const std::vector<bool>& correct,
                               const TemperatureSearch& search = {});

}  // namespace layoutfuse
