#include "layoutfuse/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "layoutfuse/error.hpp"

namespace layoutfuse {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) {
  const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(q) - std::log1p(-q);
}

double apply_temperature(double p, double temperature) {
  if (!(temperature > 0.0)) throw Error("apply_temperature: temperature must be > 0");
  if (temperature == 1.0) return p;
  return sigmoid(logit(p) / temperature);
}

double temperature_nll(std::span<const double> confidences, const std::vector<bool>& correct, double temperature) {
  if (confidences.size() != correct.size()) throw Error("temperature_nll: length mismatch");
  if (confidences.empty()) throw Error("temperature_nll: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double z = logit(confidences[i]) / temperature;
    // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z)
    const double s = correct[i] ? -z : z;
    total += s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  }
  return total / static_cast<double>(confidences.size());
}

TemperatureFit fit_temperature(std::span<const double> confidences, const std::vector<bool>& correct,
                               const TemperatureSearch& search) {
  if (confidences.size() != correct.size()) throw Error("fit_temperature: length mismatch");
  if (confidences.size() < 10) throw Error("fit_temperature: at least 10 samples are required");
  const auto positives = std::count(correct.begin(), correct.end(), true);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(correct.size()))
    throw Error("fit_temperature: both outcomes must be present (NLL is unbounded otherwise)");
  if (!(search.lower > 0.0 && search.upper > search.lower && search.tolerance > 0.0))
    throw Error("fit_temperature: invalid search interval");

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = search.lower;
  double b = search.upper;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = temperature_nll(confidences, correct, c);
  double fd = temperature_nll(confidences, correct, d);
  int iterations = 0;
  while (b - a > search.tolerance) {
    ++iterations;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = temperature_nll(confidences, correct, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = temperature_nll(confidences, correct, d);
    }
  }
  const double t = 0.5 * (a + b);
  return {t, temperature_nll(confidences, correct, t), iterations};
}

}  // namespace layoutfuse
