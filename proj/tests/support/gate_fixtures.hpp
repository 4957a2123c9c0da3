#pragma once

#include <vector>

#include "layoutfuse/gating.hpp"
#include "layoutfuse/simulator.hpp"

namespace fixtures {

inline std::vector<layoutfuse::GateSample> pairs(double sigma_t, double sigma_l, double rho, std::size_t n,
                                                 std::uint64_t seed) {
  layoutfuse::SimConfig sim = layoutfuse::default_sim_config();
  sim.sigma_teacher = sigma_t;
  sim.sigma_llm = sigma_l;
  sim.rho = rho;
  std::vector<layoutfuse::GateSample> out;
  for (auto& s : layoutfuse::sample_oracle_pairs(sim, n, seed)) out.push_back(s.sample);
  return out;
}

inline layoutfuse::GateTrainConfig small_train_config() {
  layoutfuse::GateTrainConfig cfg;
  cfg.arch.hidden = 8;
  cfg.epochs = 5;
  cfg.seed = 9;
  return cfg;
}

inline double mean_gate(const layoutfuse::GateParams& g, const std::vector<layoutfuse::GateSample>& s) {
  double sum = 0;
  for (const auto& x : s) sum += layoutfuse::gate_forward(g, x.input);
  return sum / static_cast<double>(s.size());
}

inline std::vector<layoutfuse::GateInput> grid_points(int steps) {
  std::vector<layoutfuse::GateInput> pts;
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < steps; ++j)
      for (int k = 0; k < steps; ++k)
        pts.push_back({{i / double(steps - 1), j / double(steps - 1), k / double(steps - 1)}});
  return pts;
}

/// Clip-squashed gate whose tanh layers run in their linear regime, so that
/// g(psi) = clamp(2 p_t, 0, 1) up to O(eps^2).
inline layoutfuse::GateParams twice_pt_gate() {
  constexpr double eps = 1e-3;
  auto g = layoutfuse::zero_gate_params({1, false, layoutfuse::OutputSquash::kClip});
  g.layers[0].weights = {eps, 0.0, 0.0};
  g.layers[1].weights = {eps};
  g.layers[2].weights = {2.0 / (eps * eps)};
  return g;
}

}  // namespace fixtures
