#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layoutfuse/fusion.hpp"
#include "layoutfuse/geometry.hpp"
#include "layoutfuse/types.hpp"

namespace layoutfuse {

/// psi = (p_t, s_l, IoU), the statistic the gate is conditioned on.
struct PsiFeatures {
  double p_t = 0.0;
  double s_l = 0.0;
  double iou = 0.0;

  friend bool operator==(const PsiFeatures&, const PsiFeatures&) = default;
};

/// Projects a matched pair onto psi; components are clamped to [0, 1].
[[nodiscard]] PsiFeatures extract_psi(const TeacherPrediction& teacher, const LlmRegion& llm,
                                      const MatchResult& match);
[[nodiscard]] PsiFeatures extract_psi(double p_t, double s_l, double iou);

/// What the gate sees for one pair. The quality terms are read only when the
/// architecture enables them.
struct GateInput {
  PsiFeatures psi;
  double q_text = 1.0;
  double q_spatial = 1.0;
};

enum class OutputSquash { kSigmoid, kClip };

struct GateArchitecture {
  std::size_t hidden = 64;
  bool quality_inputs = false;
  OutputSquash squash = OutputSquash::kSigmoid;

  [[nodiscard]] std::size_t input_count() const { return quality_inputs ? 5 : 3; }
  friend bool operator==(const GateArchitecture&, const GateArchitecture&) = default;
};

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // row-major, outputs x inputs
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// input -> tanh(hidden) -> tanh(hidden) -> squash(1). The output is the
/// teacher's weight g: fused = g * teacher + (1 - g) * llm.
struct GateParams {
  GateArchitecture arch;
  std::array<DenseLayer, 3> layers;

  [[nodiscard]] std::size_t parameter_count() const;
  /// Throws Error on inconsistent dimensions or non-finite entries.
  void validate() const;

  friend bool operator==(const GateParams&, const GateParams&) = default;
};

[[nodiscard]] GateParams zero_gate_params(const GateArchitecture& arch = {});
/// Small symmetric uniform weights, zero biases.
[[nodiscard]] GateParams init_gate_params(const GateArchitecture& arch, std::uint64_t seed);

[[nodiscard]] std::vector<double> gate_features(const GateInput& input, const GateArchitecture& arch);
[[nodiscard]] double gate_forward(const GateParams& params, std::span<const double> features);
[[nodiscard]] double gate_forward(const GateParams& params, const GateInput& input);
[[nodiscard]] double gate_forward(const GateParams& params, const PsiFeatures& psi);

/// JSON document with a format/version header, the architecture, and
/// row-major weights.
[[nodiscard]] std::string gate_to_json(const GateParams& params);
[[nodiscard]] GateParams gate_from_json(std::string_view text);

struct GateSample {
  GateInput input;
  BoundingBox teacher_box;
  BoundingBox llm_box;
  BoundingBox truth_box;
  bool teacher_correct = true;
  bool llm_correct = true;
};

struct GateTrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  double validation_fraction = 0.2;
  double box_weight = 1.0;
  double confidence_weight = 0.1;
  /// Final learning rate as a fraction of the initial one; the rate decays
  /// linearly over the epochs. 1 keeps it constant.
  double final_lr_fraction = 1.0;
  GateArchitecture arch;

  void validate() const;
};

struct EpochLoss {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct GateTrainResult {
  GateParams params;
  std::vector<EpochLoss> history;
  std::size_t best_epoch = 0;  // 0 means the initialization was kept
  double box_scale = 1.0;      // normalizer of the box term
};

/// Per-sample objective used by train_gate:
///   box_weight * |g b_t + (1-g) b_l - b_true|^2 / (4 * box_scale)
///   + confidence_weight * BCE(sigmoid(g logit p_t + (1-g) logit s_l), llm_correct)
/// The resolved category of a fused pair is the LLM's (trust-LLM), so the
/// fused label is correct exactly when the LLM category is.
[[nodiscard]] double gate_sample_loss(double gate, const GateSample& sample, double box_scale,
                                      const GateTrainConfig& config);

/// Mean squared per-coordinate error of the two sources, averaged; the box
/// term is expressed in these units so that it does not vanish next to the
/// confidence term for small coordinate noise.
[[nodiscard]] double source_box_scale(std::span<const GateSample> samples);

/// Mini-batch SGD with manual backpropagation. Deterministic given
/// (config, samples); returns the parameters of the best validation epoch.
GateTrainResult train_gate(std::span<const GateSample> samples, const GateTrainConfig& config);

struct LipschitzEstimate {
  double value = 0.0;
  std::size_t pairs = 0;
  bool subsampled = false;
};

/// max |g(a) - g(b)| / |a - b| over pairs of feature vectors. Pairs closer
/// than 1e-9 are skipped; above `max_pairs` pairs are drawn uniformly with
/// the given seed.
LipschitzEstimate estimate_lipschitz(const GateParams& params, std::span<const GateInput> points,
                                     std::size_t max_pairs = 10'000'000, std::uint64_t seed = 0x5eed);

}  // namespace layoutfuse
