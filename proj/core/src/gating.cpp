#include "layoutfuse/gating.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "layoutfuse/calibration.hpp"
#include "layoutfuse/error.hpp"
#include "layoutfuse/random.hpp"

namespace layoutfuse {

PsiFeatures extract_psi(double p_t, double s_l, double iou_value) {
  return {std::clamp(p_t, 0.0, 1.0), std::clamp(s_l, 0.0, 1.0), std::clamp(iou_value, 0.0, 1.0)};
}

PsiFeatures extract_psi(const TeacherPrediction& teacher, const LlmRegion& llm, const MatchResult& match) {
  return extract_psi(teacher.confidence, llm.score, match.iou);
}

std::size_t GateParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void GateParams::validate() const {
  const std::size_t in = arch.input_count();
  const std::array<std::pair<std::size_t, std::size_t>, 3> dims{
      {{in, arch.hidden}, {arch.hidden, arch.hidden}, {arch.hidden, 1}}};
  if (arch.hidden == 0) throw Error("gate: hidden width must be >= 1");
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& l = layers[i];
    if (l.inputs != dims[i].first || l.outputs != dims[i].second || l.weights.size() != l.inputs * l.outputs ||
        l.bias.size() != l.outputs) {
      throw Error("gate: layer " + std::to_string(i) + " dimensions do not match the architecture");
    }
    for (double w : l.weights)
      if (!std::isfinite(w)) throw Error("gate: non-finite weight in layer " + std::to_string(i));
    for (double b : l.bias)
      if (!std::isfinite(b)) throw Error("gate: non-finite bias in layer " + std::to_string(i));
  }
}

namespace {

DenseLayer make_layer(std::size_t inputs, std::size_t outputs) {
  return {inputs, outputs, std::vector<double>(inputs * outputs, 0.0), std::vector<double>(outputs, 0.0)};
}

double squash(OutputSquash s, double z) {
  return s == OutputSquash::kSigmoid ? sigmoid(z) : std::clamp(z, 0.0, 1.0);
}

// Activations of one forward pass, kept for backpropagation.
struct Trace {
  std::vector<double> h1, h2;
  double z3 = 0.0;
  double g = 0.0;
};

void forward(const GateParams& p, std::span<const double> x, Trace& tr) {
  const auto& l0 = p.layers[0];
  const auto& l1 = p.layers[1];
  const auto& l2 = p.layers[2];
  tr.h1.resize(l0.outputs);
  tr.h2.resize(l1.outputs);
  for (std::size_t o = 0; o < l0.outputs; ++o) {
    double z = l0.bias[o];
    const double* w = &l0.weights[o * l0.inputs];
    for (std::size_t i = 0; i < l0.inputs; ++i) z += w[i] * x[i];
    tr.h1[o] = std::tanh(z);
  }
  for (std::size_t o = 0; o < l1.outputs; ++o) {
    double z = l1.bias[o];
    const double* w = &l1.weights[o * l1.inputs];
    for (std::size_t i = 0; i < l1.inputs; ++i) z += w[i] * tr.h1[i];
    tr.h2[o] = std::tanh(z);
  }
  double z = l2.bias[0];
  for (std::size_t i = 0; i < l2.inputs; ++i) z += l2.weights[i] * tr.h2[i];
  tr.z3 = z;
  tr.g = squash(p.arch.squash, z);
}

}  // namespace

GateParams zero_gate_params(const GateArchitecture& arch) {
  GateParams p;
  p.arch = arch;
  p.layers = {make_layer(arch.input_count(), arch.hidden), make_layer(arch.hidden, arch.hidden),
              make_layer(arch.hidden, 1)};
  return p;
}

GateParams init_gate_params(const GateArchitecture& arch, std::uint64_t seed) {
  GateParams p = zero_gate_params(arch);
  Rng rng(derive_seed(seed, 0x1417));
  for (auto& l : p.layers) {
    const double a = 1.0 / std::sqrt(static_cast<double>(l.inputs));
    for (double& w : l.weights) w = rng.uniform(-a, a);
  }
  return p;
}

std::vector<double> gate_features(const GateInput& input, const GateArchitecture& arch) {
  std::vector<double> f{input.psi.p_t, input.psi.s_l, input.psi.iou};
  if (arch.quality_inputs) {
    f.push_back(input.q_text);
    f.push_back(input.q_spatial);
  }
  return f;
}

double gate_forward(const GateParams& params, std::span<const double> features) {
  if (features.size() != params.arch.input_count() || params.layers[0].inputs != features.size())
    throw Error("gate_forward: expected " + std::to_string(params.arch.input_count()) + " inputs, got " +
                std::to_string(features.size()));
  Trace tr;
  forward(params, features, tr);
  return tr.g;
}

double gate_forward(const GateParams& params, const GateInput& input) {
  const auto f = gate_features(input, params.arch);
  return gate_forward(params, f);
}

double gate_forward(const GateParams& params, const PsiFeatures& psi) { return gate_forward(params, GateInput{psi}); }

// ---------------------------------------------------------------------------
// Serialization

std::string gate_to_json(const GateParams& params) {
  using nlohmann::json;
  json layers = json::array();
  for (const auto& l : params.layers) {
    layers.push_back({{"inputs", l.inputs}, {"outputs", l.outputs}, {"weights", l.weights}, {"bias", l.bias}});
  }
  json doc = {
      {"format", "layoutfuse-gate"},
      {"version", 1},
      {"gate_weights", "teacher"},
      {"architecture",
       {{"inputs", params.arch.input_count()},
        {"hidden", {params.arch.hidden, params.arch.hidden}},
        {"activation", "tanh"},
        {"output", params.arch.squash == OutputSquash::kSigmoid ? "sigmoid" : "clip"},
        {"quality_inputs", params.arch.quality_inputs}}},
      {"parameter_count", params.parameter_count()},
      {"layers", std::move(layers)},
  };
  return doc.dump();
}

GateParams gate_from_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("gate file: malformed JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "layoutfuse-gate") throw Error("gate file: unexpected format tag");
    if (!doc.contains("version")) throw Error("gate file: missing version");
    if (doc.at("version").get<int>() != 1) throw Error("gate file: unsupported version");
    if (doc.value("gate_weights", std::string("teacher")) != "teacher")
      throw Error("gate file: only teacher-weight gates are supported");
    const json& a = doc.at("architecture");
    GateArchitecture arch;
    const auto hidden = a.at("hidden").get<std::vector<std::size_t>>();
    if (hidden.size() != 2 || hidden[0] != hidden[1]) throw Error("gate file: expected two equal hidden layers");
    arch.hidden = hidden[0];
    arch.quality_inputs = a.value("quality_inputs", false);
    const auto out = a.at("output").get<std::string>();
    if (out == "sigmoid") arch.squash = OutputSquash::kSigmoid;
    else if (out == "clip") arch.squash = OutputSquash::kClip;
    else throw Error("gate file: unknown output squash '" + out + "'");
    if (a.value("activation", std::string("tanh")) != "tanh") throw Error("gate file: only tanh is supported");
    if (a.at("inputs").get<std::size_t>() != arch.input_count()) throw Error("gate file: input count mismatch");

    GateParams p;
    p.arch = arch;
    const json& layers = doc.at("layers");
    if (!layers.is_array() || layers.size() != 3) throw Error("gate file: expected 3 layers");
    for (std::size_t i = 0; i < 3; ++i) {
      p.layers[i].inputs = layers[i].at("inputs").get<std::size_t>();
      p.layers[i].outputs = layers[i].at("outputs").get<std::size_t>();
      p.layers[i].weights = layers[i].at("weights").get<std::vector<double>>();
      p.layers[i].bias = layers[i].at("bias").get<std::vector<double>>();
    }
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw Error(std::string("gate file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Training

void GateTrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("gate_training." + m); };
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning_rate: must be >= 0");
  if (epochs == 0) fail("epochs: must be >= 1");
  if (batch_size == 0) fail("batch_size: must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) fail("validation_fraction: must be in (0, 1)");
  if (!(box_weight >= 0.0) || !(confidence_weight >= 0.0)) fail("loss weights: must be >= 0");
  if (!(final_lr_fraction >= 0.0 && final_lr_fraction <= 1.0)) fail("final_lr_fraction: must be in [0, 1]");
  if (arch.hidden == 0) fail("hidden: must be >= 1");
}

double source_box_scale(std::span<const GateSample> samples) {
  if (samples.empty()) return 1.0;
  double total = 0.0;
  for (const auto& s : samples) {
    const auto t = s.teacher_box.coords();
    const auto l = s.llm_box.coords();
    const auto y = s.truth_box.coords();
    for (std::size_t c = 0; c < 4; ++c) total += (t[c] - y[c]) * (t[c] - y[c]) + (l[c] - y[c]) * (l[c] - y[c]);
  }
  const double scale = total / (8.0 * static_cast<double>(samples.size()));
  return scale > 0.0 ? scale : 1.0;
}

namespace {

struct SampleTerms {
  double loss = 0.0;
  double dloss_dg = 0.0;
};

SampleTerms sample_terms(double g, const GateSample& s, double box_scale, const GateTrainConfig& cfg) {
  SampleTerms out;
  const auto t = s.teacher_box.coords();
  const auto l = s.llm_box.coords();
  const auto y = s.truth_box.coords();
  const double norm = 1.0 / (4.0 * box_scale);
  for (std::size_t c = 0; c < 4; ++c) {
    const double r = g * t[c] + (1.0 - g) * l[c] - y[c];
    out.loss += cfg.box_weight * norm * r * r;
    out.dloss_dg += cfg.box_weight * norm * 2.0 * r * (t[c] - l[c]);
  }
  if (cfg.confidence_weight > 0.0) {
    const double lt = logit(s.input.psi.p_t);
    const double ll = logit(s.input.psi.s_l);
    const double u = g * lt + (1.0 - g) * ll;
    const double target = s.llm_correct ? 1.0 : 0.0;
    // BCE with logits: softplus(u) - target * u
    const double softplus = u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
    out.loss += cfg.confidence_weight * (softplus - target * u);
    out.dloss_dg += cfg.confidence_weight * (sigmoid(u) - target) * (lt - ll);
  }
  return out;
}

struct Gradient {
  std::array<DenseLayer, 3> layers;
  void reset(const GateParams& p) {
    for (std::size_t i = 0; i < 3; ++i) {
      layers[i].weights.assign(p.layers[i].weights.size(), 0.0);
      layers[i].bias.assign(p.layers[i].bias.size(), 0.0);
    }
  }
};

// Accumulates d(loss)/d(theta) for one sample given d(loss)/dg.
void backward(const GateParams& p, std::span<const double> x, const Trace& tr, double dloss_dg, Gradient& grad,
              std::vector<double>& d2, std::vector<double>& d1) {
  const auto& l1 = p.layers[1];
  const auto& l2 = p.layers[2];
  double dz3 = dloss_dg;
  if (p.arch.squash == OutputSquash::kSigmoid) {
    dz3 *= tr.g * (1.0 - tr.g);
  } else if (tr.z3 < 0.0 || tr.z3 > 1.0) {
    dz3 = 0.0;
  }
  if (dz3 == 0.0) return;
  const std::size_t h = l2.inputs;
  grad.layers[2].bias[0] += dz3;
  d2.resize(h);
  for (std::size_t i = 0; i < h; ++i) {
    grad.layers[2].weights[i] += dz3 * tr.h2[i];
    d2[i] = dz3 * l2.weights[i] * (1.0 - tr.h2[i] * tr.h2[i]);
  }
  d1.assign(l1.inputs, 0.0);
  for (std::size_t o = 0; o < l1.outputs; ++o) {
    const double d = d2[o];
    grad.layers[1].bias[o] += d;
    double* gw = &grad.layers[1].weights[o * l1.inputs];
    const double* w = &l1.weights[o * l1.inputs];
    for (std::size_t i = 0; i < l1.inputs; ++i) {
      gw[i] += d * tr.h1[i];
      d1[i] += d * w[i];
    }
  }
  const auto& l0 = p.layers[0];
  for (std::size_t o = 0; o < l0.outputs; ++o) {
    const double d = d1[o] * (1.0 - tr.h1[o] * tr.h1[o]);
    grad.layers[0].bias[o] += d;
    double* gw = &grad.layers[0].weights[o * l0.inputs];
    for (std::size_t i = 0; i < l0.inputs; ++i) gw[i] += d * x[i];
  }
}

double mean_loss(const GateParams& p, std::span<const GateSample> samples, std::span<const std::size_t> idx,
                 double box_scale, const GateTrainConfig& cfg) {
  if (idx.empty()) return 0.0;
  Trace tr;
  double total = 0.0;
  for (std::size_t i : idx) {
    const auto f = gate_features(samples[i].input, p.arch);
    forward(p, f, tr);
    total += sample_terms(tr.g, samples[i], box_scale, cfg).loss;
  }
  return total / static_cast<double>(idx.size());
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

double gate_sample_loss(double gate, const GateSample& sample, double box_scale, const GateTrainConfig& config) {
  return sample_terms(gate, sample, box_scale, config).loss;
}

GateTrainResult train_gate(std::span<const GateSample> samples, const GateTrainConfig& config) {
  config.validate();
  if (samples.size() < 100) throw Error("train_gate: at least 100 samples are required");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(derive_seed(config.seed, 0x5b117));
  shuffle(order, split_rng);
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(samples.size()))), 1,
      samples.size() - 1);
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  std::vector<GateSample> train_samples;
  train_samples.reserve(train.size());
  for (std::size_t i : train) train_samples.push_back(samples[i]);

  GateTrainResult result;
  result.box_scale = source_box_scale(train_samples);
  GateParams params = init_gate_params(config.arch, config.seed);
  result.params = params;
  double best_val = mean_loss(params, samples, val, result.box_scale, config);
  result.history.push_back({0, mean_loss(params, samples, train, result.box_scale, config), best_val});
  if (!std::isfinite(result.history[0].train_loss) || !std::isfinite(best_val))
    throw Error("train_gate: non-finite loss at epoch 0");

  Gradient grad;
  Trace tr;
  std::vector<double> d1, d2;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double progress =
        config.epochs > 1 ? static_cast<double>(epoch - 1) / static_cast<double>(config.epochs - 1) : 0.0;
    const double lr = config.learning_rate * (1.0 - (1.0 - config.final_lr_fraction) * progress);
    Rng rng(derive_seed(config.seed, 0xe90c, epoch));
    shuffle(train, rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train.size(); start += config.batch_size) {
      const std::size_t end = std::min(train.size(), start + config.batch_size);
      grad.reset(params);
      for (std::size_t j = start; j < end; ++j) {
        const GateSample& s = samples[train[j]];
        const auto f = gate_features(s.input, params.arch);
        forward(params, f, tr);
        const SampleTerms terms = sample_terms(tr.g, s, result.box_scale, config);
        epoch_loss += terms.loss;
        backward(params, f, tr, terms.dloss_dg, grad, d2, d1);
      }
      const double step = lr / static_cast<double>(end - start);
      for (std::size_t l = 0; l < 3; ++l) {
        auto& w = params.layers[l].weights;
        auto& b = params.layers[l].bias;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * grad.layers[l].weights[i];
        for (std::size_t i = 0; i < b.size(); ++i) b[i] -= step * grad.layers[l].bias[i];
      }
    }
    epoch_loss /= static_cast<double>(train.size());
    if (!std::isfinite(epoch_loss)) throw Error("train_gate: non-finite loss at epoch " + std::to_string(epoch));
    const double val_loss = mean_loss(params, samples, val, result.box_scale, config);
    if (!std::isfinite(val_loss))
      throw Error("train_gate: non-finite validation loss at epoch " + std::to_string(epoch));
    result.history.push_back({epoch, epoch_loss, val_loss});
    if (val_loss < best_val) {
      best_val = val_loss;
      result.params = params;
      result.best_epoch = epoch;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

LipschitzEstimate estimate_lipschitz(const GateParams& params, std::span<const GateInput> points,
                                     std::size_t max_pairs, std::uint64_t seed) {
  if (points.size() < 2) throw Error("estimate_lipschitz: at least two points are required");
  std::vector<std::vector<double>> x;
  std::vector<double> g;
  x.reserve(points.size());
  for (const auto& p : points) {
    x.push_back(gate_features(p, params.arch));
    g.push_back(gate_forward(params, x.back()));
  }
  auto distance = [&](std::size_t i, std::size_t j) {
    double d = 0.0;
    for (std::size_t k = 0; k < x[i].size(); ++k) d += (x[i][k] - x[j][k]) * (x[i][k] - x[j][k]);
    return std::sqrt(d);
  };

  LipschitzEstimate est;
  bool any_distinct = false;
  auto visit = [&](std::size_t i, std::size_t j) {
    const double d = distance(i, j);
    ++est.pairs;
    if (d < 1e-9) return;
    any_distinct = true;
    est.value = std::max(est.value, std::abs(g[i] - g[j]) / d);
  };

  const std::size_t m = points.size();
  const double all_pairs = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
  if (all_pairs <= static_cast<double>(max_pairs)) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) visit(i, j);
  } else {
    est.subsampled = true;
    Rng rng(seed);
    for (std::size_t s = 0; s < max_pairs; ++s) {
      const std::size_t i = rng.below(m);
      std::size_t j = rng.below(m - 1);
      if (j >= i) ++j;
      visit(i, j);
    }
  }
  if (!any_distinct) throw Error("estimate_lipschitz: all points coincide");
  return est;
}

}  // namespace layoutfuse
