#include "layoutfuse/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "layoutfuse/error.hpp"

namespace layoutfuse {

using nlohmann::json;

namespace {

std::string type_word(const json& j) {
  if (j.is_number_unsigned() || j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

// Reads the fields of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object, got " + type_word(j_));
  }

  [[nodiscard]] const json* find(const std::string& key) {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  [[nodiscard]] std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "expected a number, got " + type_word(*v));
      out = v->get<double>();
    }
  }
  void read(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0))
        fail(key, "expected a non-negative integer, got " + type_word(*v));
      out = v->get<std::size_t>();
    }
  }
  void read(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(key, "expected an integer, got " + type_word(*v));
      out = v->get<int>();
    }
  }
  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(key, "expected a boolean, got " + type_word(*v));
      out = v->get<bool>();
    }
  }
  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key, "expected a string, got " + type_word(*v));
      out = v->get<std::string>();
    }
  }
  void read(const std::string& key, std::vector<std::string>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key, "expected an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) fail(key, "expected an array of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }
  void read(const std::string& key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key, "expected an array of non-negative integers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number_unsigned()) fail(key, "expected an array of non-negative integers");
        out.push_back(e.get<std::size_t>());
      }
    }
  }
  void read(const std::string& key, std::vector<CategoryPair>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key, "expected an array of [category, category] pairs");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
          fail(key, "expected an array of [category, category] pairs");
        out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
      }
    }
  }
  void read(const std::string& key, std::map<std::string, double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_object()) fail(key, "expected an object of numbers");
      out.clear();
      for (const auto& [name, value] : v->items()) {
        if (!value.is_number()) fail(key + "." + name, "expected a number, got " + type_word(value));
        out[name] = value.get<double>();
      }
    }
  }
  // Accepts {"name": p, ...} or [["name", p], ...]; the array form keeps order.
  void read(const std::string& key, std::vector<std::pair<std::string, double>>& out) {
    if (const json* v = find(key)) {
      out.clear();
      if (v->is_object()) {
        for (const auto& [name, value] : v->items()) {
          if (!value.is_number()) fail(key + "." + name, "expected a number, got " + type_word(value));
          out.emplace_back(name, value.get<double>());
        }
      } else if (v->is_array()) {
        for (const auto& e : *v) {
          if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number())
            fail(key, "expected [category, probability] pairs");
          out.emplace_back(e[0].get<std::string>(), e[1].get<double>());
        }
      } else {
        fail(key, "expected an object or an array of pairs");
      }
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError(field(key) + ": " + message);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.count(key)) throw ConfigError(field(key) + ": unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

json parse_document(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": malformed JSON: " + e.what());
  }
}

void read_fusion(const json& j, const std::string& path, FusionConfig& c) {
  Section s(j, path);
  s.read("iou_threshold", c.iou_threshold);
  s.read("box_alpha", c.box_alpha);
  s.read("weight_teacher", c.weight_teacher);
  s.read("weight_llm", c.weight_llm);
  s.read("temperature_teacher", c.temperature_teacher);
  s.read("temperature_llm", c.temperature_llm);
  s.read("soft_score_min", c.soft_score_min);
  s.read("soft_categories", c.soft_categories);
  s.read("smoothing", c.smoothing);
  s.read("confusable_pairs", c.confusable_pairs);
  s.read("llm_variance_scale", c.llm_variance_scale);
  s.finish();
}

void read_curriculum(const json& j, const std::string& path, CurriculumConfig& c) {
  Section s(j, path);
  s.read("warmup_epochs", c.warmup_epochs);
  s.read("fusion_start_epoch", c.fusion_start_epoch);
  s.read("soft_start_epoch", c.soft_start_epoch);
  s.read("threshold_frequent", c.threshold_frequent);
  s.read("threshold_rare", c.threshold_rare);
  s.read("regeneration_period", c.regeneration_period);
  s.read("ema_momentum", c.ema_momentum);
  s.read("lambda_pseudo", c.lambda_pseudo);
  s.read("lambda_cons", c.lambda_cons);
  s.finish();
}

void read_simulator(const json& j, const std::string& path, SimConfig& c) {
  Section s(j, path);
  s.read("pages", c.pages);
  s.read("regions_min", c.regions_min);
  s.read("regions_max", c.regions_max);
  s.read("grid_rows", c.grid_rows);
  s.read("grid_cols", c.grid_cols);
  s.read("taxonomy", c.taxonomy);
  s.read("category_frequencies", c.category_frequencies);
  s.read("sigma_teacher", c.sigma_teacher);
  s.read("sigma_llm", c.sigma_llm);
  s.read("sigma_teacher_by_category", c.sigma_teacher_by_category);
  s.read("sigma_llm_by_category", c.sigma_llm_by_category);
  s.read("rho", c.rho);
  s.read("noise_confidence_coupling", c.noise_confidence_coupling);
  s.read("noise_hidden_spread", c.noise_hidden_spread);
  s.read("teacher_confusion", c.teacher_confusion);
  s.read("llm_confusion", c.llm_confusion);
  s.read("confusion_pairs", c.confusion_pairs);
  s.read("confidence_spread", c.confidence_spread);
  s.read("teacher_temperature", c.teacher_temperature);
  s.read("llm_temperature", c.llm_temperature);
  s.read("teacher_miss_rate", c.teacher_miss_rate);
  s.read("llm_miss_rate", c.llm_miss_rate);
  s.read("emit_coord_var", c.emit_coord_var);
  std::size_t seed = c.seed;
  s.read("seed", seed);
  c.seed = seed;
  s.finish();
}

void read_gate_training(const json& j, const std::string& path, GateTrainConfig& c) {
  Section s(j, path);
  s.read("learning_rate", c.learning_rate);
  s.read("epochs", c.epochs);
  s.read("batch_size", c.batch_size);
  std::size_t seed = c.seed;
  s.read("seed", seed);
  c.seed = seed;
  s.read("validation_fraction", c.validation_fraction);
  s.read("box_weight", c.box_weight);
  s.read("confidence_weight", c.confidence_weight);
  s.read("final_lr_fraction", c.final_lr_fraction);
  s.read("hidden", c.arch.hidden);
  s.read("quality_inputs", c.arch.quality_inputs);
  std::string output = c.arch.squash == OutputSquash::kSigmoid ? "sigmoid" : "clip";
  s.read("output", output);
  if (output == "sigmoid") c.arch.squash = OutputSquash::kSigmoid;
  else if (output == "clip") c.arch.squash = OutputSquash::kClip;
  else s.fail("output", "expected \"sigmoid\" or \"clip\"");
  s.finish();
}

void read_theory(const json& j, const std::string& path, TheoryConfig& c) {
  Section s(j, path);
  s.read("psi_dim", c.psi_dim);
  s.read("lipschitz_scale", c.lipschitz_scale);
  s.read("delta", c.delta);
  s.read("boundary_center", c.boundary_center);
  s.read("boundary_half_width", c.boundary_half_width);
  s.read("gap_constant", c.gap_constant);
  s.read("ap_scale", c.ap_scale);
  s.finish();
}

void read_heuristics(const json& j, const std::string& path, HeuristicConfig& c) {
  Section s(j, path);
  s.read("header_band", c.header_band);
  s.read("footer_band", c.footer_band);
  s.read("column_tolerance", c.column_tolerance);
  s.read("row_tolerance", c.row_tolerance);
  s.read("min_aligned_lines", c.min_aligned_lines);
  s.read("min_shared_columns", c.min_shared_columns);
  s.read("caption_prefixes", c.caption_prefixes);
  s.read("region_score", c.region_score);
  s.read("region_quality", c.region_quality);
  s.finish();
}

void read_experiment(const json& j, const std::string& path, SampleComplexityConfig& c) {
  Section s(j, path);
  s.read("sizes", c.sizes);
  s.read("seeds", c.seeds);
  s.read("test_samples", c.test_samples);
  std::string metric = c.metric == GapMetric::kWeightL1 ? "weight_l1" : "excess_risk";
  s.read("metric", metric);
  if (metric == "weight_l1") c.metric = GapMetric::kWeightL1;
  else if (metric == "excess_risk") c.metric = GapMetric::kExcessRisk;
  else s.fail("metric", "expected \"weight_l1\" or \"excess_risk\"");
  std::size_t seed = c.master_seed;
  s.read("master_seed", seed);
  c.master_seed = seed;
  s.read("degenerate_tolerance", c.degenerate_tolerance);
  s.read("regime_analysis", c.regime_analysis);
  if (const json* v = s.find("simulator")) read_simulator(*v, s.field("simulator"), c.sim);
  if (const json* v = s.find("gate_training")) read_gate_training(*v, s.field("gate_training"), c.train);
  if (const json* v = s.find("theory")) read_theory(*v, s.field("theory"), c.theory);
  s.finish();
}

Taxonomy read_taxonomy(const json& j, std::string& name) {
  if (j.is_string()) {
    name = j.get<std::string>();
    try {
      return Taxonomy::by_name(name);
    } catch (const Error& e) {
      throw ConfigError(std::string("taxonomy: ") + e.what());
    }
  }
  Section s(j, "taxonomy");
  const json* cats = s.find("categories");
  std::string given = "custom";
  s.read("name", given);
  s.finish();
  if (!cats || !cats->is_array()) throw ConfigError("taxonomy.categories: expected an array");
  std::vector<CategoryInfo> infos;
  for (std::size_t i = 0; i < cats->size(); ++i) {
    const std::string path = "taxonomy.categories[" + std::to_string(i) + "]";
    Section c((*cats)[i], path);
    CategoryInfo info;
    c.read("name", info.name);
    std::string rarity = "frequent";
    c.read("rarity", rarity);
    if (rarity == "rare") info.rarity = Rarity::kRare;
    else if (rarity != "frequent") c.fail("rarity", "expected \"frequent\" or \"rare\"");
    c.read("aliases", info.aliases);
    c.finish();
    if (info.name.empty()) throw ConfigError(path + ".name: required");
    infos.push_back(std::move(info));
  }
  name = given;
  return Taxonomy(std::move(infos));
}

json taxonomy_to_json(const ProjectConfig& c) {
  if (c.taxonomy_name == "doclaynet" || c.taxonomy_name == "publaynet") return c.taxonomy_name;
  json cats = json::array();
  for (const auto& info : c.taxonomy.categories())
    cats.push_back({{"name", info.name},
                    {"rarity", info.rarity == Rarity::kRare ? "rare" : "frequent"},
                    {"aliases", info.aliases}});
  return {{"name", c.taxonomy_name}, {"categories", cats}};
}

json pairs_to_json(const std::vector<CategoryPair>& pairs) {
  json out = json::array();
  for (const auto& [a, b] : pairs) out.push_back({a, b});
  return out;
}

json sim_to_json(const SimConfig& c) {
  json freq = json::array();
  for (const auto& [name, p] : c.category_frequencies) freq.push_back({name, p});
  return {{"pages", c.pages},
          {"regions_min", c.regions_min},
          {"regions_max", c.regions_max},
          {"grid_rows", c.grid_rows},
          {"grid_cols", c.grid_cols},
          {"taxonomy", c.taxonomy},
          {"category_frequencies", freq},
          {"sigma_teacher", c.sigma_teacher},
          {"sigma_llm", c.sigma_llm},
          {"sigma_teacher_by_category", c.sigma_teacher_by_category},
          {"sigma_llm_by_category", c.sigma_llm_by_category},
          {"rho", c.rho},
          {"noise_confidence_coupling", c.noise_confidence_coupling},
          {"noise_hidden_spread", c.noise_hidden_spread},
          {"teacher_confusion", c.teacher_confusion},
          {"llm_confusion", c.llm_confusion},
          {"confusion_pairs", pairs_to_json(c.confusion_pairs)},
          {"confidence_spread", c.confidence_spread},
          {"teacher_temperature", c.teacher_temperature},
          {"llm_temperature", c.llm_temperature},
          {"teacher_miss_rate", c.teacher_miss_rate},
          {"llm_miss_rate", c.llm_miss_rate},
          {"emit_coord_var", c.emit_coord_var},
          {"seed", c.seed}};
}

json train_to_json(const GateTrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"validation_fraction", c.validation_fraction},
          {"box_weight", c.box_weight},
          {"confidence_weight", c.confidence_weight},
          {"final_lr_fraction", c.final_lr_fraction},
          {"hidden", c.arch.hidden},
          {"quality_inputs", c.arch.quality_inputs},
          {"output", c.arch.squash == OutputSquash::kSigmoid ? "sigmoid" : "clip"}};
}

json theory_to_json(const TheoryConfig& c) {
  return {{"psi_dim", c.psi_dim},
          {"lipschitz_scale", c.lipschitz_scale},
          {"delta", c.delta},
          {"boundary_center", c.boundary_center},
          {"boundary_half_width", c.boundary_half_width},
          {"gap_constant", c.gap_constant},
          {"ap_scale", c.ap_scale}};
}

}  // namespace

void ProjectConfig::validate() const {
  fusion.validate();
  for (const auto& c : fusion.soft_categories)
    if (!taxonomy.contains(c)) throw ConfigError("fusion.soft_categories: unknown category '" + c + "'");
  curriculum.validate();
  simulator.validate();
  gate_training.validate();
  theory.validate();
  heuristics.validate();
  experiment.validate();
}

ProjectConfig project_config_from_json(std::string_view text) {
  const json doc = parse_document(text, "config");
  ProjectConfig c;
  Section s(doc, "");
  if (const json* v = s.find("taxonomy")) c.taxonomy = read_taxonomy(*v, c.taxonomy_name);
  if (const json* v = s.find("fusion")) read_fusion(*v, "fusion", c.fusion);
  if (const json* v = s.find("curriculum")) read_curriculum(*v, "curriculum", c.curriculum);
  if (const json* v = s.find("simulator")) read_simulator(*v, "simulator", c.simulator);
  if (const json* v = s.find("gate_training")) read_gate_training(*v, "gate_training", c.gate_training);
  if (const json* v = s.find("theory")) read_theory(*v, "theory", c.theory);
  if (const json* v = s.find("heuristics")) read_heuristics(*v, "heuristics", c.heuristics);
  if (const json* v = s.find("experiment")) read_experiment(*v, "experiment", c.experiment);
  s.finish();
  c.validate();
  return c;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProjectConfig load_project_config(const std::filesystem::path& path) {
  return project_config_from_json(read_text_file(path));
}

std::string project_config_to_json(const ProjectConfig& c) {
  const auto& f = c.fusion;
  const auto& cu = c.curriculum;
  const auto& h = c.heuristics;
  const auto& e = c.experiment;
  json doc = {
      {"taxonomy", taxonomy_to_json(c)},
      {"fusion",
       {{"iou_threshold", f.iou_threshold},
        {"box_alpha", f.box_alpha},
        {"weight_teacher", f.weight_teacher},
        {"weight_llm", f.weight_llm},
        {"temperature_teacher", f.temperature_teacher},
        {"temperature_llm", f.temperature_llm},
        {"soft_score_min", f.soft_score_min},
        {"soft_categories", f.soft_categories},
        {"smoothing", f.smoothing},
        {"confusable_pairs", pairs_to_json(f.confusable_pairs)},
        {"llm_variance_scale", f.llm_variance_scale}}},
      {"curriculum",
       {{"warmup_epochs", cu.warmup_epochs},
        {"fusion_start_epoch", cu.fusion_start_epoch},
        {"soft_start_epoch", cu.soft_start_epoch},
        {"threshold_frequent", cu.threshold_frequent},
        {"threshold_rare", cu.threshold_rare},
        {"regeneration_period", cu.regeneration_period},
        {"ema_momentum", cu.ema_momentum},
        {"lambda_pseudo", cu.lambda_pseudo},
        {"lambda_cons", cu.lambda_cons}}},
      {"simulator", sim_to_json(c.simulator)},
      {"gate_training", train_to_json(c.gate_training)},
      {"theory", theory_to_json(c.theory)},
      {"heuristics",
       {{"header_band", h.header_band},
        {"footer_band", h.footer_band},
        {"column_tolerance", h.column_tolerance},
        {"row_tolerance", h.row_tolerance},
        {"min_aligned_lines", h.min_aligned_lines},
        {"min_shared_columns", h.min_shared_columns},
        {"caption_prefixes", h.caption_prefixes},
        {"region_score", h.region_score},
        {"region_quality", h.region_quality}}},
      {"experiment",
       {{"sizes", e.sizes},
        {"seeds", e.seeds},
        {"test_samples", e.test_samples},
        {"metric", e.metric == GapMetric::kWeightL1 ? "weight_l1" : "excess_risk"},
        {"master_seed", e.master_seed},
        {"degenerate_tolerance", e.degenerate_tolerance},
        {"regime_analysis", e.regime_analysis},
        {"simulator", sim_to_json(e.sim)},
        {"gate_training", train_to_json(e.train)},
        {"theory", theory_to_json(e.theory)}}},
  };
  return doc.dump();
}

FusionConfig fusion_config_from_json(std::string_view text) {
  FusionConfig c;
  read_fusion(parse_document(text, "fusion"), "fusion", c);
  c.validate();
  return c;
}

SimConfig sim_config_from_json(std::string_view text) {
  SimConfig c = default_sim_config();
  read_simulator(parse_document(text, "simulator"), "simulator", c);
  c.validate();
  return c;
}

Taxonomy taxonomy_from_json(std::string_view text) {
  std::string name;
  return read_taxonomy(parse_document(text, "taxonomy"), name);
}

}  // namespace layoutfuse
