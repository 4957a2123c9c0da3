#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "layoutfuse/curriculum.hpp"
#include "layoutfuse/fusion.hpp"
#include "layoutfuse/gating.hpp"
#include "layoutfuse/heuristics.hpp"
#include "layoutfuse/simulator.hpp"
#include "layoutfuse/taxonomy.hpp"
#include "layoutfuse/theory.hpp"

namespace layoutfuse {

/// Every tunable of the library in one document. Each section is optional in
/// JSON and falls back to the defaults; unknown keys are rejected.
///
///   {"taxonomy": "doclaynet" | {"categories": [...]},
///    "fusion": {...}, "curriculum": {...}, "simulator": {...},
///    "gate_training": {...}, "theory": {...}, "heuristics": {...},
///    "experiment": {...}}
struct ProjectConfig {
  std::string taxonomy_name = "doclaynet";
  Taxonomy taxonomy = Taxonomy::doclaynet();
  FusionConfig fusion;
  CurriculumConfig curriculum;
  SimConfig simulator = default_sim_config();
  GateTrainConfig gate_training;
  TheoryConfig theory;
  HeuristicConfig heuristics;
  SampleComplexityConfig experiment = default_sample_complexity_config();

  void validate() const;
};

/// Throws ConfigError with the offending field path.
ProjectConfig project_config_from_json(std::string_view text);
ProjectConfig load_project_config(const std::filesystem::path& path);

/// Canonical serialization (sorted keys, full precision); the digest of a run
/// is computed over this text.
std::string project_config_to_json(const ProjectConfig& config);

FusionConfig fusion_config_from_json(std::string_view text);
SimConfig sim_config_from_json(std::string_view text);
Taxonomy taxonomy_from_json(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace layoutfuse
