#pragma once

#include <map>
#include <string>
#include <string_view>

#include "layoutfuse/curriculum.hpp"
#include "layoutfuse/metrics.hpp"
#include "layoutfuse/taxonomy.hpp"
#include "layoutfuse/theory.hpp"
#include "layoutfuse/types.hpp"

namespace layoutfuse {

/// One row per (stream, category, threshold) plus an "all" row per stream.
std::string ap_to_csv(const std::map<std::string, ApResult>& by_stream);
std::string ap_to_json(const std::map<std::string, ApResult>& by_stream);
std::string ece_to_csv(const std::map<std::string, EceResult>& by_stream);
std::string ece_to_json(const std::map<std::string, EceResult>& by_stream);

/// Rows: one per experiment cell, then summary rows (kind = summary).
std::string theory_report_to_csv(const TheoryReport& report);
std::string theory_report_to_json(const TheoryReport& report);

std::string provenance_counts_to_json(const std::map<Provenance, std::size_t>& counts);

/// epoch, sources, per-category thresholds, soft categories, regenerate.
std::string schedule_to_csv(int epochs, const Taxonomy& taxonomy, const CurriculumConfig& config);

}  // namespace layoutfuse
