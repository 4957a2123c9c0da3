#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "layoutfuse/types.hpp"

namespace layoutfuse {

struct HeuristicConfig {
  double header_band = 0.10;  // top-of-box at or above this fraction -> header (if bold)
  double footer_band = 0.90;  // top-of-box at or below this fraction -> footer
  double column_tolerance = 0.01;  // left-edge clustering tolerance in normalized x
  double row_tolerance = 0.01;     // vertical-center clustering tolerance
  std::size_t min_aligned_lines = 2;
  std::size_t min_shared_columns = 2;
  std::vector<std::string> caption_prefixes{"Figure", "Table"};
  double region_score = 0.8;
  double region_quality = 0.8;

  void validate() const;
};

/// caption prefix > bold block in the header band > block in the footer band.
std::optional<std::string> classify_block(const OcrBlock& block, const HeuristicConfig& config = {});

struct GridDetection {
  bool found = false;
  std::vector<std::size_t> block_indices;  // blocks of the aligned rows
  BoundingBox hull;
};

/// Rows are clusters of block vertical centers, columns clusters of left
/// edges. A grid exists when at least min_aligned_lines rows all occupy the
/// same min_shared_columns columns.
GridDetection find_grid(std::span<const OcrBlock> blocks, const HeuristicConfig& config = {});
bool detect_grid_alignment(std::span<const OcrBlock> blocks, const HeuristicConfig& config = {});

/// Rule-based regions for a page, shaped as LLM regions tagged
/// source = "heuristic". Grid blocks merge into one table region and are not
/// classified individually.
std::vector<LlmRegion> heuristic_regions(const Page& page, const HeuristicConfig& config = {});

}  // namespace layoutfuse
