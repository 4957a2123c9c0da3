#include "layoutfuse/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "layoutfuse/error.hpp"
#include "layoutfuse/geometry.hpp"

namespace layoutfuse {

void HeuristicConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("heuristics." + m); };
  if (!(header_band > 0.0 && header_band < footer_band && footer_band < 1.0))
    fail("header_band/footer_band: need 0 < header_band < footer_band < 1");
  if (!(column_tolerance >= 0.0)) fail("column_tolerance: must be >= 0");
  if (!(row_tolerance >= 0.0)) fail("row_tolerance: must be >= 0");
  if (min_aligned_lines < 1) fail("min_aligned_lines: must be >= 1");
  if (min_shared_columns < 1) fail("min_shared_columns: must be >= 1");
  if (!(region_score > 0.0 && region_score < 1.0)) fail("region_score: must be in (0, 1)");
  if (!(region_quality > 0.0 && region_quality <= 1.0)) fail("region_quality: must be in (0, 1]");
}

std::optional<std::string> classify_block(const OcrBlock& block, const HeuristicConfig& config) {
  const auto start = block.text.find_first_not_of(" \t\r\n");
  if (start != std::string::npos) {
    const std::string_view text = std::string_view(block.text).substr(start);
    for (const auto& prefix : config.caption_prefixes)
      if (!prefix.empty() && text.starts_with(prefix)) return "caption";
  }
  if (block.box.y1 <= config.header_band && block.is_bold) return "header";
  if (block.box.y1 >= config.footer_band) return "footer";
  return std::nullopt;
}

namespace {

// Clusters sorted scalars; a value joins the open cluster while it lies within
// `tol` of the cluster's first member, so clusters never chain wider than tol.
std::vector<std::size_t> cluster(const std::vector<double>& values, double tol) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<std::size_t> label(values.size(), 0);
  std::size_t current = 0;
  double anchor = values.empty() ? 0.0 : values[order[0]];
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (values[order[k]] - anchor > tol) {
      ++current;
      anchor = values[order[k]];
    }
    label[order[k]] = current;
  }
  return label;
}

void for_each_subset(const std::vector<std::size_t>& items, std::size_t k,
                     const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (k > items.size()) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::size_t> subset(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = items[idx[i]];
    fn(subset);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == items.size() - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

GridDetection find_grid(std::span<const OcrBlock> blocks, const HeuristicConfig& config) {
  GridDetection out;
  if (blocks.empty()) return out;
  std::vector<double> left, center;
  for (const auto& b : blocks) {
    left.push_back(b.box.x1);
    center.push_back(0.5 * (b.box.y1 + b.box.y2));
  }
  const auto column = cluster(left, config.column_tolerance);
  const auto row = cluster(center, config.row_tolerance);
  const std::size_t n_rows = *std::max_element(row.begin(), row.end()) + 1;

  std::vector<std::set<std::size_t>> row_columns(n_rows);
  for (std::size_t i = 0; i < blocks.size(); ++i) row_columns[row[i]].insert(column[i]);

  // A grid is a column set shared by enough rows; testing subsets of exactly
  // min_shared_columns columns suffices since larger shared sets contain one.
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::size_t> best_rows;
  for (const auto& cols : row_columns) {
    const std::vector<std::size_t> items(cols.begin(), cols.end());
    for_each_subset(items, config.min_shared_columns, [&](const std::vector<std::size_t>& subset) {
      if (!seen.insert(subset).second) return;
      std::vector<std::size_t> support;
      for (std::size_t r = 0; r < n_rows; ++r) {
        if (std::all_of(subset.begin(), subset.end(), [&](std::size_t c) { return row_columns[r].count(c) > 0; }))
          support.push_back(r);
      }
      if (support.size() >= config.min_aligned_lines && support.size() > best_rows.size()) best_rows = support;
    });
  }
  if (best_rows.empty()) return out;

  out.found = true;
  const std::set<std::size_t> rows(best_rows.begin(), best_rows.end());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!rows.count(row[i])) continue;
    out.hull = out.block_indices.empty() ? blocks[i].box : enclosing_hull(out.hull, blocks[i].box);
    out.block_indices.push_back(i);
  }
  return out;
}

bool detect_grid_alignment(std::span<const OcrBlock> blocks, const HeuristicConfig& config) {
  return find_grid(blocks, config).found;
}

std::vector<LlmRegion> heuristic_regions(const Page& page, const HeuristicConfig& config) {
  const GridDetection grid = find_grid(page.ocr_blocks, config);
  const std::set<std::size_t> in_grid(grid.block_indices.begin(), grid.block_indices.end());
  std::vector<LlmRegion> regions;
  auto make = [&](const BoundingBox& box, std::string category) {
    LlmRegion r;
    r.box = box;
    r.category = std::move(category);
    r.score = config.region_score;
    r.q_text = config.region_quality;
    r.q_spatial = config.region_quality;
    r.source = "heuristic";
    return r;
  };
  for (std::size_t i = 0; i < page.ocr_blocks.size(); ++i) {
    if (in_grid.count(i)) continue;
    if (auto c = classify_block(page.ocr_blocks[i], config)) regions.push_back(make(page.ocr_blocks[i].box, *c));
  }
  if (grid.found) regions.push_back(make(grid.hull, "table"));
  return regions;
}

}  // namespace layoutfuse
