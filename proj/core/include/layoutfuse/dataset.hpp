#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layoutfuse/taxonomy.hpp"
#include "layoutfuse/types.hpp"

namespace layoutfuse {

struct LoadReport {
  std::vector<Page> pages;
  std::size_t clamped_coordinates = 0;  // coordinates pulled back into [0, 1]
};

/// Reads a JSON-Lines dataset (one page per line, blank lines ignored).
///
/// Every record invariant is checked; out-of-range coordinates are clamped and
/// counted, degenerate boxes are rejected. When a taxonomy is given, category
/// names are resolved to their canonical form and unknown names are rejected.
/// Throws DatasetError naming the line (parse failures) or the page and field
/// (invariant violations).
LoadReport load_dataset(const std::filesystem::path& path, const Taxonomy* taxonomy = nullptr);
LoadReport read_dataset(std::istream& in, const Taxonomy* taxonomy = nullptr);

/// Parses a single record; `line_number` is only used in error messages.
Page parse_page(std::string_view line, std::size_t line_number = 1);

/// One compact JSON object, no trailing newline. Doubles keep 17 significant
/// digits so save/load is bit-exact.
std::string serialize_page(const Page& page);

void write_dataset(std::ostream& out, std::span<const Page> pages);
void save_dataset(const std::filesystem::path& path, std::span<const Page> pages);

/// Throws DatasetError if any invariant of the page is violated.
void validate_page(const Page& page);

}  // namespace layoutfuse
