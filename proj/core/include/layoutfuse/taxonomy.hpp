#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace layoutfuse {

enum class Rarity { kFrequent, kRare };

struct CategoryInfo {
  std::string name;
  Rarity rarity = Rarity::kFrequent;
  std::vector<std::string> aliases;
};

/// The active set of layout categories. Category names are plain strings in
/// every record; a Taxonomy resolves aliases and carries the rarity tags that
/// drive class-adaptive thresholds.
class Taxonomy {
 public:
  explicit Taxonomy(std::vector<CategoryInfo> categories);

  /// caption, header, title, footer, table, figure, list, section-header,
  /// text, paragraph, footnote.
  static Taxonomy doclaynet();
  /// text, title, list, table, figure.
  static Taxonomy publaynet();
  /// "doclaynet" or "publaynet".
  static Taxonomy by_name(std::string_view name);

  [[nodiscard]] bool contains(std::string_view name) const;
  /// Resolves an alias to its canonical name; throws ConfigError if unknown.
  [[nodiscard]] const std::string& canonical(std::string_view name) const;
  [[nodiscard]] std::size_t index_of(std::string_view name) const;
  [[nodiscard]] Rarity rarity(std::string_view name) const;
  [[nodiscard]] const std::vector<CategoryInfo>& categories() const { return categories_; }
  [[nodiscard]] std::size_t size() const { return categories_.size(); }

 private:
  [[nodiscard]] const CategoryInfo* find(std::string_view name) const;

  std::vector<CategoryInfo> categories_;
};

}  // namespace layoutfuse
