#include "layoutfuse/taxonomy.hpp"

#include <set>

#include "layoutfuse/error.hpp"

namespace layoutfuse {

Taxonomy::Taxonomy(std::vector<CategoryInfo> categories) : categories_(std::move(categories)) {
  if (categories_.empty()) throw ConfigError("taxonomy: at least one category is required");
  std::set<std::string, std::less<>> seen;
  for (const auto& c : categories_) {
    if (c.name.empty()) throw ConfigError("taxonomy: empty category name");
    if (!seen.insert(c.name).second) throw ConfigError("taxonomy: duplicate category '" + c.name + "'");
    for (const auto& alias : c.aliases) {
      if (!seen.insert(alias).second) throw ConfigError("taxonomy: duplicate alias '" + alias + "'");
    }
  }
}

Taxonomy Taxonomy::doclaynet() {
  using enum Rarity;
  return Taxonomy({
      {"caption", kRare, {}},
      {"header", kRare, {"page-header"}},
      {"title", kRare, {}},
      {"footer", kRare, {"page-footer"}},
      {"table", kFrequent, {}},
      {"figure", kFrequent, {"picture"}},
      {"list", kFrequent, {"list-item"}},
      {"section-header", kFrequent, {"section"}},
      {"text", kFrequent, {}},
      {"paragraph", kFrequent, {}},
      {"footnote", kRare, {}},
  });
}

Taxonomy Taxonomy::publaynet() {
  using enum Rarity;
  return Taxonomy({
      {"text", kFrequent, {}},
      {"title", kRare, {}},
      {"list", kFrequent, {}},
      {"table", kFrequent, {}},
      {"figure", kFrequent, {}},
  });
}

Taxonomy Taxonomy::by_name(std::string_view name) {
  if (name == "doclaynet") return doclaynet();
  if (name == "publaynet") return publaynet();
  throw ConfigError("unknown taxonomy '" + std::string(name) + "' (expected doclaynet or publaynet)");
}

const CategoryInfo* Taxonomy::find(std::string_view name) const {
  for (const auto& c : categories_) {
    if (c.name == name) return &c;
    for (const auto& alias : c.aliases) {
      if (alias == name) return &c;
    }
  }
  return nullptr;
}

bool Taxonomy::contains(std::string_view name) const { return find(name) != nullptr; }

const std::string& Taxonomy::canonical(std::string_view name) const {
  const auto* c = find(name);
  if (c == nullptr) throw ConfigError("unknown category '" + std::string(name) + "'");
  return c->name;
}

std::size_t Taxonomy::index_of(std::string_view name) const {
  const auto* c = find(name);
  if (c == nullptr) throw ConfigError("unknown category '" + std::string(name) + "'");
  return static_cast<std::size_t>(c - categories_.data());
}

Rarity Taxonomy::rarity(std::string_view name) const { return categories_[index_of(name)].rarity; }

}  // namespace layoutfuse
