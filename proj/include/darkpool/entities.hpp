#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace darkpool {

// Domain -> parent organization. Lookups are total: an unmapped domain is
// its own singleton organization named after its registrable domain.
class EntityMap {
 public:
  void add(std::string_view domain, std::string_view organization);

  // Lowercased organization name, suitable for equality comparison.
  std::string organization_of(std::string_view domain) const;
  bool related(std::string_view a, std::string_view b) const {
    return organization_of(a) == organization_of(b);
  }
  std::size_t size() const { return domain_to_org_.size(); }

  // Two-column "domain,organization" table.
  static EntityMap from_csv(std::string_view text);
  // A DuckDuckGo Tracker Radar entity document ({"name": ..., "properties":
  // [domains...]}), an array of them, or an object keyed by entity name.
  static EntityMap from_entity_json(std::string_view text);
  // A .csv file, a .json file, or a directory of entity .json files.
  static EntityMap load(const std::filesystem::path& path);

 private:
  void merge_entity_json(std::string_view text);
  std::map<std::string, std::string> domain_to_org_;
};

enum class ProblemCategory { kMisinformation, kTyposquatting, kPhishing, kPiracy, kSanctioned, kOther };

std::string_view problem_category_name(ProblemCategory c);
ProblemCategory parse_problem_category(std::string_view s);

class ProblematicList {
 public:
  void add(std::string_view domain, ProblemCategory category);
  // Matches on the exact normalized host or its registrable domain.
  std::optional<ProblemCategory> category_of(std::string_view domain) const;
  bool contains(std::string_view domain) const { return category_of(domain).has_value(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, ProblemCategory>& entries() const { return entries_; }

  // Two-column "domain,category" table; unknown categories map to OTHER.
  static ProblematicList from_csv(std::string_view text);

 private:
  std::map<std::string, ProblemCategory> entries_;
};

}  // namespace darkpool
