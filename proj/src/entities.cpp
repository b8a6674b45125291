#include "darkpool/entities.hpp"

#include <algorithm>
#include <vector>

#include <json.hpp>

#include "darkpool/csv.hpp"
#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"
#include "darkpool/fs_util.hpp"

namespace darkpool {

namespace fs = std::filesystem;
using nlohmann::json;

void EntityMap::add(std::string_view domain, std::string_view organization) {
  auto d = normalize_domain(domain);
  auto org = to_lower(trim(organization));
  if (d.empty() || org.empty()) return;
  domain_to_org_[std::move(d)] = std::move(org);
}

std::string EntityMap::organization_of(std::string_view domain) const {
  const auto host = normalize_domain(domain);
  if (auto it = domain_to_org_.find(host); it != domain_to_org_.end()) return it->second;
  const auto reg = registrable_domain(host);
  if (auto it = domain_to_org_.find(reg); it != domain_to_org_.end()) return it->second;
  return reg;
}

EntityMap EntityMap::from_csv(std::string_view text) {
  EntityMap map;
  for (const auto& row : csv::parse(text)) {
    if (row.size() < 2) continue;
    if (iequals(row[0], "domain")) continue;  // header
    map.add(row[0], row[1]);
  }
  return map;
}

void EntityMap::merge_entity_json(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kInvalidInput, "entity list is not JSON");

  auto add_entity = [this](const std::string& name, const json& entity) {
    if (auto it = entity.find("properties"); it != entity.end() && it->is_array()) {
      for (const auto& d : *it) {
        if (d.is_string()) add(d.get<std::string>(), name);
      }
    }
  };
  auto entity_name = [](const json& e, const std::string& fallback) {
    if (auto it = e.find("name"); it != e.end() && it->is_string()) return it->get<std::string>();
    return fallback;
  };

  if (doc.is_array()) {
    for (const auto& e : doc) {
      if (e.is_object()) add_entity(entity_name(e, ""), e);
    }
  } else if (doc.is_object() && doc.contains("properties")) {
    add_entity(entity_name(doc, ""), doc);
  } else if (doc.is_object()) {
    const json& entities = doc.contains("entities") ? doc["entities"] : doc;
    for (const auto& [key, e] : entities.items()) {
      if (e.is_object()) add_entity(entity_name(e, key), e);
    }
  }
}

EntityMap EntityMap::from_entity_json(std::string_view text) {
  EntityMap map;
  map.merge_entity_json(text);
  return map;
}

EntityMap EntityMap::load(const fs::path& path) {
  EntityMap map;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) map.merge_entity_json(read_file(f));
    return map;
  }
  const auto text = read_file(path);
  if (path.extension() == ".json") {
    map.merge_entity_json(text);
  } else {
    map = from_csv(text);
  }
  return map;
}

std::string_view problem_category_name(ProblemCategory c) {
  switch (c) {
    case ProblemCategory::kMisinformation: return "MISINFORMATION";
    case ProblemCategory::kTyposquatting: return "TYPOSQUATTING";
    case ProblemCategory::kPhishing: return "PHISHING";
    case ProblemCategory::kPiracy: return "PIRACY";
    case ProblemCategory::kSanctioned: return "SANCTIONED";
    case ProblemCategory::kOther: return "OTHER";
  }
  return "OTHER";
}

ProblemCategory parse_problem_category(std::string_view s) {
  s = trim(s);
  if (iequals(s, "MISINFORMATION") || iequals(s, "DISINFORMATION")) return ProblemCategory::kMisinformation;
  if (iequals(s, "TYPOSQUATTING")) return ProblemCategory::kTyposquatting;
  if (iequals(s, "PHISHING")) return ProblemCategory::kPhishing;
  if (iequals(s, "PIRACY")) return ProblemCategory::kPiracy;
  if (iequals(s, "SANCTIONED")) return ProblemCategory::kSanctioned;
  return ProblemCategory::kOther;
}

void ProblematicList::add(std::string_view domain, ProblemCategory category) {
  if (auto d = normalize_domain(domain); !d.empty()) entries_[std::move(d)] = category;
}

std::optional<ProblemCategory> ProblematicList::category_of(std::string_view domain) const {
  const auto host = normalize_domain(domain);
  if (auto it = entries_.find(host); it != entries_.end()) return it->second;
  if (auto it = entries_.find(registrable_domain(host)); it != entries_.end()) return it->second;
  return std::nullopt;
}

ProblematicList ProblematicList::from_csv(std::string_view text) {
  ProblematicList list;
  for (const auto& row : csv::parse(text)) {
    if (row.empty() || iequals(row[0], "domain")) continue;
    list.add(row[0], row.size() > 1 ? parse_problem_category(row[1]) : ProblemCategory::kOther);
  }
  return list;
}

}  // namespace darkpool
