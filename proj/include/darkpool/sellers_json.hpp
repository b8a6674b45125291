#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace darkpool {

enum class SellerType { kPublisher, kIntermediary, kBoth };

std::string_view seller_type_name(SellerType t);
std::optional<SellerType> parse_seller_type(std::string_view token);

struct SellerEntry {
  std::string seller_id;  // byte-exact
  std::optional<std::string> name;
  std::optional<std::string> domain;  // normalized
  SellerType seller_type = SellerType::kPublisher;
  bool is_confidential = false;

  bool operator==(const SellerEntry&) const = default;
};

struct SkippedEntry {
  std::size_t index = 0;
  std::string reason;

  bool operator==(const SkippedEntry&) const = default;
};

struct SellersJsonFile {
  std::string ad_system_domain;
  std::optional<std::string> contact_email;
  std::optional<std::string> version;
  std::vector<SellerEntry> sellers;
  std::vector<SkippedEntry> skipped_entries;
  // Kept entries with a data-quality problem, e.g. non-confidential without a domain.
  std::vector<SkippedEntry> flagged_entries;

  const SellerEntry* find(std::string_view seller_id) const;

  bool operator==(const SellersJsonFile&) const = default;
};

// Throws Error(kWrongContentType) when the body is not a JSON object with a
// top-level "sellers" array. Per-entry problems go to skipped_entries.
SellersJsonFile parse_sellers_json(std::string_view ad_system_domain, std::string_view body);

// Distinct domains of INTERMEDIARY and BOTH entries, the crawler's expansion set.
std::set<std::string> extract_expansion_domains(const SellersJsonFile& file);

}  // namespace darkpool
