#include "darkpool/sellers_json.hpp"

#include <unordered_set>

#include <json.hpp>

#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"

namespace darkpool {

namespace {

using nlohmann::json;

// seller_id is sometimes emitted as a JSON number; keep its textual form.
std::optional<std::string> scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  return std::nullopt;
}

bool truthy(const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<long long>() != 0;
  if (v.is_string()) return iequals(v.get<std::string>(), "true") || v.get<std::string>() == "1";
  return false;
}

}  // namespace

std::string_view seller_type_name(SellerType t) {
  switch (t) {
    case SellerType::kPublisher: return "PUBLISHER";
    case SellerType::kIntermediary: return "INTERMEDIARY";
    case SellerType::kBoth: return "BOTH";
  }
  return "PUBLISHER";
}

std::optional<SellerType> parse_seller_type(std::string_view token) {
  token = trim(token);
  if (iequals(token, "PUBLISHER")) return SellerType::kPublisher;
  if (iequals(token, "INTERMEDIARY")) return SellerType::kIntermediary;
  if (iequals(token, "BOTH")) return SellerType::kBoth;
  return std::nullopt;
}

const SellerEntry* SellersJsonFile::find(std::string_view seller_id) const {
  for (const auto& s : sellers) {
    if (s.seller_id == seller_id) return &s;
  }
  return nullptr;
}

SellersJsonFile parse_sellers_json(std::string_view ad_system_domain, std::string_view body) {
  json doc = json::parse(body.begin(), body.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kWrongContentType, "sellers.json body is not a JSON object");
  }
  auto sellers_it = doc.find("sellers");
  if (sellers_it == doc.end() || !sellers_it->is_array()) {
    throw Error(ErrorCode::kWrongContentType, "sellers.json has no top-level sellers array");
  }

  SellersJsonFile file;
  file.ad_system_domain = normalize_domain(ad_system_domain);
  if (auto it = doc.find("contact_email"); it != doc.end() && it->is_string()) {
    file.contact_email = it->get<std::string>();
  }
  if (auto it = doc.find("version"); it != doc.end()) {
    if (auto text = it->is_number() ? std::optional(it->dump()) : scalar_text(*it)) {
      file.version = *text;
    }
  }

  std::unordered_set<std::string> seen;
  std::size_t index = 0;
  for (const auto& raw : *sellers_it) {
    const std::size_t i = index++;
    if (!raw.is_object()) {
      file.skipped_entries.push_back({i, "entry is not an object"});
      continue;
    }
    std::optional<std::string> seller_id;
    if (auto it = raw.find("seller_id"); it != raw.end()) seller_id = scalar_text(*it);
    if (!seller_id || seller_id->empty()) {
      file.skipped_entries.push_back({i, "missing seller_id"});
      continue;
    }
    std::optional<SellerType> type;
    if (auto it = raw.find("seller_type"); it != raw.end() && it->is_string()) {
      type = parse_seller_type(it->get<std::string>());
    }
    if (!type) {
      file.skipped_entries.push_back({i, "missing or unknown seller_type"});
      continue;
    }
    if (!seen.insert(*seller_id).second) {
      file.skipped_entries.push_back({i, "duplicate seller_id"});
      continue;
    }

    SellerEntry entry;
    entry.seller_id = std::move(*seller_id);
    entry.seller_type = *type;
    if (auto it = raw.find("is_confidential"); it != raw.end()) entry.is_confidential = truthy(*it);
    if (auto it = raw.find("name"); it != raw.end() && it->is_string()) {
      entry.name = it->get<std::string>();
    }
    if (auto it = raw.find("domain"); it != raw.end() && it->is_string()) {
      std::string d = normalize_domain(it->get<std::string>());
      if (!d.empty()) entry.domain = std::move(d);
    }
    if (!entry.domain && !entry.is_confidential) {
      file.flagged_entries.push_back({i, "non-confidential entry without domain"});
    }
    file.sellers.push_back(std::move(entry));
  }
  return file;
}

std::set<std::string> extract_expansion_domains(const SellersJsonFile& file) {
  std::set<std::string> out;
  for (const auto& s : file.sellers) {
    if (s.seller_type != SellerType::kPublisher && s.domain) out.insert(*s.domain);
  }
  return out;
}

}  // namespace darkpool
