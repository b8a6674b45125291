#pragma once

// nlohmann::json conversions for the persisted domain types. Field names are
// the on-disk schema; changing them breaks stored snapshots.

#include <json.hpp>

#include "darkpool/ads_txt.hpp"
#include "darkpool/contacts.hpp"
#include "darkpool/crawler.hpp"
#include "darkpool/har.hpp"
#include "darkpool/pools.hpp"
#include "darkpool/sellers_json.hpp"

namespace darkpool {

using nlohmann::json;

void to_json(json& j, const AdsTxtRecord& r);
void from_json(const json& j, AdsTxtRecord& r);
void to_json(json& j, const AdsTxtVariable& v);
void from_json(const json& j, AdsTxtVariable& v);
void to_json(json& j, const SkippedLine& s);
void from_json(const json& j, SkippedLine& s);
void to_json(json& j, const AdsTxtFile& f);
void from_json(const json& j, AdsTxtFile& f);

void to_json(json& j, const SellerEntry& e);
void from_json(const json& j, SellerEntry& e);
void to_json(json& j, const SkippedEntry& s);
void from_json(const json& j, SkippedEntry& s);
void to_json(json& j, const SellersJsonFile& f);
void from_json(const json& j, SellersJsonFile& f);

// The body is not part of the JSON form; the snapshot store keeps bodies as
// separate files.
void to_json(json& j, const FetchResult& r);
void from_json(const json& j, FetchResult& r);

void to_json(json& j, const PoolMember& m);
void from_json(const json& j, PoolMember& m);
void to_json(json& j, const SellerPool& p);
void from_json(const json& j, SellerPool& p);
void to_json(json& j, const DarkPoolFinding& f);
void from_json(const json& j, DarkPoolFinding& f);
void to_json(json& j, const MemberChange& c);
void to_json(json& j, const RemediationDelta& d);

void to_json(json& j, const KvHit& h);
void from_json(const json& j, KvHit& h);
void to_json(json& j, const EvidenceRecord& e);
void from_json(const json& j, EvidenceRecord& e);

void to_json(json& j, const ContactRecord& c);

// One compact JSON document per line.
template <typename T>
std::string to_jsonl(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) out += json(item).dump() + "\n";
  return out;
}

// Parses JSONL, skipping blank lines and objects carrying a "_meta" key.
template <typename T>
std::vector<T> from_jsonl(std::string_view text) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto j = json::parse(line);
    if (j.is_object() && j.contains("_meta")) continue;
    out.push_back(j.get<T>());
  }
  return out;
}

// Reads an optional field, leaving `out` empty when absent or null.
template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    out = it->get<T>();
  } else {
    out.reset();
  }
}

template <typename T>
void write_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace darkpool
