#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "darkpool/entities.hpp"
#include "darkpool/pools.hpp"
#include "darkpool/time.hpp"

namespace darkpool {

using NameValue = std::pair<std::string, std::string>;

// The subset of a HAR 1.2 entry the evidence pipeline reads.
struct HarEntry {
  std::string request_url;
  std::string method;
  int status = 0;
  std::string redirect_url;  // response.redirectURL, else the Location header
  std::vector<NameValue> request_headers;
  std::vector<NameValue> response_headers;
  std::vector<NameValue> request_cookies;
  std::vector<NameValue> response_cookies;
  std::optional<std::string> post_text;
  std::vector<NameValue> post_params;
  std::optional<std::string> response_text;  // decoded, present only for textual bodies
  std::optional<Timestamp> started;
};

struct HarDocument {
  std::vector<HarEntry> entries;
  std::optional<std::string> page_url;  // log.pages[0].title when it is a URL

  // Throws Error(kMalformedHar) when the document is not structurally a HAR.
  static HarDocument parse(std::string_view text);
};

enum class HitLocation { kUrlQuery, kRequestBody, kResponseBody, kHeader, kCookie };

std::string_view hit_location_name(HitLocation l);
std::optional<HitLocation> parse_hit_location(std::string_view s);

struct KvHit {
  std::string key;
  std::string value;
  HitLocation location = HitLocation::kUrlQuery;
  std::size_t entry_index = 0;
  std::string request_url;
  std::size_t offset = 0;  // position within the scanned text, or ordinal for headers/cookies

  bool operator==(const KvHit&) const = default;
};

// Every "key=value" / "key:value" string in query strings, request bodies,
// textual response bodies, headers and cookies, ordered by
// (entry_index, location, offset).
std::vector<KvHit> extract_kv_pairs(const HarDocument& har);

// The tokenizer used for query strings and bodies, exposed for testing.
// Splits on & ; , whitespace and JSON brackets, then on the first '=' or ':'.
std::vector<std::pair<std::size_t, NameValue>> tokenize_pairs(std::string_view text,
                                                              bool percent_decode);

struct EvidenceRecord {
  std::string crawled_publisher;
  std::string seller_id;
  std::string issuing_ad_system;
  std::string owner_domain;
  std::optional<std::string> advertiser_domain;
  KvHit hit;
  std::string har_path;
  Timestamp observed_at{};

  bool operator==(const EvidenceRecord&) const = default;
};

struct MatchOptions {
  std::size_t min_seller_id_length = 4;
  // When set, only hits whose key is in this list (case-insensitive) count.
  std::optional<std::set<std::string>> key_allowlist;

  static std::set<std::string> default_allowlist() {
    return {"seller_id", "sid", "pubid", "publisher_id", "account_id"};
  }
};

// A hit whose value byte-equals a pooled seller ID is evidence when the
// pool's owner exists and is unrelated to the crawled publisher. One record
// per (ad system, seller ID); the first hit wins.
std::vector<EvidenceRecord> match_pooled_ids(const std::vector<KvHit>& hits,
                                             const std::vector<SellerPool>& pools,
                                             std::string_view crawled_publisher,
                                             const EntityMap& entities,
                                             const MatchOptions& options = {},
                                             const std::string& har_path = "",
                                             Timestamp observed_at = {});

// Follows the first redirect chain at or after the matched entry and takes
// the registrable domain of its final URL as the advertiser. Attribution is
// refused (left empty) when there is no chain, when the chain ends inside
// ad tech, or when known_advertisers is given and does not contain it.
EvidenceRecord attribute_advertiser(const HarDocument& har, EvidenceRecord record,
                                    const std::set<std::string>& ad_system_domains,
                                    const std::optional<std::set<std::string>>& known_advertisers =
                                        std::nullopt);

}  // namespace darkpool
