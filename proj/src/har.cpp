#include "darkpool/har.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <map>

#include <json.hpp>

#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"

namespace darkpool {

using nlohmann::json;

namespace {

std::optional<std::string> base64_decode(std::string_view in) {
  std::string clean;
  clean.reserve(in.size());
  for (char c : in) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean += c;
  }
  if (clean.size() % 4 != 0) return std::nullopt;
  std::string out(clean.size() / 4 * 3, '\0');
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(clean.data()),
                          static_cast<int>(clean.size()));
  if (n < 0) return std::nullopt;
  std::size_t padding = 0;
  if (!clean.empty() && clean.back() == '=') ++padding;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

bool is_textual_mime(std::string_view mime) {
  if (mime.empty()) return true;
  const auto m = to_lower(mime);
  for (const char* marker : {"text/", "json", "javascript", "ecmascript", "xml", "x-www-form-urlencoded"}) {
    if (m.find(marker) != std::string::npos) return true;
  }
  return false;
}

std::string string_field(const json& obj, const char* key) {
  if (auto it = obj.find(key); it != obj.end() && it->is_string()) return it->get<std::string>();
  return {};
}

std::vector<NameValue> name_values(const json& obj, const char* key) {
  std::vector<NameValue> out;
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) return out;
  for (const auto& nv : *it) {
    if (!nv.is_object()) continue;
    out.emplace_back(string_field(nv, "name"), string_field(nv, "value"));
  }
  return out;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedHar, "malformed HAR: " + what);
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 && hex_value(s[i + 2]) >= 0) {
      out += static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2]));
      i += 2;
    } else if (s[i] == '+') {
      out += ' ';
    } else {
      out += s[i];
    }
  }
  return out;
}

bool is_delimiter(char c) {
  switch (c) {
    case '&': case ';': case ',': case ' ': case '\t': case '\r': case '\n':
    case '{': case '}': case '[': case ']':
      return true;
    default:
      return false;
  }
}

std::string_view strip_quotes(std::string_view s) {
  while (!s.empty() && (s.front() == '"' || s.front() == '\'')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '"' || s.back() == '\'')) s.remove_suffix(1);
  return s;
}

std::optional<NameValue> split_pair(std::string_view token, bool decode) {
  token = strip_quotes(token);
  auto sep = token.find_first_of("=:");
  if (sep == std::string_view::npos) return std::nullopt;
  auto key = strip_quotes(trim(token.substr(0, sep)));
  auto value = strip_quotes(trim(token.substr(sep + 1)));
  if (key.empty() || value.empty()) return std::nullopt;
  if (decode) return NameValue{percent_decode(key), percent_decode(value)};
  return NameValue{std::string(key), std::string(value)};
}

std::string_view query_of(std::string_view url) {
  auto q = url.find('?');
  if (q == std::string_view::npos) return {};
  auto query = url.substr(q + 1);
  return query.substr(0, query.find('#'));
}

}  // namespace

std::string_view hit_location_name(HitLocation l) {
  switch (l) {
    case HitLocation::kUrlQuery: return "URL_QUERY";
    case HitLocation::kRequestBody: return "REQUEST_BODY";
    case HitLocation::kResponseBody: return "RESPONSE_BODY";
    case HitLocation::kHeader: return "HEADER";
    case HitLocation::kCookie: return "COOKIE";
  }
  return "URL_QUERY";
}

std::optional<HitLocation> parse_hit_location(std::string_view s) {
  for (auto l : {HitLocation::kUrlQuery, HitLocation::kRequestBody, HitLocation::kResponseBody,
                 HitLocation::kHeader, HitLocation::kCookie}) {
    if (s == hit_location_name(l)) return l;
  }
  return std::nullopt;
}

HarDocument HarDocument::parse(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) malformed("not a JSON object");
  auto log = doc.find("log");
  if (log == doc.end() || !log->is_object()) malformed("missing log object");
  auto entries = log->find("entries");
  if (entries == log->end() || !entries->is_array()) malformed("missing log.entries array");

  HarDocument har;
  if (auto pages = log->find("pages"); pages != log->end() && pages->is_array() && !pages->empty()) {
    const auto title = string_field((*pages)[0], "title");
    if (title.find("://") != std::string::npos) har.page_url = title;
  }

  std::size_t index = 0;
  for (const auto& e : *entries) {
    const std::string where = "entry " + std::to_string(index++);
    if (!e.is_object()) malformed(where + " is not an object");
    auto req = e.find("request");
    auto res = e.find("response");
    if (req == e.end() || !req->is_object()) malformed(where + " has no request");
    if (res == e.end() || !res->is_object()) malformed(where + " has no response");
    if (!req->contains("url") || !(*req)["url"].is_string()) malformed(where + " has no request.url");

    HarEntry entry;
    entry.request_url = string_field(*req, "url");
    entry.method = string_field(*req, "method");
    if (auto s = res->find("status"); s != res->end() && s->is_number_integer()) {
      entry.status = s->get<int>();
    }
    entry.request_headers = name_values(*req, "headers");
    entry.response_headers = name_values(*res, "headers");
    entry.request_cookies = name_values(*req, "cookies");
    entry.response_cookies = name_values(*res, "cookies");

    entry.redirect_url = string_field(*res, "redirectURL");
    if (entry.redirect_url.empty()) {
      for (const auto& [name, value] : entry.response_headers) {
        if (iequals(name, "location")) entry.redirect_url = value;
      }
    }

    if (auto post = req->find("postData"); post != req->end() && post->is_object()) {
      if (auto t = post->find("text"); t != post->end() && t->is_string()) {
        entry.post_text = t->get<std::string>();
      } else {
        entry.post_params = name_values(*post, "params");
      }
    }

    if (auto content = res->find("content"); content != res->end() && content->is_object()) {
      if (auto t = content->find("text"); t != content->end() && t->is_string()) {
        std::optional<std::string> body = t->get<std::string>();
        if (string_field(*content, "encoding") == "base64") body = base64_decode(*body);
        if (body && is_textual_mime(string_field(*content, "mimeType")) &&
            body->find('\0') == std::string::npos) {
          entry.response_text = std::move(body);
        }
      }
    }

    if (auto started = string_field(e, "startedDateTime"); !started.empty()) {
      entry.started = parse_timestamp(started);
    }
    har.entries.push_back(std::move(entry));
  }
  return har;
}

std::vector<std::pair<std::size_t, NameValue>> tokenize_pairs(std::string_view text,
                                                              bool decode) {
  std::vector<std::pair<std::size_t, NameValue>> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    if (end > start) {
      if (auto pair = split_pair(text.substr(start, end - start), decode)) {
        out.emplace_back(start, std::move(*pair));
      }
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_delimiter(text[i])) continue;
    // Keep pretty-printed JSON members ("key": "value") in one token.
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      auto tok = text.substr(start, i - start);
      while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
      if (tok.size() >= 2 && tok.back() == ':' && tok[tok.size() - 2] == '"') continue;
    }
    flush(i);
    start = i + 1;
  }
  flush(text.size());
  return out;
}

std::vector<KvHit> extract_kv_pairs(const HarDocument& har) {
  std::vector<KvHit> hits;
  for (std::size_t i = 0; i < har.entries.size(); ++i) {
    const auto& entry = har.entries[i];
    auto emit = [&](HitLocation loc, std::size_t offset, NameValue nv) {
      auto& [key, value] = nv;
      if (key.empty() || value.empty()) return;
      hits.push_back({std::move(key), std::move(value), loc, i, entry.request_url, offset});
    };

    for (auto& [off, nv] : tokenize_pairs(query_of(entry.request_url), true)) {
      emit(HitLocation::kUrlQuery, off, std::move(nv));
    }
    if (entry.post_text) {
      for (auto& [off, nv] : tokenize_pairs(*entry.post_text, false)) {
        emit(HitLocation::kRequestBody, off, std::move(nv));
      }
    } else {
      for (std::size_t k = 0; k < entry.post_params.size(); ++k) {
        emit(HitLocation::kRequestBody, k, entry.post_params[k]);
      }
    }
    if (entry.response_text) {
      for (auto& [off, nv] : tokenize_pairs(*entry.response_text, false)) {
        emit(HitLocation::kResponseBody, off, std::move(nv));
      }
    }
    std::size_t ordinal = 0;
    for (const auto* headers : {&entry.request_headers, &entry.response_headers}) {
      for (const auto& nv : *headers) emit(HitLocation::kHeader, ordinal++, nv);
    }
    ordinal = 0;
    for (const auto* cookies : {&entry.request_cookies, &entry.response_cookies}) {
      for (const auto& nv : *cookies) emit(HitLocation::kCookie, ordinal++, nv);
    }
  }
  std::stable_sort(hits.begin(), hits.end(), [](const KvHit& a, const KvHit& b) {
    return std::tie(a.entry_index, a.location, a.offset) < std::tie(b.entry_index, b.location, b.offset);
  });
  return hits;
}

std::vector<EvidenceRecord> match_pooled_ids(const std::vector<KvHit>& hits,
                                             const std::vector<SellerPool>& pools,
                                             std::string_view crawled_publisher,
                                             const EntityMap& entities,
                                             const MatchOptions& options,
                                             const std::string& har_path,
                                             Timestamp observed_at) {
  std::multimap<std::string_view, const SellerPool*> by_id;
  for (const auto& p : pools) {
    if (p.seller_id.size() >= options.min_seller_id_length) by_id.emplace(p.seller_id, &p);
  }
  const auto publisher = registrable_domain(crawled_publisher);

  std::vector<EvidenceRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& hit : hits) {
    if (options.key_allowlist) {
      const auto key = to_lower(hit.key);
      if (!options.key_allowlist->count(key)) continue;
    }
    auto [lo, hi] = by_id.equal_range(hit.value);
    for (auto it = lo; it != hi; ++it) {
      const SellerPool& pool = *it->second;
      if (!pool.owner_domain) continue;
      const auto& owner = *pool.owner_domain;
      if (owner == publisher || entities.related(owner, publisher)) continue;
      if (!seen.emplace(pool.ad_system_domain, pool.seller_id).second) continue;
      EvidenceRecord r;
      r.crawled_publisher = publisher;
      r.seller_id = pool.seller_id;
      r.issuing_ad_system = pool.ad_system_domain;
      r.owner_domain = owner;
      r.hit = hit;
      r.har_path = har_path;
      r.observed_at = observed_at;
      records.push_back(std::move(r));
    }
  }
  return records;
}

EvidenceRecord attribute_advertiser(const HarDocument& har, EvidenceRecord record,
                                    const std::set<std::string>& ad_system_domains,
                                    const std::optional<std::set<std::string>>& known_advertisers) {
  record.advertiser_domain.reset();
  const auto& entries = har.entries;
  std::size_t i = record.hit.entry_index;
  while (i < entries.size() && entries[i].redirect_url.empty()) ++i;
  if (i >= entries.size()) return record;

  std::string final_url = entries[i].redirect_url;
  std::size_t pos = i;
  for (std::size_t hops = 0; hops < entries.size(); ++hops) {
    auto next = std::find_if(entries.begin() + static_cast<std::ptrdiff_t>(pos) + 1, entries.end(),
                             [&](const HarEntry& e) { return e.request_url == final_url; });
    if (next == entries.end() || next->redirect_url.empty()) break;
    pos = static_cast<std::size_t>(next - entries.begin());
    final_url = next->redirect_url;
  }

  const auto advertiser = registrable_domain(url_host(final_url));
  if (advertiser.empty()) return record;
  for (const auto& ad : ad_system_domains) {
    if (registrable_domain(ad) == advertiser) return record;
  }
  if (known_advertisers && !known_advertisers->count(advertiser)) return record;
  record.advertiser_domain = advertiser;
  return record;
}

}  // namespace darkpool
