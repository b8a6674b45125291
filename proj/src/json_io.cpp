#include "darkpool/json_io.hpp"

#include "darkpool/error.hpp"

namespace darkpool {

namespace {

Relationship relationship_from(const std::string& s) {
  auto r = parse_relationship(s);
  if (!r) throw Error(ErrorCode::kInvalidInput, "bad relationship " + s);
  return *r;
}

SellerType seller_type_from(const std::string& s) {
  auto t = parse_seller_type(s);
  if (!t) throw Error(ErrorCode::kInvalidInput, "bad seller_type " + s);
  return *t;
}

}  // namespace

void to_json(json& j, const AdsTxtRecord& r) {
  j = json{{"ad_system_domain", r.ad_system_domain},
           {"seller_account_id", r.seller_account_id},
           {"relationship", relationship_name(r.relationship)},
           {"source_line", r.source_line}};
  write_optional(j, "certification_authority_id", r.certification_authority_id);
}

void from_json(const json& j, AdsTxtRecord& r) {
  j.at("ad_system_domain").get_to(r.ad_system_domain);
  j.at("seller_account_id").get_to(r.seller_account_id);
  r.relationship = relationship_from(j.at("relationship").get<std::string>());
  j.at("source_line").get_to(r.source_line);
  read_optional(j, "certification_authority_id", r.certification_authority_id);
}

void to_json(json& j, const AdsTxtVariable& v) {
  j = json{{"key", v.key}, {"value", v.value}, {"source_line", v.source_line}};
}

void from_json(const json& j, AdsTxtVariable& v) {
  j.at("key").get_to(v.key);
  j.at("value").get_to(v.value);
  j.at("source_line").get_to(v.source_line);
}

void to_json(json& j, const SkippedLine& s) { j = json{{"line", s.line}, {"reason", s.reason}}; }

void from_json(const json& j, SkippedLine& s) {
  j.at("line").get_to(s.line);
  j.at("reason").get_to(s.reason);
}

void to_json(json& j, const AdsTxtFile& f) {
  j = json{{"publisher_domain", f.publisher_domain},
           {"records", f.records},
           {"variables", f.variables},
           {"skipped_lines", f.skipped_lines},
           {"blank_or_comment_lines", f.blank_or_comment_lines}};
}

void from_json(const json& j, AdsTxtFile& f) {
  j.at("publisher_domain").get_to(f.publisher_domain);
  j.at("records").get_to(f.records);
  j.at("variables").get_to(f.variables);
  j.at("skipped_lines").get_to(f.skipped_lines);
  j.at("blank_or_comment_lines").get_to(f.blank_or_comment_lines);
}

void to_json(json& j, const SellerEntry& e) {
  j = json{{"seller_id", e.seller_id},
           {"seller_type", seller_type_name(e.seller_type)},
           {"is_confidential", e.is_confidential}};
  write_optional(j, "name", e.name);
  write_optional(j, "domain", e.domain);
}

void from_json(const json& j, SellerEntry& e) {
  j.at("seller_id").get_to(e.seller_id);
  e.seller_type = seller_type_from(j.at("seller_type").get<std::string>());
  j.at("is_confidential").get_to(e.is_confidential);
  read_optional(j, "name", e.name);
  read_optional(j, "domain", e.domain);
}

void to_json(json& j, const SkippedEntry& s) { j = json{{"index", s.index}, {"reason", s.reason}}; }

void from_json(const json& j, SkippedEntry& s) {
  j.at("index").get_to(s.index);
  j.at("reason").get_to(s.reason);
}

void to_json(json& j, const SellersJsonFile& f) {
  j = json{{"ad_system_domain", f.ad_system_domain},
           {"sellers", f.sellers},
           {"skipped_entries", f.skipped_entries},
           {"flagged_entries", f.flagged_entries}};
  write_optional(j, "contact_email", f.contact_email);
  write_optional(j, "version", f.version);
}

void from_json(const json& j, SellersJsonFile& f) {
  j.at("ad_system_domain").get_to(f.ad_system_domain);
  j.at("sellers").get_to(f.sellers);
  j.at("skipped_entries").get_to(f.skipped_entries);
  j.at("flagged_entries").get_to(f.flagged_entries);
  read_optional(j, "contact_email", f.contact_email);
  read_optional(j, "version", f.version);
}

void to_json(json& j, const FetchResult& r) {
  j = json{{"url", r.url},
           {"final_url", r.final_url},
           {"status", r.status},
           {"fetched_at", format_timestamp(r.fetched_at)},
           {"kind", file_kind_name(r.kind)},
           {"domain", r.domain},
           {"round", r.round},
           {"attempts", r.attempts},
           {"note", r.note},
           {"body_bytes", r.body.size()}};
  write_optional(j, "content_type", r.content_type);
}

void from_json(const json& j, FetchResult& r) {
  j.at("url").get_to(r.url);
  j.at("final_url").get_to(r.final_url);
  j.at("status").get_to(r.status);
  auto ts = parse_timestamp(j.at("fetched_at").get<std::string>());
  if (!ts) throw Error(ErrorCode::kInvalidInput, "bad fetched_at");
  r.fetched_at = *ts;
  r.kind = j.at("kind").get<std::string>() == "ads.txt" ? FileKind::kAdsTxt : FileKind::kSellersJson;
  j.at("domain").get_to(r.domain);
  j.at("round").get_to(r.round);
  j.at("attempts").get_to(r.attempts);
  j.at("note").get_to(r.note);
  read_optional(j, "content_type", r.content_type);
}

void to_json(json& j, const PoolMember& m) {
  j = json{{"domain", m.domain}, {"direct", m.direct}, {"reseller", m.reseller}};
}

void from_json(const json& j, PoolMember& m) {
  j.at("domain").get_to(m.domain);
  j.at("direct").get_to(m.direct);
  j.at("reseller").get_to(m.reseller);
}

void to_json(json& j, const SellerPool& p) {
  j = json{{"ad_system_domain", p.ad_system_domain}, {"seller_id", p.seller_id}, {"members", p.members}};
  write_optional(j, "owner_domain", p.owner_domain);
  if (p.owner_seller_type) j["owner_seller_type"] = seller_type_name(*p.owner_seller_type);
}

void from_json(const json& j, SellerPool& p) {
  j.at("ad_system_domain").get_to(p.ad_system_domain);
  j.at("seller_id").get_to(p.seller_id);
  j.at("members").get_to(p.members);
  read_optional(j, "owner_domain", p.owner_domain);
  p.owner_seller_type.reset();
  if (auto it = j.find("owner_seller_type"); it != j.end() && it->is_string()) {
    p.owner_seller_type = seller_type_from(it->get<std::string>());
  }
}

void to_json(json& j, const DarkPoolFinding& f) {
  json problematic = json::array();
  for (const auto& m : f.problematic_members) {
    problematic.push_back({{"domain", m.domain}, {"category", problem_category_name(m.category)}});
  }
  j = json{{"pool", f.pool},
           {"organizations", f.organizations},
           {"problematic_members", problematic},
           {"victim_members", f.victim_members},
           {"detected_in", f.detected_in}};
}

void from_json(const json& j, DarkPoolFinding& f) {
  j.at("pool").get_to(f.pool);
  j.at("organizations").get_to(f.organizations);
  f.problematic_members.clear();
  for (const auto& m : j.at("problematic_members")) {
    f.problematic_members.push_back(
        {m.at("domain").get<std::string>(), parse_problem_category(m.at("category").get<std::string>())});
  }
  j.at("victim_members").get_to(f.victim_members);
  j.at("detected_in").get_to(f.detected_in);
}

void to_json(json& j, const MemberChange& c) {
  j = json{{"ad_system_domain", c.ad_system_domain},
           {"seller_id", c.seller_id},
           {"added_members", c.added_members},
           {"removed_members", c.removed_members}};
}

void to_json(json& j, const RemediationDelta& d) {
  j = json{{"resolved", d.resolved}, {"introduced", d.introduced}, {"persisting", d.persisting}};
}

void to_json(json& j, const KvHit& h) {
  j = json{{"key", h.key},
           {"value", h.value},
           {"location", hit_location_name(h.location)},
           {"entry_index", h.entry_index},
           {"request_url", h.request_url},
           {"offset", h.offset}};
}

void from_json(const json& j, KvHit& h) {
  j.at("key").get_to(h.key);
  j.at("value").get_to(h.value);
  auto loc = parse_hit_location(j.at("location").get<std::string>());
  if (!loc) throw Error(ErrorCode::kInvalidInput, "bad hit location");
  h.location = *loc;
  j.at("entry_index").get_to(h.entry_index);
  j.at("request_url").get_to(h.request_url);
  j.at("offset").get_to(h.offset);
}

void to_json(json& j, const EvidenceRecord& e) {
  j = json{{"crawled_publisher", e.crawled_publisher},
           {"seller_id", e.seller_id},
           {"issuing_ad_system", e.issuing_ad_system},
           {"owner_domain", e.owner_domain},
           {"hit", e.hit},
           {"har_path", e.har_path},
           {"observed_at", format_timestamp(e.observed_at)}};
  write_optional(j, "advertiser_domain", e.advertiser_domain);
}

void from_json(const json& j, EvidenceRecord& e) {
  j.at("crawled_publisher").get_to(e.crawled_publisher);
  j.at("seller_id").get_to(e.seller_id);
  j.at("issuing_ad_system").get_to(e.issuing_ad_system);
  j.at("owner_domain").get_to(e.owner_domain);
  j.at("hit").get_to(e.hit);
  j.at("har_path").get_to(e.har_path);
  auto ts = parse_timestamp(j.at("observed_at").get<std::string>());
  if (!ts) throw Error(ErrorCode::kInvalidInput, "bad observed_at");
  e.observed_at = *ts;
  read_optional(j, "advertiser_domain", e.advertiser_domain);
}

void to_json(json& j, const ContactRecord& c) {
  j = json{{"entity_domain", c.entity_domain},
           {"email", c.email},
           {"source", contact_source_name(c.source)},
           {"discovered_at", format_timestamp(c.discovered_at)},
           {"verified", c.verified}};
}

}  // namespace darkpool
