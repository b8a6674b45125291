#include "darkpool/contacts.hpp"

#include <regex>
#include <thread>

#include "darkpool/csv.hpp"
#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"

namespace darkpool {

namespace {

const std::regex& email_pattern() {
  static const std::regex re(R"([\w\.-]+@[\w\.-]+\.\w+)");
  return re;
}

std::string resolve_url(std::string_view base, std::string_view href) {
  href = trim(href);
  if (href.find("://") != std::string_view::npos) return std::string(href);
  auto scheme_end = base.find("://");
  const std::string scheme = scheme_end == std::string_view::npos ? "https" : std::string(base.substr(0, scheme_end));
  if (href.rfind("//", 0) == 0) return scheme + ":" + std::string(href);
  auto rest = scheme_end == std::string_view::npos ? base : base.substr(scheme_end + 3);
  auto slash = rest.find('/');
  const std::string origin = scheme + "://" + std::string(rest.substr(0, slash));
  if (!href.empty() && href.front() == '/') return origin + std::string(href);
  std::string dir = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  dir = dir.substr(0, dir.rfind('/') + 1);
  return origin + dir + std::string(href);
}

bool is_html_like(const TransportResponse& r) {
  if (!r.content_type) return r.body.find('\0') == std::string::npos;
  return icontains(*r.content_type, "html") || icontains(*r.content_type, "text/plain");
}

TransportResponse fetch_page(Transport& transport, const std::string& url) {
  auto r = transport.get(url);
  if (r.connection_failed() && url.rfind("https://", 0) == 0) {
    r = transport.get("http://" + url.substr(8));
  }
  return r;
}

std::string_view prefix_of(std::string_view s, std::size_t n) {
  return s.substr(0, std::min(n, s.size()));
}

}  // namespace

std::string_view contact_source_name(ContactSource s) {
  switch (s) {
    case ContactSource::kContactPage: return "CONTACT_PAGE";
    case ContactSource::kAdsTxt: return "ADS_TXT";
    case ContactSource::kSellersJson: return "SELLERS_JSON";
    case ContactSource::kCommonPrefix: return "COMMON_PREFIX";
  }
  return "CONTACT_PAGE";
}

std::optional<ContactSource> parse_contact_source(std::string_view s) {
  for (auto v : {ContactSource::kContactPage, ContactSource::kAdsTxt, ContactSource::kSellersJson,
                 ContactSource::kCommonPrefix}) {
    if (iequals(s, contact_source_name(v))) return v;
  }
  return std::nullopt;
}

std::string_view entity_role_name(EntityRole r) {
  switch (r) {
    case EntityRole::kPublisher: return "PUBLISHER";
    case EntityRole::kAdNetwork: return "AD_NETWORK";
    case EntityRole::kAdvertiser: return "ADVERTISER";
  }
  return "PUBLISHER";
}

std::optional<EntityRole> parse_entity_role(std::string_view s) {
  for (auto v : {EntityRole::kPublisher, EntityRole::kAdNetwork, EntityRole::kAdvertiser}) {
    if (iequals(s, entity_role_name(v))) return v;
  }
  return std::nullopt;
}

std::vector<std::string> extract_emails(std::string_view text) {
  std::vector<std::string> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), email_pattern()); it != std::sregex_iterator();
       ++it) {
    out.push_back(it->str());
  }
  return out;
}

std::string strip_tags(std::string_view html) {
  std::string out;
  out.reserve(html.size());
  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      out += html[i++];
      continue;
    }
    // Drop the bodies of script and style elements entirely.
    for (std::string_view tag : {"script", "style"}) {
      if (iequals(prefix_of(html.substr(i + 1), tag.size()), tag)) {
        const std::string close = "</" + std::string(tag);
        auto end = to_lower(html.substr(i)).find(close);
        i = end == std::string::npos ? html.size() : i + end;
        break;
      }
    }
    auto close = html.find('>', i);
    i = close == std::string_view::npos ? html.size() : close + 1;
    out += ' ';
  }
  static const std::pair<std::string_view, std::string_view> kEntities[] = {
      {"&amp;", "&"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&#64;", "@"}, {"&nbsp;", " "}};
  for (const auto& [from, to] : kEntities) {
    for (auto pos = out.find(from); pos != std::string::npos; pos = out.find(from, pos + to.size())) {
      out.replace(pos, from.size(), to);
    }
  }
  return out;
}

std::vector<std::string> find_contact_links(std::string_view html, std::string_view base_url) {
  static const std::regex anchor(R"re(<a\s[^>]*?href\s*=\s*["']([^"']*)["'][^>]*>([\s\S]*?)</a\s*>)re",
                                 std::regex::icase);
  std::vector<std::string> out;
  const std::string s(html);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), anchor); it != std::sregex_iterator(); ++it) {
    const std::string href = (*it)[1].str();
    if (iequals(prefix_of(trim(href), 7), "mailto:")) continue;
    if (icontains(href, "contact") || icontains(strip_tags((*it)[2].str()), "contact")) {
      out.push_back(resolve_url(base_url, href));
    }
  }
  return out;
}

ProbeOutcome StubProber::probe(const std::string& email) {
  std::lock_guard lock(mu_);
  probed_.push_back(email);
  return delivered_.count(to_lower(email)) ? ProbeOutcome::kDelivered : default_;
}

std::vector<std::string> StubProber::probed() const {
  std::lock_guard lock(mu_);
  return probed_;
}

ProbeOutcome RateLimitedProber::probe(const std::string& email) {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    slot = std::max(std::chrono::steady_clock::now(), next_);
    next_ = slot + min_interval_;
  }
  std::this_thread::sleep_until(slot);
  return inner_.probe(email);
}

bool probe_deliverability(ContactRecord& record, DeliverabilityProber* prober) {
  if (!prober) throw Error(ErrorCode::kProbeUnavailable, "no prober configured for " + record.email);
  record.verified = prober->probe(record.email) == ProbeOutcome::kDelivered;
  return record.verified;
}

ContactDiscovery discover_contacts(std::string_view entity_domain, EntityRole role,
                                   const CrawlSnapshot& snapshot, Transport& fetcher,
                                   DeliverabilityProber* prober, const Clock& clock) {
  const std::string entity = registrable_domain(entity_domain);
  ContactDiscovery result;
  std::set<std::string> seen;

  auto add = [&](const std::string& email, ContactSource source, bool verified) {
    if (!seen.insert(to_lower(email)).second) return;
    result.contacts.push_back({entity, email, source, clock(), verified});
  };

  auto from_ads_txt = [&] {
    for (const auto& host : {entity, "www." + entity}) {
      auto it = snapshot.ads_txt_files.find(host);
      if (it == snapshot.ads_txt_files.end()) continue;
      for (const auto& value : it->second.variable_values("CONTACT")) {
        for (const auto& email : extract_emails(value)) add(email, ContactSource::kAdsTxt, false);
      }
    }
  };

  auto from_sellers_json = [&] {
    auto it = snapshot.sellers_json_files.find(entity);
    if (it == snapshot.sellers_json_files.end() || !it->second.contact_email) return;
    for (const auto& email : extract_emails(*it->second.contact_email)) {
      add(email, ContactSource::kSellersJson, false);
    }
  };

  auto from_contact_page = [&] {
    const std::string home_url = "https://" + entity + "/";
    auto home = fetch_page(fetcher, home_url);
    if (!home.ok() || !is_html_like(home)) return;
    auto links = find_contact_links(home.body, home.final_url.empty() ? home_url : home.final_url);
    if (links.empty()) return;
    auto page = fetch_page(fetcher, links.front());
    if (!page.ok() || !is_html_like(page)) return;
    for (const auto& email : extract_emails(strip_tags(page.body))) {
      add(email, ContactSource::kContactPage, false);
    }
    static const std::regex mailto(R"(mailto:([^"'?>\s]+))", std::regex::icase);
    for (auto it = std::sregex_iterator(page.body.begin(), page.body.end(), mailto);
         it != std::sregex_iterator(); ++it) {
      for (const auto& email : extract_emails((*it)[1].str())) add(email, ContactSource::kContactPage, false);
    }
  };

  switch (role) {
    case EntityRole::kPublisher:
      from_ads_txt();
      from_contact_page();
      break;
    case EntityRole::kAdNetwork:
      from_sellers_json();
      from_contact_page();
      break;
    case EntityRole::kAdvertiser:
      from_contact_page();
      break;
  }

  if (result.contacts.empty()) {
    for (auto prefix : kCommonPrefixes) {
      ContactRecord candidate{entity, std::string(prefix) + "@" + entity, ContactSource::kCommonPrefix,
                              clock(), false};
      try {
        if (probe_deliverability(candidate, prober)) add(candidate.email, candidate.source, true);
      } catch (const Error& e) {
        result.notes.push_back(std::string(error_code_name(e.code())) + ": " + candidate.email);
      }
    }
  }

  if (result.contacts.empty()) {
    throw Error(ErrorCode::kNoContactFound, "no contact found for " + entity);
  }
  return result;
}

std::string format_contact_book(const std::vector<ContactBookRow>& rows) {
  std::string out = csv::format_row({"entity_domain", "role", "email", "source", "verified"});
  for (const auto& row : rows) {
    out += csv::format_row({row.record.entity_domain, std::string(entity_role_name(row.role)),
                            row.record.email, std::string(contact_source_name(row.record.source)),
                            row.record.verified ? "true" : "false"});
  }
  return out;
}

std::vector<ContactBookRow> parse_contact_book(std::string_view text) {
  std::vector<ContactBookRow> out;
  for (const auto& row : csv::parse(text)) {
    if (row.size() < 5 || row[0] == "entity_domain") continue;
    auto role = parse_entity_role(row[1]);
    auto source = parse_contact_source(row[3]);
    if (!role || !source) throw Error(ErrorCode::kInvalidInput, "bad contact book row for " + row[0]);
    ContactBookRow r;
    r.role = *role;
    r.record = {row[0], row[2], *source, {}, row[4] == "true"};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace darkpool
