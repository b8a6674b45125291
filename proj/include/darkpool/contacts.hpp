#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "darkpool/crawler.hpp"
#include "darkpool/time.hpp"
#include "darkpool/transport.hpp"

namespace darkpool {

enum class ContactSource { kContactPage, kAdsTxt, kSellersJson, kCommonPrefix };
enum class EntityRole { kPublisher, kAdNetwork, kAdvertiser };

std::string_view contact_source_name(ContactSource s);
std::optional<ContactSource> parse_contact_source(std::string_view s);
std::string_view entity_role_name(EntityRole r);
std::optional<EntityRole> parse_entity_role(std::string_view s);

struct ContactRecord {
  std::string entity_domain;
  std::string email;
  ContactSource source = ContactSource::kContactPage;
  Timestamp discovered_at{};
  bool verified = false;

  bool operator==(const ContactRecord&) const = default;
};

// Mailbox prefixes tried as a last resort, each only after a successful
// deliverability probe.
inline constexpr std::string_view kCommonPrefixes[] = {"info", "support", "help", "webmaster", "contact"};

// All matches of [\w\.-]+@[\w\.-]+\.\w+ in document order.
std::vector<std::string> extract_emails(std::string_view text);

// Removes tags, script/style contents and decodes a few common entities.
std::string strip_tags(std::string_view html);

// hrefs of anchors whose target or text mentions "contact", resolved against
// base_url, in document order. mailto: links are excluded.
std::vector<std::string> find_contact_links(std::string_view html, std::string_view base_url);

enum class ProbeOutcome { kDelivered, kBounced };

// Sends a test message and reports whether it bounced.
class DeliverabilityProber {
 public:
  virtual ~DeliverabilityProber() = default;
  virtual ProbeOutcome probe(const std::string& email) = 0;
};

// Answers from a fixed list; everything else gets the default outcome.
class StubProber : public DeliverabilityProber {
 public:
  explicit StubProber(ProbeOutcome default_outcome = ProbeOutcome::kBounced,
                      std::set<std::string> delivered = {})
      : default_(default_outcome), delivered_(std::move(delivered)) {}
  ProbeOutcome probe(const std::string& email) override;
  std::vector<std::string> probed() const;

 private:
  ProbeOutcome default_;
  std::set<std::string> delivered_;
  mutable std::mutex mu_;
  std::vector<std::string> probed_;
};

// Spaces calls to the wrapped prober by at least `min_interval`.
class RateLimitedProber : public DeliverabilityProber {
 public:
  RateLimitedProber(DeliverabilityProber& inner, std::chrono::milliseconds min_interval)
      : inner_(inner), min_interval_(min_interval) {}
  ProbeOutcome probe(const std::string& email) override;

 private:
  DeliverabilityProber& inner_;
  std::chrono::milliseconds min_interval_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

// Sets record.verified from the probe. Throws kProbeUnavailable when no
// prober is configured.
bool probe_deliverability(ContactRecord& record, DeliverabilityProber* prober);

struct ContactDiscovery {
  std::vector<ContactRecord> contacts;  // priority order
  std::vector<std::string> notes;       // e.g. skipped common-prefix candidates
};

// Tries the role's sources in priority order. Higher-priority addresses come
// first; common prefixes are only tried when nothing else was found.
// Throws kNoContactFound when every source is exhausted.
ContactDiscovery discover_contacts(std::string_view entity_domain, EntityRole role,
                                   const CrawlSnapshot& snapshot, Transport& fetcher,
                                   DeliverabilityProber* prober = nullptr,
                                   const Clock& clock = system_clock());

// CSV contact book: entity_domain,role,email,source,verified
struct ContactBookRow {
  EntityRole role = EntityRole::kPublisher;
  ContactRecord record;
};
std::string format_contact_book(const std::vector<ContactBookRow>& rows);
std::vector<ContactBookRow> parse_contact_book(std::string_view text);

}  // namespace darkpool
