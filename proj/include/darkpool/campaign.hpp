#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "darkpool/contacts.hpp"
#include "darkpool/har.hpp"
#include "darkpool/pools.hpp"
#include "darkpool/report_document.hpp"
#include "darkpool/time.hpp"

namespace darkpool {

// Round 1 notifies victim publishers, round 2 ad networks, round 3 advertisers.
enum class RoundNumber { kPublishers = 1, kAdNetworks = 2, kAdvertisers = 3 };
enum class Group { kT1Academic, kT2Activist, kControl };
enum class Branding { kAcademic, kActivist };

std::string_view group_name(Group g);
std::optional<Group> parse_group(std::string_view s);
std::string_view branding_name(Branding b);
std::optional<RoundNumber> parse_round_number(int n);
EntityRole role_for_round(RoundNumber r);

struct CampaignRound {
  RoundNumber round_number = RoundNumber::kPublishers;
  std::vector<std::string> recipients;
  std::string pre_snapshot_id;
  std::string post_snapshot_id;
  std::optional<Timestamp> sent_at;
  std::optional<Timestamp> reminder_at;
};

struct GroupAssignment {
  std::string entity_domain;
  Group group = Group::kControl;
  std::uint64_t seed = 0;
  RoundNumber round_number = RoundNumber::kPublishers;

  bool operator==(const GroupAssignment&) const = default;
};

// Ranked popularity list; rank r is at index r-1. Reads the Tranco layout
// (rank,domain) and tolerates a header row.
std::vector<std::string> parse_popularity_csv(std::string_view text);

// Which findings make an ad system a round-2 recipient.
enum class AdNetworkBasis { kIssued, kIssuedOrOwned };

struct RecipientOptions {
  std::size_t top_k = 10000;
  AdNetworkBasis ad_network_basis = AdNetworkBasis::kIssued;
};

// Sorted, deduplicated registrable domains. Throws kEmptyRecipientSet.
std::vector<std::string> select_recipients(RoundNumber round,
                                           const std::vector<DarkPoolFinding>& findings,
                                           const std::vector<EvidenceRecord>& evidence,
                                           const std::vector<std::string>& popularity,
                                           const RecipientOptions& options = {});

// Uniform integer in [0, bound) by rejection sampling; stable across
// standard library implementations, unlike std::uniform_int_distribution.
std::uint64_t bounded_random(std::mt19937_64& rng, std::uint64_t bound);

// Sorts, shuffles with a seeded Fisher-Yates, then deals round-robin into
// T1, T2, CONTROL. Output is in dealt order.
std::vector<GroupAssignment> assign_groups(std::vector<std::string> recipients, std::uint64_t seed,
                                           RoundNumber round = RoundNumber::kPublishers);

struct BrandingProfile {
  std::string sender_name = "The research team";
  std::string organization = "the research team";
  std::string website;
  std::string reply_to;
};

struct Attachment {
  std::string kind;  // "report", "har" or "screenshot"
  std::string path;

  bool operator==(const Attachment&) const = default;
};

struct NotificationPayload {
  std::string entity_domain;
  EntityRole role = EntityRole::kPublisher;
  Group group = Group::kT1Academic;
  RoundNumber round_number = RoundNumber::kPublishers;
  ContactRecord recipient;
  std::string subject;
  std::string body;
  ReportLayout report;
  std::vector<Attachment> attachments;
  Branding branding = Branding::kAcademic;
  std::size_t total_instances = 0;  // before the report cap
};

struct RenderOptions {
  std::map<Branding, BrandingProfile> profiles;
  std::size_t max_instances = 25;
  // Screenshots named after a HAR file's stem are attached to advertiser payloads.
  std::optional<std::filesystem::path> screenshot_dir;
  // Evidence har_paths are relative to this directory when set.
  std::optional<std::filesystem::path> har_dir;
  RoundNumber round_number = RoundNumber::kPublishers;
};

// Counts behind each summary sentence, exposed for tests and the report.
struct SummaryCounts {
  std::size_t ids = 0;
  std::size_t publishers = 0;
};

struct StakeholderSummary {
  // Victim publisher: static, dynamic. Ad network: issued, owned,
  // confirmed issued, confirmed owned. Advertiser: creatives.
  std::vector<std::pair<std::string, SummaryCounts>> sentences;
};

StakeholderSummary summarize_for(std::string_view entity, EntityRole role,
                                 const std::vector<DarkPoolFinding>& findings,
                                 const std::vector<EvidenceRecord>& evidence);

// Throws kControlGroupWithheld, kNothingToReport or kMissingContact.
NotificationPayload render_notification(std::string_view entity, EntityRole role, Group group,
                                        const std::vector<ContactRecord>& contacts,
                                        const std::vector<DarkPoolFinding>& findings,
                                        const std::vector<EvidenceRecord>& evidence,
                                        const RenderOptions& options = {});

struct ScheduleOffsets {
  Days reminder{10};
  Days post_window_start{28};
  Days post_window_end{35};
};

enum class EventKind { kSend, kReminder, kPostSnapshotOpen, kPostSnapshotClose };
std::string_view event_kind_name(EventKind k);

struct RoundEvent {
  EventKind kind = EventKind::kSend;
  Timestamp at{};

  bool operator==(const RoundEvent&) const = default;
};

struct RoundPlan {
  RoundNumber round_number = RoundNumber::kPublishers;
  Timestamp send_at{};
  Timestamp reminder_at{};
  Timestamp post_window_start{};
  Timestamp post_window_end{};
  // Set once the post snapshot exists; a later round may start from then.
  std::optional<Timestamp> post_snapshot_completed_at;

  std::vector<RoundEvent> events() const;
};

// T0 is clock(). Throws kInvalidInput without a pre snapshot, kInvalidConfig
// for offsets outside the reminder band or an inverted window, and
// kOverlapWithPriorRound when T0 precedes a prior round's post snapshot.
RoundPlan schedule_round(const CampaignRound& round, const Clock& clock,
                         const std::vector<RoundPlan>& prior_rounds = {},
                         const ScheduleOffsets& offsets = {});

void to_json(nlohmann::json& j, const GroupAssignment& a);
void to_json(nlohmann::json& j, const RoundPlan& p);
void from_json(const nlohmann::json& j, RoundPlan& p);

}  // namespace darkpool
