#include "darkpool/campaign.hpp"

#include <algorithm>
#include <set>

#include "darkpool/csv.hpp"
#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"

namespace darkpool {

namespace {

constexpr std::string_view kVictimDynamic =
    "During network traffic analysis of problematic publishers, we observed that <num> sellerID(s) in "
    "your ads.txt are being used by <num> potentially problematic publisher(s) to monetize their ad "
    "inventory.";
constexpr std::string_view kVictimStatic =
    "We observed that <num> sellerID(s) in your ads.txt are being used in ads.txt of at least <num> "
    "other potentially problematic publishers.";
constexpr std::string_view kNetworkIssued =
    "<num> seller IDs issued by you are being pooled by <num> potentially problematic publishers.";
constexpr std::string_view kNetworkOwned =
    "<num> seller IDs owned by you and issued by another ad-network are being pooled by <num> "
    "potentially problematic publishers.";
constexpr std::string_view kNetworkConfirmedIssued =
    "We confirmed that <num> seller IDs issued by you are being pooled by <num> potentially "
    "problematic publishers.";
constexpr std::string_view kNetworkConfirmedOwned =
    "We confirmed that <num> seller IDs owned by you and issued by another ad-network are being pooled "
    "by <num> potentially problematic publishers.";
constexpr std::string_view kAdvertiserCreative =
    "An ad creative associated with your brand was observed on <num> problematic publishers. This "
    "association could negatively impact your reputation and future business.";

constexpr std::string_view kAdvertiserSubject = "Brand safety violation for your domain ";
constexpr std::string_view kDefaultSubject = "Potential ad inventory vulnerability for your domain ";

using PoolKey = std::pair<std::string, std::string>;

PoolKey key_of(const DarkPoolFinding& f) { return {f.pool.ad_system_domain, f.pool.seller_id}; }
PoolKey key_of(const EvidenceRecord& e) { return {e.issuing_ad_system, e.seller_id}; }

// Replaces each "<num>" in order.
std::string fill(std::string_view tmpl, std::initializer_list<std::size_t> counts) {
  std::string out(tmpl);
  for (auto n : counts) {
    auto pos = out.find("<num>");
    if (pos == std::string::npos) break;
    out.replace(pos, 5, std::to_string(n));
  }
  return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

struct Relevant {
  std::vector<const DarkPoolFinding*> findings;
  std::vector<const EvidenceRecord*> evidence;
};

Relevant relevant_for(const std::string& entity, EntityRole role,
                      const std::vector<DarkPoolFinding>& findings,
                      const std::vector<EvidenceRecord>& evidence) {
  Relevant r;
  std::set<PoolKey> keys;
  switch (role) {
    case EntityRole::kPublisher:
      for (const auto& f : findings) {
        if (std::binary_search(f.victim_members.begin(), f.victim_members.end(), entity)) {
          r.findings.push_back(&f);
          keys.insert(key_of(f));
        }
      }
      for (const auto& e : evidence) {
        if (e.owner_domain == entity || keys.count(key_of(e))) r.evidence.push_back(&e);
      }
      break;
    case EntityRole::kAdNetwork:
      for (const auto& f : findings) {
        if (f.pool.ad_system_domain == entity || f.pool.owner_domain == entity) r.findings.push_back(&f);
      }
      for (const auto& e : evidence) {
        if (e.issuing_ad_system == entity || e.owner_domain == entity) r.evidence.push_back(&e);
      }
      break;
    case EntityRole::kAdvertiser:
      for (const auto& e : evidence) {
        if (e.advertiser_domain == entity) {
          r.evidence.push_back(&e);
          keys.insert(key_of(e));
        }
      }
      for (const auto& f : findings) {
        if (keys.count(key_of(f))) r.findings.push_back(&f);
      }
      break;
  }
  return r;
}

SummaryCounts count_findings(const std::vector<const DarkPoolFinding*>& fs) {
  std::set<PoolKey> ids;
  std::set<std::string> pubs;
  for (const auto* f : fs) {
    ids.insert(key_of(*f));
    for (const auto& m : f->problematic_members) pubs.insert(m.domain);
  }
  return {ids.size(), pubs.size()};
}

SummaryCounts count_evidence(const std::vector<const EvidenceRecord*>& es) {
  std::set<PoolKey> ids;
  std::set<std::string> pubs;
  for (const auto* e : es) {
    ids.insert(key_of(*e));
    pubs.insert(e->crawled_publisher);
  }
  return {ids.size(), pubs.size()};
}

template <typename T, typename Pred>
std::vector<const T*> filter(const std::vector<const T*>& items, Pred pred) {
  std::vector<const T*> out;
  std::copy_if(items.begin(), items.end(), std::back_inserter(out), [&](const T* p) { return pred(*p); });
  return out;
}

struct Instance {
  PoolKey key;
  std::string text;
};

std::vector<Instance> build_instances(EntityRole role, const Relevant& rel) {
  std::map<PoolKey, std::set<std::string>> observed_on;
  std::map<PoolKey, std::set<std::string>> advertisers;
  std::map<PoolKey, std::set<std::string>> hars;
  std::map<PoolKey, std::string> evidence_owner;
  for (const auto* e : rel.evidence) {
    observed_on[key_of(*e)].insert(e->crawled_publisher);
    if (e->advertiser_domain) advertisers[key_of(*e)].insert(*e->advertiser_domain);
    if (!e->har_path.empty()) hars[key_of(*e)].insert(e->har_path);
    evidence_owner.emplace(key_of(*e), e->owner_domain);
  }

  std::map<PoolKey, std::string> texts;
  for (const auto* f : rel.findings) {
    std::vector<std::string> problematic;
    for (const auto& m : f->problematic_members) problematic.push_back(m.domain);
    std::string text = f->pool.ad_system_domain + " seller ID " + f->pool.seller_id;
    if (f->pool.owner_domain) text += " (declared owner: " + *f->pool.owner_domain + ")";
    text += ". Listed in the ads.txt of problematic publishers " + join(problematic);
    if (!f->victim_members.empty()) text += " and of other publishers " + join(f->victim_members);
    text += ".";
    texts[key_of(*f)] = std::move(text);
  }
  for (const auto& [key, pubs] : observed_on) {
    auto& text = texts[key];
    if (text.empty()) {
      text = key.first + " seller ID " + key.second + " (declared owner: " + evidence_owner[key] + ").";
    }
    std::vector<std::string> list(pubs.begin(), pubs.end());
    text += " Observed in network traffic on " + join(list) + ".";
    if (role == EntityRole::kAdvertiser && advertisers.count(key)) {
      std::vector<std::string> adv(advertisers[key].begin(), advertisers[key].end());
      text += " The ad click chain ended at " + join(adv) + ".";
    }
    if (hars.count(key)) {
      std::vector<std::string> files(hars[key].begin(), hars[key].end());
      text += " Captured in " + join(files) + ".";
    }
  }

  std::vector<Instance> out;
  for (auto& [key, text] : texts) out.push_back({key, std::move(text)});
  return out;
}

std::vector<std::string> root_causes(EntityRole role) {
  std::vector<std::string> out = {
      "A seller ID is an account identifier that an ad system issues to one seller. Buyers check a "
      "publisher's ads.txt and the ad system's sellers.json to confirm that inventory offered under an "
      "ID really belongs to the declared seller.",
      "When the same ID appears in the ads.txt files of publishers owned by different organizations, "
      "any of them can sell impressions that buyers will attribute to the declared owner. Problematic "
      "publishers use such shared IDs to reach demand that would otherwise exclude them."};
  if (role == EntityRole::kAdvertiser) {
    out.push_back(
        "Your creative was delivered on the listed publishers because the bid request carried a seller ID "
        "that buyers associate with a different, reputable publisher.");
  }
  return out;
}

std::vector<std::string> remediations(EntityRole role) {
  switch (role) {
    case EntityRole::kPublisher:
      return {"Review the listed ads.txt lines. Remove entries for accounts you no longer use.",
              "Ask each listed ad system to confirm which domains are authorized under your seller IDs and "
              "to stop accepting traffic from the problematic publishers."};
    case EntityRole::kAdNetwork:
      return {"Audit the listed seller IDs and suspend or split accounts that monetize unrelated publishers.",
              "Keep the domain field of each sellers.json entry aligned with the inventory actually sold "
              "under that ID."};
    case EntityRole::kAdvertiser:
      return {"Add the listed publishers to your exclusion lists.",
              "Ask your buying platform to reject bid requests whose seller ID does not match the domain "
              "it is declared for in sellers.json."};
  }
  return {};
}

Branding branding_for(Group g) { return g == Group::kT2Activist ? Branding::kActivist : Branding::kAcademic; }

std::string intro(Branding b, const BrandingProfile& p) {
  if (b == Branding::kActivist) {
    return "We are " + p.organization +
           ", and we track how advertising revenue reaches problematic publishers through the programmatic "
           "supply chain.";
  }
  return "We are researchers at " + p.organization +
         " studying how seller identifiers are shared across publishers in programmatic advertising.";
}

std::vector<Attachment> advertiser_attachments(const Relevant& rel, const RenderOptions& options) {
  std::set<std::string> hars;
  for (const auto* e : rel.evidence) {
    if (!e->har_path.empty()) hars.insert(e->har_path);
  }
  std::vector<Attachment> out;
  std::set<std::string> shots;
  for (const auto& har : hars) {
    out.push_back({"har", options.har_dir ? (*options.har_dir / har).string() : har});
    if (!options.screenshot_dir || !std::filesystem::is_directory(*options.screenshot_dir)) continue;
    const auto stem = std::filesystem::path(har).stem().string();
    for (const auto& entry : std::filesystem::directory_iterator(*options.screenshot_dir)) {
      const auto name = entry.path().filename().string();
      const auto ext = to_lower(entry.path().extension().string());
      if (name.rfind(stem, 0) == 0 && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) {
        shots.insert(entry.path().string());
      }
    }
  }
  for (const auto& s : shots) out.push_back({"screenshot", s});
  return out;
}

}  // namespace

std::string_view group_name(Group g) {
  switch (g) {
    case Group::kT1Academic: return "T1_ACADEMIC";
    case Group::kT2Activist: return "T2_ACTIVIST";
    case Group::kControl: return "CONTROL";
  }
  return "CONTROL";
}

std::optional<Group> parse_group(std::string_view s) {
  for (auto g : {Group::kT1Academic, Group::kT2Activist, Group::kControl}) {
    if (iequals(s, group_name(g))) return g;
  }
  if (iequals(s, "t1")) return Group::kT1Academic;
  if (iequals(s, "t2")) return Group::kT2Activist;
  return std::nullopt;
}

std::string_view branding_name(Branding b) { return b == Branding::kAcademic ? "ACADEMIC" : "ACTIVIST"; }

std::optional<RoundNumber> parse_round_number(int n) {
  if (n < 1 || n > 3) return std::nullopt;
  return static_cast<RoundNumber>(n);
}

EntityRole role_for_round(RoundNumber r) {
  switch (r) {
    case RoundNumber::kPublishers: return EntityRole::kPublisher;
    case RoundNumber::kAdNetworks: return EntityRole::kAdNetwork;
    case RoundNumber::kAdvertisers: return EntityRole::kAdvertiser;
  }
  return EntityRole::kPublisher;
}

std::vector<std::string> parse_popularity_csv(std::string_view text) {
  std::vector<std::pair<long, std::string>> ranked;
  for (const auto& row : csv::parse(text)) {
    if (row.size() < 2) continue;
    char* end = nullptr;
    const long rank = std::strtol(row[0].c_str(), &end, 10);
    if (end == row[0].c_str() || rank <= 0) continue;  // header
    ranked.emplace_back(rank, normalize_domain(row[1]));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  for (auto& [rank, domain] : ranked) out.push_back(std::move(domain));
  return out;
}

std::vector<std::string> select_recipients(RoundNumber round,
                                           const std::vector<DarkPoolFinding>& findings,
                                           const std::vector<EvidenceRecord>& evidence,
                                           const std::vector<std::string>& popularity,
                                           const RecipientOptions& options) {
  std::set<std::string> out;
  switch (round) {
    case RoundNumber::kPublishers: {
      std::set<std::string> top;
      for (std::size_t i = 0; i < popularity.size() && i < options.top_k; ++i) {
        top.insert(registrable_domain(popularity[i]));
      }
      for (const auto& f : findings) {
        for (const auto& v : f.victim_members) {
          if (top.count(v)) out.insert(v);
        }
      }
      break;
    }
    case RoundNumber::kAdNetworks: {
      std::map<std::string, std::set<PoolKey>> facilitated;
      for (const auto& f : findings) {
        facilitated[f.pool.ad_system_domain].insert(key_of(f));
        if (options.ad_network_basis == AdNetworkBasis::kIssuedOrOwned && f.pool.owner_domain) {
          facilitated[*f.pool.owner_domain].insert(key_of(f));
        }
      }
      for (const auto& [domain, pools] : facilitated) {
        if (pools.size() > 1) out.insert(domain);
      }
      break;
    }
    case RoundNumber::kAdvertisers:
      for (const auto& e : evidence) {
        if (e.advertiser_domain && !e.advertiser_domain->empty()) out.insert(*e.advertiser_domain);
      }
      break;
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptyRecipientSet,
                "no recipients for round " + std::to_string(static_cast<int>(round)));
  }
  return {out.begin(), out.end()};
}

std::uint64_t bounded_random(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Largest multiple of bound that fits; draws above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::vector<GroupAssignment> assign_groups(std::vector<std::string> recipients, std::uint64_t seed,
                                           RoundNumber round) {
  std::sort(recipients.begin(), recipients.end());
  recipients.erase(std::unique(recipients.begin(), recipients.end()), recipients.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = recipients.size(); i > 1; --i) {
    std::swap(recipients[i - 1], recipients[bounded_random(rng, i)]);
  }
  static constexpr Group kDeal[] = {Group::kT1Academic, Group::kT2Activist, Group::kControl};
  std::vector<GroupAssignment> out;
  out.reserve(recipients.size());
  for (std::size_t i = 0; i < recipients.size(); ++i) {
    out.push_back({std::move(recipients[i]), kDeal[i % 3], seed, round});
  }
  return out;
}

StakeholderSummary summarize_for(std::string_view entity_domain, EntityRole role,
                                 const std::vector<DarkPoolFinding>& findings,
                                 const std::vector<EvidenceRecord>& evidence) {
  const auto entity = registrable_domain(entity_domain);
  const auto rel = relevant_for(entity, role, findings, evidence);
  StakeholderSummary s;
  switch (role) {
    case EntityRole::kPublisher:
      s.sentences.emplace_back(kVictimDynamic, count_evidence(rel.evidence));
      s.sentences.emplace_back(kVictimStatic, count_findings(rel.findings));
      break;
    case EntityRole::kAdNetwork: {
      auto issued = [&](const auto& x) { return key_of(x).first == entity; };
      auto owned = [&](const auto& x) { return key_of(x).first != entity; };
      s.sentences.emplace_back(kNetworkIssued, count_findings(filter(rel.findings, issued)));
      s.sentences.emplace_back(kNetworkOwned, count_findings(filter(rel.findings, owned)));
      s.sentences.emplace_back(kNetworkConfirmedIssued, count_evidence(filter(rel.evidence, issued)));
      s.sentences.emplace_back(kNetworkConfirmedOwned, count_evidence(filter(rel.evidence, owned)));
      break;
    }
    case EntityRole::kAdvertiser:
      s.sentences.emplace_back(kAdvertiserCreative, count_evidence(rel.evidence));
      break;
  }
  return s;
}

NotificationPayload render_notification(std::string_view entity_domain, EntityRole role, Group group,
                                        const std::vector<ContactRecord>& contacts,
                                        const std::vector<DarkPoolFinding>& findings,
                                        const std::vector<EvidenceRecord>& evidence,
                                        const RenderOptions& options) {
  const auto entity = registrable_domain(entity_domain);
  if (group == Group::kControl) {
    throw Error(ErrorCode::kControlGroupWithheld, entity + " is in the control group");
  }

  std::vector<std::string> sentences;
  for (const auto& [tmpl, counts] : summarize_for(entity, role, findings, evidence).sentences) {
    if (role == EntityRole::kAdvertiser) {
      if (counts.publishers > 0) sentences.push_back(fill(tmpl, {counts.publishers}));
    } else if (counts.ids > 0) {
      sentences.push_back(fill(tmpl, {counts.ids, counts.publishers}));
    }
  }
  if (sentences.empty()) throw Error(ErrorCode::kNothingToReport, "nothing to report for " + entity);

  auto contact = std::find_if(contacts.begin(), contacts.end(), [&](const ContactRecord& c) {
    return registrable_domain(c.entity_domain) == entity && !c.email.empty();
  });
  if (contact == contacts.end()) throw Error(ErrorCode::kMissingContact, "no contact for " + entity);

  NotificationPayload p;
  p.entity_domain = entity;
  p.role = role;
  p.group = group;
  p.round_number = options.round_number;
  p.recipient = *contact;
  p.branding = branding_for(group);
  BrandingProfile profile;
  if (auto it = options.profiles.find(p.branding); it != options.profiles.end()) profile = it->second;

  p.subject = std::string(role == EntityRole::kAdvertiser ? kAdvertiserSubject : kDefaultSubject) + entity;

  std::string body = "Hello,\n\n" + intro(p.branding, profile) + "\n\n";
  for (const auto& s : sentences) body += s + "\n\n";
  body +=
      "The attached report lists the affected instances together with their root causes and the options "
      "available to remediate them.\n\n";
  body += "Best regards,\n" + profile.sender_name + "\n" + profile.organization + "\n";
  if (!profile.website.empty()) body += profile.website + "\n";
  p.body = std::move(body);

  const auto rel = relevant_for(entity, role, findings, evidence);
  auto instances = build_instances(role, rel);
  p.total_instances = instances.size();
  ReportSection inst{"Instances", {}};
  if (instances.size() > options.max_instances) {
    inst.paragraphs.push_back("Showing " + std::to_string(options.max_instances) + " of " +
                              std::to_string(instances.size()) + " instances.");
    instances.resize(options.max_instances);
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    inst.paragraphs.push_back(std::to_string(i + 1) + ". " + instances[i].text);
  }
  p.report.title = "Dark pooling report for " + entity;
  p.report.branding_line = "Prepared by " + profile.organization +
                           (profile.website.empty() ? std::string() : " (" + profile.website + ")");
  p.report.sections = {std::move(inst), {"Root causes", root_causes(role)},
                       {"Remediation options", remediations(role)}};

  p.attachments.push_back({"report", "report.pdf"});
  if (role == EntityRole::kAdvertiser) {
    for (auto& a : advertiser_attachments(rel, options)) p.attachments.push_back(std::move(a));
  }
  return p;
}

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::kSend: return "SEND";
    case EventKind::kReminder: return "REMINDER";
    case EventKind::kPostSnapshotOpen: return "POST_SNAPSHOT_OPEN";
    case EventKind::kPostSnapshotClose: return "POST_SNAPSHOT_CLOSE";
  }
  return "SEND";
}

std::vector<RoundEvent> RoundPlan::events() const {
  return {{EventKind::kSend, send_at},
          {EventKind::kReminder, reminder_at},
          {EventKind::kPostSnapshotOpen, post_window_start},
          {EventKind::kPostSnapshotClose, post_window_end}};
}

RoundPlan schedule_round(const CampaignRound& round, const Clock& clock,
                         const std::vector<RoundPlan>& prior_rounds, const ScheduleOffsets& offsets) {
  if (round.pre_snapshot_id.empty()) {
    throw Error(ErrorCode::kInvalidInput, "round has no pre snapshot");
  }
  if (offsets.reminder < Days{7} || offsets.reminder > Days{14}) {
    throw Error(ErrorCode::kInvalidConfig, "reminder offset must be 7 to 14 days");
  }
  if (offsets.post_window_start <= offsets.reminder || offsets.post_window_end < offsets.post_window_start) {
    throw Error(ErrorCode::kInvalidConfig, "post-snapshot window must follow the reminder");
  }
  const Timestamp t0 = round.sent_at.value_or(clock());
  for (const auto& prior : prior_rounds) {
    const Timestamp free_from = prior.post_snapshot_completed_at.value_or(prior.post_window_end);
    if (t0 < free_from) {
      throw Error(ErrorCode::kOverlapWithPriorRound,
                  "round " + std::to_string(static_cast<int>(round.round_number)) + " starts at " +
                      format_timestamp(t0) + " before round " +
                      std::to_string(static_cast<int>(prior.round_number)) + " is measured (" +
                      format_timestamp(free_from) + ")");
    }
  }
  RoundPlan plan;
  plan.round_number = round.round_number;
  plan.send_at = t0;
  plan.reminder_at = t0 + offsets.reminder;
  plan.post_window_start = t0 + offsets.post_window_start;
  plan.post_window_end = t0 + offsets.post_window_end;
  return plan;
}

void to_json(nlohmann::json& j, const GroupAssignment& a) {
  j = nlohmann::json{{"entity_domain", a.entity_domain},
                     {"group", group_name(a.group)},
                     {"seed", a.seed},
                     {"round_number", static_cast<int>(a.round_number)}};
}

void to_json(nlohmann::json& j, const RoundPlan& p) {
  j = nlohmann::json{{"round_number", static_cast<int>(p.round_number)},
                     {"send_at", format_timestamp(p.send_at)},
                     {"reminder_at", format_timestamp(p.reminder_at)},
                     {"post_window_start", format_timestamp(p.post_window_start)},
                     {"post_window_end", format_timestamp(p.post_window_end)}};
  if (p.post_snapshot_completed_at) {
    j["post_snapshot_completed_at"] = format_timestamp(*p.post_snapshot_completed_at);
  }
}

void from_json(const nlohmann::json& j, RoundPlan& p) {
  auto ts = [&](const char* key) {
    auto t = parse_timestamp(j.at(key).get<std::string>());
    if (!t) throw Error(ErrorCode::kInvalidInput, std::string("bad timestamp in ") + key);
    return *t;
  };
  auto round = parse_round_number(j.at("round_number").get<int>());
  if (!round) throw Error(ErrorCode::kInvalidInput, "bad round_number");
  p.round_number = *round;
  p.send_at = ts("send_at");
  p.reminder_at = ts("reminder_at");
  p.post_window_start = ts("post_window_start");
  p.post_window_end = ts("post_window_end");
  if (j.contains("post_snapshot_completed_at")) {
    p.post_snapshot_completed_at = ts("post_snapshot_completed_at");
  } else {
    p.post_snapshot_completed_at.reset();
  }
}

}  // namespace darkpool
