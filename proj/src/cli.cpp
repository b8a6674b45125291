#include "darkpool/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "darkpool/campaign.hpp"
#include "darkpool/csv.hpp"
#include "darkpool/did.hpp"
#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"
#include "darkpool/evidence.hpp"
#include "darkpool/fs_util.hpp"
#include "darkpool/json_io.hpp"
#include "darkpool/outbox.hpp"
#include "darkpool/pools.hpp"
#include "darkpool/snapshot_store.hpp"
#include "darkpool/workspace.hpp"

namespace darkpool {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string workspace;
  std::string now;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool dry_run = false;
  bool live = false;
  std::string snapshot;
  int round = 0;
  std::string group = "union";
  std::string pre;
  std::string post;
  std::string pairs;
  std::string before;
  std::string after;
};

struct Context {
  const Options& opt;
  const PipelineConfig& config;
  const Workspace& ws;
  const Clock& clock;
  const CliEnvironment& env;
};

[[noreturn]] void bad_input(const std::string& what) { throw Error(ErrorCode::kInvalidInput, what); }

std::string round_dir(RoundNumber r) { return "round" + std::to_string(static_cast<int>(r)); }

// Identifiers become path components.
const std::string& checked_id(const std::string& id, const char* what) {
  if (id.empty() || id == "." || id == ".." || id.find('/') != std::string::npos ||
      id.find('\\') != std::string::npos) {
    bad_input(std::string("unusable ") + what + ": '" + id + "'");
  }
  return id;
}

RoundNumber require_round(const Options& o) {
  auto r = parse_round_number(o.round);
  if (!r) bad_input("--round must be 1, 2 or 3");
  return *r;
}

const std::string& require_snapshot(const Options& o) {
  if (o.snapshot.empty()) bad_input("--snapshot is required");
  return checked_id(o.snapshot, "snapshot id");
}

SnapshotStore store_of(const Context& c) { return SnapshotStore(c.ws.path("snapshots")); }

std::unique_ptr<Transport> transport_for(const Context& c, const std::string& snapshot_id) {
  if (c.env.transport_factory) return c.env.transport_factory(c.config, snapshot_id);
  return make_transport(c.config, snapshot_id);
}

ProblematicList load_problematic(const PipelineConfig& config) {
  if (!config.inputs.problematic) return {};
  return ProblematicList::from_csv(read_file(*config.inputs.problematic));
}

EntityMap load_entities(const PipelineConfig& config) {
  if (!config.inputs.entities) return {};
  return EntityMap::load(*config.inputs.entities);
}

template <typename T>
std::vector<T> read_jsonl_artifact(const Context& c, const std::string& rel, const char* hint) {
  const auto p = c.ws.path(rel);
  if (!fs::exists(p)) bad_input(rel + " is missing; run " + hint + " first");
  return from_jsonl<T>(read_file(p));
}

std::vector<DarkPoolFinding> load_findings(const Context& c, const std::string& snap) {
  return read_jsonl_artifact<DarkPoolFinding>(c, "detect/" + snap + "/findings.jsonl", "detect");
}

std::vector<SellerPool> load_pools(const Context& c, const std::string& snap) {
  return read_jsonl_artifact<SellerPool>(c, "detect/" + snap + "/pools.jsonl", "detect");
}

// Evidence is optional outside round 3.
std::vector<EvidenceRecord> load_evidence(const Context& c, const std::string& snap) {
  const auto rel = "evidence/" + snap + "/evidence.jsonl";
  if (!fs::exists(c.ws.path(rel))) return {};
  return from_jsonl<EvidenceRecord>(read_file(c.ws.path(rel)));
}

json read_json_artifact(const Context& c, const std::string& rel, const char* hint) {
  const auto p = c.ws.path(rel);
  if (!fs::exists(p)) bad_input(rel + " is missing; run " + hint + " first");
  return json::parse(read_file(p));
}

std::vector<SnapshotTime> snapshot_times(const Context& c) {
  std::vector<SnapshotTime> out;
  const auto store = store_of(c);
  for (const auto& id : store.list()) out.emplace_back(id, store.load(id).started_at);
  return out;
}

std::vector<std::string> recipients_for(const Context& c, RoundNumber round, const std::string& snap) {
  const auto findings = load_findings(c, snap);
  const auto evidence = load_evidence(c, snap);
  std::vector<std::string> popularity;
  if (round == RoundNumber::kPublishers) {
    if (!c.config.inputs.popularity) throw Error(ErrorCode::kInvalidConfig, "inputs.popularity is required for round 1");
    popularity = parse_popularity_csv(read_file(*c.config.inputs.popularity));
  }
  return select_recipients(round, findings, evidence, popularity, c.config.recipients);
}

std::vector<GroupAssignment> load_assignments(const Context& c, RoundNumber round) {
  const auto j = read_json_artifact(c, "campaign/" + round_dir(round) + "/assignments.json", "campaign plan");
  std::vector<GroupAssignment> out;
  for (const auto& item : j.at("assignments")) {
    auto group = parse_group(item.at("group").get<std::string>());
    if (!group) bad_input("bad group in assignments: " + item.at("group").get<std::string>());
    out.push_back({item.at("entity_domain").get<std::string>(), *group, item.at("seed").get<std::uint64_t>(), round});
  }
  return out;
}

std::string plan_pre_snapshot(const Context& c, RoundNumber round) {
  if (!c.opt.snapshot.empty()) return require_snapshot(c.opt);
  const auto plan = read_json_artifact(c, "campaign/" + round_dir(round) + "/plan.json", "campaign plan");
  return checked_id(plan.at("pre_snapshot_id").get<std::string>(), "snapshot id");
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? std::string(sep) : "") + items[i];
  return out;
}

// ---- crawl / detect / evidence / contacts / diff ----

json cmd_crawl(const Context& c) {
  if (!c.config.inputs.seeds) throw Error(ErrorCode::kInvalidConfig, "inputs.seeds is required for crawl");
  const std::string id = c.opt.snapshot.empty() ? format_timestamp(c.clock()).substr(0, 10) : c.opt.snapshot;
  checked_id(id, "snapshot id");
  const auto seed_list = read_domain_list(*c.config.inputs.seeds);
  const std::set<std::string> seeds(seed_list.begin(), seed_list.end());
  if (seeds.empty()) bad_input("seed list is empty");

  auto config = c.config.crawl;
  config.snapshot_id = id;
  auto transport = transport_for(c, id);
  const auto snapshot = crawl_to_fixpoint(seeds, config, *transport, c.clock);

  const json provenance{{"config_hash", c.config.hash},
                        {"seeds", std::vector<std::string>(seeds.begin(), seeds.end())},
                        {"transport", c.config.transport == TransportKind::kHttp ? "http" : "directory"}};
  store_of(c).store(snapshot, provenance);

  const auto failed = std::count_if(snapshot.fetch_log.begin(), snapshot.fetch_log.end(),
                                    [](const FetchResult& r) { return !r.ok() || !r.note.empty(); });
  return {{"snapshot", id},
          {"rounds", snapshot.rounds},
          {"ads_txt_files", snapshot.ads_txt_files.size()},
          {"sellers_json_files", snapshot.sellers_json_files.size()},
          {"fetches", snapshot.fetch_log.size()},
          {"failed_fetches", failed}};
}

json cmd_detect(const Context& c) {
  const auto& id = require_snapshot(c.opt);
  const auto snapshot = store_of(c).load(id);
  const auto pools = build_pools(snapshot);
  const auto findings = classify_dark_pools(pools, load_entities(c.config), load_problematic(c.config), id);

  std::string summary = csv::format_row({"ad_system_domain", "seller_id", "owner_domain", "problematic_members",
                                         "victim_members", "organizations"});
  for (const auto& f : findings) {
    std::vector<std::string> problematic;
    for (const auto& m : f.problematic_members) problematic.push_back(m.domain);
    summary += csv::format_row({f.pool.ad_system_domain, f.pool.seller_id, f.pool.owner_domain.value_or(""),
                                join(problematic, ";"), join(f.victim_members, ";"),
                                join({f.organizations.begin(), f.organizations.end()}, ";")});
  }
  const auto base = "detect/" + id + "/";
  c.ws.write_jsonl(base + "pools.jsonl", to_jsonl(pools));
  c.ws.write_jsonl(base + "findings.jsonl", to_jsonl(findings));
  c.ws.write_csv(base + "findings_summary.csv", summary);
  return {{"snapshot", id}, {"pools", pools.size()}, {"dark_pools", findings.size()}};
}

json cmd_evidence(const Context& c) {
  const auto& id = require_snapshot(c.opt);
  if (!c.config.inputs.har_dir) throw Error(ErrorCode::kInvalidConfig, "inputs.har_dir is required for evidence");
  std::optional<std::set<std::string>> known;
  if (c.config.inputs.known_advertisers) {
    const auto list = read_domain_list(*c.config.inputs.known_advertisers);
    known.emplace(list.begin(), list.end());
  }
  const auto run = collect_evidence(*c.config.inputs.har_dir, load_pools(c, id), load_entities(c.config),
                                    c.config.evidence, known, c.clock());
  const auto attributed = std::count_if(run.records.begin(), run.records.end(),
                                        [](const EvidenceRecord& r) { return r.advertiser_domain.has_value(); });
  const json summary{{"snapshot", id},         {"har_files", run.har_files},   {"hits", run.hits},
                     {"records", run.records.size()}, {"attributed", attributed}, {"notes", run.notes}};
  c.ws.write_jsonl("evidence/" + id + "/evidence.jsonl", to_jsonl(run.records));
  c.ws.write_json("evidence/" + id + "/summary.json", summary);
  return summary;
}

json cmd_contacts(const Context& c) {
  const auto round = require_round(c.opt);
  const auto& id = require_snapshot(c.opt);
  const auto recipients = recipients_for(c, round, id);
  const auto snapshot = store_of(c).load(id);
  auto transport = transport_for(c, id);

  StubProber stub(ProbeOutcome::kBounced, c.config.deliverable);
  DeliverabilityProber* prober = c.env.prober ? c.env.prober : c.config.probe_common_prefixes ? &stub : nullptr;
  const auto role = role_for_round(round);

  std::vector<ContactBookRow> rows;
  std::string missing = csv::format_row({"entity_domain", "reason"});
  std::size_t found = 0;
  std::size_t not_found = 0;
  for (const auto& entity : recipients) {
    try {
      auto discovery = discover_contacts(entity, role, snapshot, *transport, prober, c.clock);
      for (auto& record : discovery.contacts) rows.push_back({role, std::move(record)});
      ++found;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoContactFound) throw;
      missing += csv::format_row({entity, std::string(error_code_name(e.code()))});
      ++not_found;
    }
  }
  c.ws.write_csv("contacts/" + round_dir(round) + ".csv", format_contact_book(rows));
  c.ws.write_csv("contacts/" + round_dir(round) + "_missing.csv", missing);
  return {{"round", static_cast<int>(round)},
          {"snapshot", id},
          {"recipients", recipients.size()},
          {"with_contact", found},
          {"without_contact", not_found},
          {"contacts", rows.size()}};
}

json cmd_diff(const Context& c) {
  if (c.opt.before.empty() || c.opt.after.empty()) bad_input("--before and --after are required");
  const auto& before = checked_id(c.opt.before, "snapshot id");
  const auto& after = checked_id(c.opt.after, "snapshot id");
  const auto delta = diff_findings(load_findings(c, before), load_findings(c, after));
  json j = delta;
  j["before"] = before;
  j["after"] = after;
  c.ws.write_json("diff/" + before + "__" + after + "/delta.json", j);
  return {{"before", before},
          {"after", after},
          {"resolved", delta.resolved.size()},
          {"introduced", delta.introduced.size()},
          {"persisting", delta.persisting.size()}};
}

// ---- campaign ----

// A prior round is complete once a snapshot exists inside its post window.
void resolve_completion(RoundPlan& plan, const std::vector<SnapshotTime>& times, const SnapshotStore& store) {
  if (plan.post_snapshot_completed_at) return;
  std::optional<SnapshotTime> earliest;
  for (const auto& t : times) {
    if (t.second < plan.post_window_start || t.second > plan.post_window_end) continue;
    if (!earliest || t.second < earliest->second) earliest = t;
  }
  if (earliest) plan.post_snapshot_completed_at = store.load(earliest->first).finished_at;
}

json cmd_campaign_plan(const Context& c) {
  const auto round = require_round(c.opt);
  const auto times = snapshot_times(c);
  std::string snap;
  if (!c.opt.snapshot.empty()) {
    snap = require_snapshot(c.opt);
  } else if (auto chosen = select_pre_snapshot(times, c.clock(), c.config.windows)) {
    snap = *chosen;
  } else {
    bad_input("no snapshot in the pre-notification window; pass --snapshot");
  }

  const auto recipients = recipients_for(c, round, snap);
  const auto assignments = assign_groups(recipients, c.config.seed, round);

  const auto store = store_of(c);
  std::vector<RoundPlan> prior;
  for (int k = 1; k < static_cast<int>(round); ++k) {
    const auto rel = "campaign/round" + std::to_string(k) + "/plan.json";
    if (!fs::exists(c.ws.path(rel))) continue;
    auto p = json::parse(read_file(c.ws.path(rel))).get<RoundPlan>();
    resolve_completion(p, times, store);
    prior.push_back(p);
  }

  CampaignRound cr;
  cr.round_number = round;
  cr.recipients = recipients;
  cr.pre_snapshot_id = snap;
  const auto plan = schedule_round(cr, c.clock, prior, c.config.schedule);

  json events = json::array();
  for (const auto& e : plan.events()) events.push_back({{"kind", event_kind_name(e.kind)}, {"at", format_timestamp(e.at)}});
  json plan_json = plan;
  plan_json["pre_snapshot_id"] = snap;
  plan_json["events"] = events;

  std::map<Group, std::size_t> sizes;
  for (const auto& a : assignments) ++sizes[a.group];

  const auto dir = "campaign/" + round_dir(round) + "/";
  c.ws.write_json(dir + "recipients.json",
                  {{"round_number", static_cast<int>(round)}, {"snapshot", snap}, {"recipients", recipients}});
  c.ws.write_json(dir + "assignments.json",
                  {{"round_number", static_cast<int>(round)}, {"seed", c.config.seed}, {"assignments", assignments}});
  c.ws.write_json(dir + "plan.json", plan_json);

  auto ledger = CampaignLedger::load(c.ws.path("campaign/ledger.json"));
  ledger.record_assignments(assignments);
  c.ws.write_json("campaign/ledger.json", ledger.to_json());

  return {{"round", static_cast<int>(round)},
          {"snapshot", snap},
          {"recipients", recipients.size()},
          {"t1", sizes[Group::kT1Academic]},
          {"t2", sizes[Group::kT2Activist]},
          {"control", sizes[Group::kControl]},
          {"send_at", format_timestamp(plan.send_at)},
          {"reminder_at", format_timestamp(plan.reminder_at)},
          {"post_window", {format_timestamp(plan.post_window_start), format_timestamp(plan.post_window_end)}}};
}

json cmd_campaign_render(const Context& c) {
  const auto round = require_round(c.opt);
  const auto snap = plan_pre_snapshot(c, round);
  auto assignments = load_assignments(c, round);
  std::sort(assignments.begin(), assignments.end(),
            [](const auto& a, const auto& b) { return a.entity_domain < b.entity_domain; });
  const auto findings = load_findings(c, snap);
  const auto evidence = load_evidence(c, snap);

  const auto book_path = c.ws.path("contacts/" + round_dir(round) + ".csv");
  if (!fs::exists(book_path)) bad_input("contacts/" + round_dir(round) + ".csv is missing; run contacts first");
  std::vector<ContactRecord> contacts;
  for (auto& row : parse_contact_book(read_file(book_path))) contacts.push_back(std::move(row.record));

  RenderOptions options;
  options.profiles = c.config.branding;
  options.max_instances = c.config.max_report_instances;
  options.screenshot_dir = c.config.inputs.screenshot_dir;
  options.har_dir = c.config.inputs.har_dir;
  options.round_number = round;
  const auto role = role_for_round(round);
  const auto outbox = c.ws.path("campaign/outbox");

  std::vector<std::string> rendered;
  std::vector<std::string> existing;
  json skipped = json::array();
  std::size_t withheld = 0;
  for (const auto& a : assignments) {
    if (a.group == Group::kControl) {
      ++withheld;
      continue;
    }
    if (fs::exists(outbox_entry_dir(outbox, round, a.entity_domain) / "meta.json")) {
      existing.push_back(a.entity_domain);
      continue;
    }
    try {
      const auto payload = render_notification(a.entity_domain, role, a.group, contacts, findings, evidence, options);
      write_outbox_entry(outbox, payload, c.config.hash);
      rendered.push_back(a.entity_domain);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingContact && e.code() != ErrorCode::kNothingToReport) throw;
      skipped.push_back({{"entity_domain", a.entity_domain}, {"code", error_code_name(e.code())}});
    }
  }
  const json summary{{"round", static_cast<int>(round)}, {"snapshot", snap},       {"rendered", rendered},
                     {"already_rendered", existing},     {"skipped", skipped},     {"control_withheld", withheld}};
  c.ws.write_json("campaign/" + round_dir(round) + "/render.json", summary);
  return summary;
}

json cmd_campaign_send(const Context& c) {
  const auto round = require_round(c.opt);
  const bool live = c.opt.live || (c.config.live_dispatch && !c.opt.dry_run);
  if (live && !c.env.mail) {
    throw Error(ErrorCode::kInvalidConfig, "live dispatch needs a mail transport and none is configured");
  }
  auto ledger = CampaignLedger::load(c.ws.path("campaign/ledger.json"));
  const auto outbox = c.ws.path("campaign/outbox");
  if (auto violations = control_isolation_violations(outbox, round, ledger); !violations.empty()) {
    throw Error(ErrorCode::kControlGroupWithheld, "control entities have outbox entries: " + join(violations, ", "));
  }
  const auto summary = dispatch_round(outbox, round, ledger, live ? c.env.mail : nullptr, c.clock,
                                      c.config.schedule.reminder);
  c.ws.write_json("campaign/ledger.json", ledger.to_json());
  return {{"round", static_cast<int>(round)},
          {"mode", live ? "live" : "dry-run"},
          {"dispatched", summary.dispatched},
          {"already_sent", summary.already_sent}};
}

// ---- analysis ----

std::vector<Measure> measures_for(RoundNumber r) {
  if (r == RoundNumber::kAdNetworks) return {Measure::kPoolsAd, Measure::kPartnerPoolsAd};
  if (r == RoundNumber::kAdvertisers) return {Measure::kPoolsAd};
  return {Measure::kProbDomainsVp};
}

const char* recipient_name(RoundNumber r) {
  switch (r) {
    case RoundNumber::kPublishers: return "Publishers";
    case RoundNumber::kAdNetworks: return "Ad networks";
    case RoundNumber::kAdvertisers: return "Advertisers";
  }
  return "Publishers";
}

constexpr GroupFilter kFilters[] = {GroupFilter::kT1, GroupFilter::kT2, GroupFilter::kT1UnionT2};

bool in_filter(Group g, GroupFilter f) {
  if (g == Group::kControl) return false;
  return f == GroupFilter::kT1UnionT2 || (f == GroupFilter::kT1) == (g == Group::kT1Academic);
}

std::string pairs_file(Measure m, GroupFilter g) {
  return "pairs_" + std::string(measure_name(m)) + "_" + to_lower(group_filter_name(g)) + ".csv";
}

using PairSets = std::map<std::pair<Measure, GroupFilter>, std::vector<MatchedPair>>;

json did_to_json(const DidResult& r) {
  json j{{"measure", measure_name(r.measure)},
         {"group", group_filter_name(r.group_filter)},
         {"n_pairs", r.pairs.size()},
         {"n_rem", r.n_rem},
         {"n_rem_fraction", r.n_rem_fraction},
         {"mu_overall", r.mu_overall},
         {"matching", r.matching}};
  j["mu_remediated"] = r.mu_remediated ? json(*r.mu_remediated) : json(nullptr);
  return j;
}

struct Tables {
  std::vector<RecipientRow> recipient;
  std::vector<SourceRow> source;
  json results = json::array();
  json comparisons = json::array();
};

void add_round_tables(Tables& t, RoundNumber round, const PairSets& sets, GroupFilter primary) {
  auto result_of = [&](Measure m, GroupFilter g) -> std::optional<DidResult> {
    auto it = sets.find({m, g});
    if (it == sets.end() || it->second.empty()) return std::nullopt;
    return compute_did(it->second, m, g);
  };
  const std::string name = recipient_name(round);
  for (auto m : measures_for(round)) {
    if (auto r = result_of(m, primary)) {
      t.recipient.push_back({name, *r});
      auto j = did_to_json(*r);
      j["round"] = static_cast<int>(round);
      t.results.push_back(j);
    }
    auto r1 = result_of(m, GroupFilter::kT1);
    auto r2 = result_of(m, GroupFilter::kT2);
    bool significant = false;
    json cmp{{"round", static_cast<int>(round)}, {"measure", measure_name(m)}};
    if (r1 && r2) {
      std::vector<double> d1, d2;
      for (const auto& p : r1->pairs) d1.push_back(static_cast<double>(p.delta));
      for (const auto& p : r2->pairs) d2.push_back(static_cast<double>(p.delta));
      try {
        const auto test = compare_sources(d1, d2);
        significant = test.significant;
        cmp.update({{"t", test.statistic}, {"df", test.degrees_of_freedom}, {"p", test.p_value},
                    {"significant", test.significant}});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateSample) throw;
        cmp.update({{"significant", false}, {"error", error_code_name(e.code())}});
      }
    } else {
      cmp.update({{"significant", false}, {"error", "MissingGroup"}});
    }
    t.comparisons.push_back(cmp);
    if (r1) t.source.push_back({"Academic", name, *r1, significant});
    if (r2) t.source.push_back({"Activist", name, *r2, significant});
  }
}

void write_tables(const Context& c, const std::string& prefix, const Tables& t) {
  c.ws.write_csv(prefix + "table_recipient.csv", format_recipient_table_csv(t.recipient));
  c.ws.write_text(prefix + "table_recipient.txt", format_recipient_table_text(t.recipient));
  c.ws.write_csv(prefix + "table_source.csv", format_source_table_csv(t.source));
  c.ws.write_text(prefix + "table_source.txt", format_source_table_text(t.source));
}

json analyze_pairs_file(const Context& c, GroupFilter filter) {
  const fs::path path = c.opt.pairs;
  const auto pairs = parse_pairs_csv(read_file(path));
  const auto measure = pairs.empty() ? Measure::kProbDomainsVp : pairs.front().measure;
  const auto result = compute_did(pairs, measure, filter);
  auto j = did_to_json(result);
  j["pairs_file"] = path.filename().string();
  c.ws.write_json("analysis/pairs/" + checked_id(path.stem().string(), "pairs file name") + ".json", j);
  return j;
}

json cmd_analyze(const Context& c) {
  const auto filter = parse_group_filter(c.opt.group);
  if (!filter) bad_input("--group must be t1, t2 or union");
  if (!c.opt.pairs.empty()) return analyze_pairs_file(c, *filter);

  const auto round = require_round(c.opt);
  const auto assignments = load_assignments(c, round);
  const auto plan = read_json_artifact(c, "campaign/" + round_dir(round) + "/plan.json", "campaign plan");
  const auto send_at = plan.get<RoundPlan>().send_at;
  const auto times = snapshot_times(c);

  std::string pre = c.opt.pre.empty() ? plan.at("pre_snapshot_id").get<std::string>() : c.opt.pre;
  std::string post = c.opt.post;
  if (post.empty()) {
    auto chosen = select_post_snapshot(times, send_at, c.config.windows);
    if (!chosen) bad_input("no snapshot in the post-notification window; pass --post");
    post = *chosen;
  }
  checked_id(pre, "snapshot id");
  checked_id(post, "snapshot id");

  const auto problematic = load_problematic(c.config);
  const auto entities = load_entities(c.config);
  const auto store = store_of(c);
  const auto before = SnapshotAnalysis::analyze(store.load(pre), problematic, entities);
  const auto after = SnapshotAnalysis::analyze(store.load(post), problematic, entities);
  const auto exposure = advertiser_exposure(load_evidence(c, pre));

  auto value_of = [&](Measure m, const std::string& entity, const SnapshotAnalysis& a) {
    if (round != RoundNumber::kAdvertisers) return compute_measure(m, entity, a);
    auto it = exposure.find(entity);
    return compute_advertiser_pools(entity, it == exposure.end() ? std::set<std::string>{} : it->second, a);
  };

  std::vector<MeasureValue> values;
  PairSets sets;
  for (auto m : measures_for(round)) {
    std::map<std::string, std::int64_t> pre_v, post_v;
    for (const auto& a : assignments) {
      auto v0 = value_of(m, a.entity_domain, before);
      auto v1 = value_of(m, a.entity_domain, after);
      pre_v[a.entity_domain] = v0.value;
      post_v[a.entity_domain] = v1.value;
      values.push_back(std::move(v0));
      values.push_back(std::move(v1));
    }
    std::vector<EntityValue> controls;
    for (const auto& a : assignments) {
      if (a.group == Group::kControl) controls.emplace_back(a.entity_domain, pre_v[a.entity_domain]);
    }
    for (auto g : kFilters) {
      std::vector<EntityValue> treated;
      for (const auto& a : assignments) {
        if (in_filter(a.group, g)) treated.emplace_back(a.entity_domain, pre_v[a.entity_domain]);
      }
      if (treated.empty()) continue;
      auto pairs = match_controls(treated, controls, m);
      for (auto& p : pairs) {
        p.t_post = post_v[p.treatment_domain];
        p.c_post = post_v[p.control_domain];
        p.delta = pair_delta(p);
      }
      sets[{m, g}] = std::move(pairs);
    }
  }
  std::sort(values.begin(), values.end(), [](const MeasureValue& a, const MeasureValue& b) {
    return std::tie(a.entity_domain, a.measure, a.snapshot_id) < std::tie(b.entity_domain, b.measure, b.snapshot_id);
  });

  bool primary_present = false;
  for (auto m : measures_for(round)) {
    auto it = sets.find({m, *filter});
    primary_present = primary_present || (it != sets.end() && !it->second.empty());
  }
  if (!primary_present) throw Error(ErrorCode::kNoPairs, "no treated entities in group " + c.opt.group);

  Tables tables;
  add_round_tables(tables, round, sets, *filter);

  const auto dir = "analysis/" + round_dir(round) + "/";
  c.ws.write_csv(dir + "measures.csv", format_measures_csv(values));
  for (const auto& [key, pairs] : sets) c.ws.write_csv(dir + pairs_file(key.first, key.second), format_pairs_csv(pairs));
  write_tables(c, dir, tables);
  const json result{{"round", static_cast<int>(round)}, {"pre_snapshot", pre},           {"post_snapshot", post},
                    {"group", group_filter_name(*filter)}, {"results", tables.results}, {"source_comparison", tables.comparisons}};
  c.ws.write_json(dir + "result.json", result);
  return result;
}

// Cross-round tables from the pair files that analyze left behind.
json cmd_report(const Context& c) {
  Tables tables;
  json rounds = json::array();
  for (auto round : {RoundNumber::kPublishers, RoundNumber::kAdNetworks, RoundNumber::kAdvertisers}) {
    const auto dir = "analysis/" + round_dir(round) + "/";
    PairSets sets;
    for (auto m : measures_for(round)) {
      for (auto g : kFilters) {
        const auto p = c.ws.path(dir + pairs_file(m, g));
        if (fs::exists(p)) sets[{m, g}] = parse_pairs_csv(read_file(p));
      }
    }
    if (sets.empty()) continue;
    rounds.push_back(static_cast<int>(round));
    add_round_tables(tables, round, sets, GroupFilter::kT1UnionT2);
  }
  if (tables.recipient.empty()) throw Error(ErrorCode::kNoPairs, "no analysis results; run analyze first");
  c.ws.write_csv("analysis/table3.csv", format_recipient_table_csv(tables.recipient));
  c.ws.write_text("analysis/table3.txt", format_recipient_table_text(tables.recipient));
  c.ws.write_csv("analysis/table4.csv", format_source_table_csv(tables.source));
  c.ws.write_text("analysis/table4.txt", format_source_table_text(tables.source));
  return {{"rounds", rounds}, {"results", tables.results}, {"source_comparison", tables.comparisons}};
}

json cmd_manifest(const Context& c) {
  const auto m = c.ws.write_manifest();
  return {{"artifacts", m.at("artifacts").size()}};
}

void print_error(std::ostream& err, const std::string& command, std::string_view code, const std::string& message) {
  err << json{{"status", "error"}, {"command", command}, {"code", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const CliEnvironment& env) {
  CLI::App app{"Detects dark pools in ads.txt/sellers.json data and runs the notification campaign.", "darkpool"};
  app.fallthrough();
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Pipeline config (JSON)")->required();
  app.add_option("--workspace", o.workspace, "Workspace directory (overrides the config)");
  app.add_option("--now", o.now, "Clock override, e.g. 2024-01-31T00:00:00Z");
  auto* seed = app.add_option("--seed", o.seed, "Group assignment seed (overrides the config)");
  auto* dry = app.add_flag("--dry-run", o.dry_run, "Record dispatch without sending (default)");
  app.add_flag("--live", o.live, "Send through the configured mail transport")->excludes(dry);

  auto add_round = [&](CLI::App* s) { s->add_option("--round", o.round, "Campaign round")->check(CLI::Range(1, 3)); };
  auto add_snapshot = [&](CLI::App* s, const char* help) { s->add_option("--snapshot", o.snapshot, help); };

  std::map<CLI::App*, std::function<json(const Context&)>> handlers;
  auto* crawl = app.add_subcommand("crawl", "Crawl ads.txt and sellers.json into a snapshot");
  add_snapshot(crawl, "Snapshot id (default: the clock's date)");
  handlers[crawl] = cmd_crawl;
  auto* detect = app.add_subcommand("detect", "Build seller pools and classify dark pools");
  add_snapshot(detect, "Snapshot id");
  handlers[detect] = cmd_detect;
  auto* evidence = app.add_subcommand("evidence", "Match HAR captures against pooled seller IDs");
  add_snapshot(evidence, "Snapshot id whose pools are matched");
  handlers[evidence] = cmd_evidence;
  auto* contacts = app.add_subcommand("contacts", "Discover contacts for a round's recipients");
  add_round(contacts);
  add_snapshot(contacts, "Snapshot id the recipients come from");
  handlers[contacts] = cmd_contacts;

  auto* campaign = app.add_subcommand("campaign", "Plan, render and send a notification round");
  campaign->require_subcommand(1);
  auto* plan = campaign->add_subcommand("plan", "Select recipients, assign groups, schedule");
  add_round(plan);
  add_snapshot(plan, "Pre-notification snapshot (default: chosen from the pre window)");
  handlers[plan] = cmd_campaign_plan;
  auto* render = campaign->add_subcommand("render", "Render outbox entries for treated recipients");
  add_round(render);
  add_snapshot(render, "Snapshot override (default: the plan's)");
  handlers[render] = cmd_campaign_render;
  auto* send = campaign->add_subcommand("send", "Dispatch the round's outbox");
  add_round(send);
  handlers[send] = cmd_campaign_send;

  auto* analyze = app.add_subcommand("analyze", "Matched difference-in-differences for a round");
  add_round(analyze);
  analyze->add_option("--group", o.group, "t1, t2 or union")->check(CLI::IsMember({"t1", "t2", "union"}, CLI::ignore_case));
  analyze->add_option("--pre", o.pre, "Pre snapshot (default: the plan's)");
  analyze->add_option("--post", o.post, "Post snapshot (default: chosen from the post window)");
  analyze->add_option("--pairs", o.pairs, "Analyze an existing pairs CSV instead");
  handlers[analyze] = cmd_analyze;
  auto* diff = app.add_subcommand("diff", "Remediation delta between two snapshots' findings");
  diff->add_option("--before", o.before, "Earlier snapshot")->required();
  diff->add_option("--after", o.after, "Later snapshot")->required();
  handlers[diff] = cmd_diff;
  auto* report = app.add_subcommand("report", "Cross-round result tables");
  handlers[report] = cmd_report;
  auto* manifest = app.add_subcommand("manifest", "Rewrite the workspace manifest");
  handlers[manifest] = cmd_manifest;

  for (auto* s : {campaign}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    print_error(err, "", "Usage", e.what());
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  std::string command = chosen->get_name();
  if (chosen == campaign) {
    chosen = campaign->get_subcommands().front();
    command += " " + chosen->get_name();
  }
  o.seed_given = seed->count() > 0;

  PipelineConfig config;
  Clock clock;
  try {
    json overrides = json::object();
    if (o.seed_given) overrides["campaign"]["seed"] = o.seed;
    config = PipelineConfig::load(o.config, overrides);
    if (!o.workspace.empty()) config.workspace = fs::absolute(o.workspace).lexically_normal();
    clock = config.clock();
    if (!o.now.empty()) {
      auto t = parse_timestamp(o.now);
      if (!t) throw Error(ErrorCode::kInvalidConfig, "--now must be an ISO-8601 UTC timestamp");
      clock = fixed_clock(*t);
    }
  } catch (const Error& e) {
    print_error(err, command, error_code_name(e.code()), e.what());
    return 2;
  }

  std::unique_ptr<Workspace> ws;
  try {
    ws = std::make_unique<Workspace>(config.workspace, config.hash, clock);
  } catch (const Error& e) {
    print_error(err, command, error_code_name(e.code()), e.what());
    return 1;
  }

  const Context ctx{o, config, *ws, clock, env};
  ws->log("command_started", {{"command", command}});
  std::string code;
  std::string message;
  try {
    json summary = handlers.at(chosen)(ctx);
    ws->clear_failed(command);
    ws->write_manifest();
    ws->log("command_finished", {{"command", command}});
    json result{{"status", "ok"}, {"command", command}, {"config_hash", config.hash}};
    result["summary"] = std::move(summary);
    out << result.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    code = error_code_name(e.code());
    message = e.what();
  } catch (const json::exception& e) {
    code = error_code_name(ErrorCode::kInvalidInput);
    message = e.what();
  } catch (const std::exception& e) {
    code = "Internal";
    message = e.what();
  }
  ws->mark_failed(command, code, message);
  ws->log("command_failed", {{"command", command}, {"code", code}, {"message", message}});
  print_error(err, command, code, message);
  return 1;
}

}  // namespace darkpool
