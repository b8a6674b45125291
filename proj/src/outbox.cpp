#include "darkpool/outbox.hpp"

#include <algorithm>
#include <set>

#include "darkpool/csv.hpp"
#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"
#include "darkpool/fs_util.hpp"

namespace darkpool {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string round_dir_name(RoundNumber r) { return "round" + std::to_string(static_cast<int>(r)); }

std::optional<Timestamp> optional_ts(const json& j, const char* key) {
  if (auto it = j.find(key); it != j.end() && it->is_string()) return parse_timestamp(it->get<std::string>());
  return std::nullopt;
}

}  // namespace

fs::path outbox_entry_dir(const fs::path& outbox_root, RoundNumber round, std::string_view entity) {
  const auto name = normalize_domain(entity);
  if (name.empty() || name.find('/') != std::string::npos || name == "." || name == "..") {
    throw Error(ErrorCode::kInvalidInput, "unusable entity name for outbox: " + std::string(entity));
  }
  return outbox_root / round_dir_name(round) / name;
}

fs::path write_outbox_entry(const fs::path& outbox_root, const NotificationPayload& payload,
                            const std::string& config_hash) {
  if (payload.group == Group::kControl) {
    throw Error(ErrorCode::kControlGroupWithheld, payload.entity_domain + " is in the control group");
  }
  const auto dir = outbox_entry_dir(outbox_root, payload.round_number, payload.entity_domain);
  if (fs::exists(dir)) {
    throw Error(ErrorCode::kIo, "outbox entry already exists: " + dir.string());
  }

  // Evidence files are copied in so an entry is self-contained.
  json attachments = json::array();
  std::set<std::string> taken;
  for (const auto& a : payload.attachments) {
    const fs::path src = a.path;
    if (a.kind == "report" || !fs::is_regular_file(src)) {
      attachments.push_back({{"kind", a.kind}, {"path", a.path}});
      continue;
    }
    std::string name = src.filename().string();
    for (int n = 2; !taken.insert(name).second; ++n) name = std::to_string(n) + "_" + src.filename().string();
    const auto rel = "attachments/" + name;
    write_file_atomic(dir / rel, read_file(src));
    attachments.push_back({{"kind", a.kind}, {"path", rel}});
  }
  const json meta{{"entity_domain", payload.entity_domain},
                  {"role", entity_role_name(payload.role)},
                  {"group", group_name(payload.group)},
                  {"branding", branding_name(payload.branding)},
                  {"round_number", static_cast<int>(payload.round_number)},
                  {"to", payload.recipient.email},
                  {"contact_source", contact_source_name(payload.recipient.source)},
                  {"total_instances", payload.total_instances},
                  {"config_hash", config_hash}};
  json report = payload.report;
  report["config_hash"] = config_hash;

  // meta.json goes last; its presence marks a complete entry.
  write_file_atomic(dir / "subject.txt", payload.subject + "\n");
  write_file_atomic(dir / "body.txt", payload.body);
  write_file_atomic(dir / "report.pdf", render_report_pdf(payload.report));
  write_file_atomic(dir / "report.json", report.dump(2) + "\n");
  write_file_atomic(dir / "attachments.json", attachments.dump(2) + "\n");
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
  return dir;
}

std::vector<OutboxMessage> read_outbox_round(const fs::path& outbox_root, RoundNumber round) {
  std::vector<OutboxMessage> out;
  const auto round_dir = outbox_root / round_dir_name(round);
  if (!fs::is_directory(round_dir)) return out;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(round_dir)) {
    if (e.is_directory() && fs::exists(e.path() / "meta.json")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const auto meta = json::parse(read_file(dir / "meta.json"));
    OutboxMessage m;
    m.dir = dir;
    m.entity_domain = meta.at("entity_domain").get<std::string>();
    m.to = meta.at("to").get<std::string>();
    m.group = parse_group(meta.at("group").get<std::string>()).value_or(Group::kControl);
    m.subject = read_file(dir / "subject.txt");
    if (!m.subject.empty() && m.subject.back() == '\n') m.subject.pop_back();
    m.body = read_file(dir / "body.txt");
    m.attachments.push_back(dir / "report.pdf");
    for (const auto& a : json::parse(read_file(dir / "attachments.json"))) {
      if (a.at("kind") == "report") continue;
      fs::path p = a.at("path").get<std::string>();
      m.attachments.push_back(p.is_relative() ? dir / p : p);
    }
    out.push_back(std::move(m));
  }
  return out;
}

LedgerEntry& CampaignLedger::upsert(RoundNumber round, const std::string& entity) {
  auto& e = entries_[{static_cast<int>(round), entity}];
  e.round_number = round;
  e.entity_domain = entity;
  return e;
}

const LedgerEntry* CampaignLedger::find(RoundNumber round, const std::string& entity) const {
  auto it = entries_.find({static_cast<int>(round), entity});
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<LedgerEntry> CampaignLedger::entries() const {
  std::vector<LedgerEntry> out;
  for (const auto& [key, e] : entries_) out.push_back(e);
  return out;
}

void CampaignLedger::record_assignments(const std::vector<GroupAssignment>& assignments) {
  for (const auto& a : assignments) {
    auto& e = upsert(a.round_number, a.entity_domain);
    e.group = a.group;
    e.seed = a.seed;
  }
}

std::size_t CampaignLedger::import_open_log(std::string_view csv_text) {
  std::size_t matched = 0;
  for (const auto& row : csv::parse(csv_text)) {
    if (row.size() < 2 || row[0] == "round") continue;
    auto round = parse_round_number(std::atoi(row[0].c_str()));
    if (!round) throw Error(ErrorCode::kInvalidInput, "bad round in open log: " + row[0]);
    auto it = entries_.find({static_cast<int>(*round), normalize_domain(row[1])});
    if (it == entries_.end()) continue;
    it->second.opened = true;
    if (row.size() > 2 && iequals(row[2], "true")) it->second.responded = true;
    ++matched;
  }
  return matched;
}

std::vector<LedgerEntry> CampaignLedger::due_reminders(Timestamp now) const {
  std::vector<LedgerEntry> out;
  for (const auto& [key, e] : entries_) {
    if (e.sent_at && e.reminder_at && *e.reminder_at <= now && !e.responded) out.push_back(e);
  }
  return out;
}

json CampaignLedger::to_json() const {
  json arr = json::array();
  for (const auto& [key, e] : entries_) {
    json j{{"round_number", static_cast<int>(e.round_number)},
           {"entity_domain", e.entity_domain},
           {"group", group_name(e.group)},
           {"seed", e.seed},
           {"dispatch_mode", e.dispatch_mode},
           {"opened", e.opened},
           {"responded", e.responded}};
    if (e.sent_at) j["sent_at"] = format_timestamp(*e.sent_at);
    if (e.reminder_at) j["reminder_at"] = format_timestamp(*e.reminder_at);
    arr.push_back(std::move(j));
  }
  return json{{"entries", arr}};
}

CampaignLedger CampaignLedger::from_json(const json& j) {
  CampaignLedger ledger;
  for (const auto& item : j.at("entries")) {
    auto round = parse_round_number(item.at("round_number").get<int>());
    auto group = parse_group(item.at("group").get<std::string>());
    if (!round || !group) throw Error(ErrorCode::kInvalidInput, "bad ledger entry");
    auto& e = ledger.upsert(*round, item.at("entity_domain").get<std::string>());
    e.group = *group;
    e.seed = item.at("seed").get<std::uint64_t>();
    e.dispatch_mode = item.value("dispatch_mode", "");
    e.opened = item.value("opened", false);
    e.responded = item.value("responded", false);
    e.sent_at = optional_ts(item, "sent_at");
    e.reminder_at = optional_ts(item, "reminder_at");
  }
  return ledger;
}

CampaignLedger CampaignLedger::load(const fs::path& path) {
  if (!fs::exists(path)) return {};
  try {
    return from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, "unreadable ledger " + path.string() + ": " + e.what());
  }
}

void CampaignLedger::save(const fs::path& path) const { write_file_atomic(path, to_json().dump(2) + "\n"); }

DispatchSummary dispatch_round(const fs::path& outbox_root, RoundNumber round, CampaignLedger& ledger,
                               MailTransport* live, const Clock& clock, Days reminder_offset) {
  DispatchSummary summary;
  for (const auto& message : read_outbox_round(outbox_root, round)) {
    const auto* existing = ledger.find(round, message.entity_domain);
    if (message.group == Group::kControl || (existing && existing->group == Group::kControl)) {
      throw Error(ErrorCode::kControlGroupWithheld,
                  message.entity_domain + " is in the control group but has an outbox entry");
    }
    if (existing && existing->sent_at) {
      summary.already_sent.push_back(message.entity_domain);
      continue;
    }
    if (live) live->send(message);
    auto& e = ledger.upsert(round, message.entity_domain);
    e.group = message.group;
    e.sent_at = clock();
    e.reminder_at = *e.sent_at + reminder_offset;
    e.dispatch_mode = live ? "live" : "dry-run";
    summary.dispatched.push_back(message.entity_domain);
  }
  return summary;
}

std::vector<std::string> control_isolation_violations(const fs::path& outbox_root, RoundNumber round,
                                                      const CampaignLedger& ledger) {
  std::vector<std::string> out;
  const auto round_dir = outbox_root / round_dir_name(round);
  if (!fs::is_directory(round_dir)) return out;
  for (const auto& e : fs::directory_iterator(round_dir)) {
    const auto entity = e.path().filename().string();
    if (const auto* entry = ledger.find(round, entity); entry && entry->group == Group::kControl) {
      out.push_back(entity);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace darkpool
