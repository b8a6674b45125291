#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "darkpool/campaign.hpp"

namespace darkpool {

// <root>/round<N>/<entity>/
std::filesystem::path outbox_entry_dir(const std::filesystem::path& outbox_root, RoundNumber round,
                                       std::string_view entity);

// Writes subject.txt, body.txt, report.pdf, report.json, attachments.json
// and meta.json. The outbox is append-only: an existing entry is an error.
// Control-group payloads are refused.
std::filesystem::path write_outbox_entry(const std::filesystem::path& outbox_root,
                                         const NotificationPayload& payload,
                                         const std::string& config_hash);

// A rendered message as read back from the outbox.
struct OutboxMessage {
  std::filesystem::path dir;
  std::string entity_domain;
  std::string to;
  std::string subject;
  std::string body;
  std::vector<std::filesystem::path> attachments;
  Group group = Group::kT1Academic;
};

std::vector<OutboxMessage> read_outbox_round(const std::filesystem::path& outbox_root, RoundNumber round);

// Live delivery backend. None ships with the library; tests inject a
// recording implementation.
class MailTransport {
 public:
  virtual ~MailTransport() = default;
  virtual void send(const OutboxMessage& message) = 0;
};

class RecordingMailTransport : public MailTransport {
 public:
  void send(const OutboxMessage& message) override { sent_.push_back(message); }
  const std::vector<OutboxMessage>& sent() const { return sent_; }

 private:
  std::vector<OutboxMessage> sent_;
};

struct LedgerEntry {
  RoundNumber round_number = RoundNumber::kPublishers;
  std::string entity_domain;
  Group group = Group::kControl;
  std::uint64_t seed = 0;
  std::optional<Timestamp> sent_at;
  std::optional<Timestamp> reminder_at;  // scheduled at dispatch
  std::string dispatch_mode;  // "dry-run" or "live" once sent
  bool opened = false;
  bool responded = false;
};

// Campaign bookkeeping keyed by (round, entity). Single writer.
class CampaignLedger {
 public:
  LedgerEntry& upsert(RoundNumber round, const std::string& entity);
  const LedgerEntry* find(RoundNumber round, const std::string& entity) const;
  std::vector<LedgerEntry> entries() const;
  void record_assignments(const std::vector<GroupAssignment>& assignments);

  // CSV with header round,entity_domain[,responded]; marks entries opened.
  // Returns the number of rows that matched a ledger entry.
  std::size_t import_open_log(std::string_view csv_text);

  // Sent, not responded, and with a reminder due by `now`.
  std::vector<LedgerEntry> due_reminders(Timestamp now) const;

  nlohmann::json to_json() const;
  static CampaignLedger from_json(const nlohmann::json& j);
  static CampaignLedger load(const std::filesystem::path& path);  // empty when absent
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::pair<int, std::string>, LedgerEntry> entries_;
};

struct DispatchSummary {
  std::vector<std::string> dispatched;
  std::vector<std::string> already_sent;
};

// Marks every unsent outbox entry of the round as sent. Without a live
// transport this is a dry run: nothing leaves the machine. Throws
// kControlGroupWithheld if the outbox holds a CONTROL entity.
DispatchSummary dispatch_round(const std::filesystem::path& outbox_root, RoundNumber round,
                               CampaignLedger& ledger, MailTransport* live, const Clock& clock,
                               Days reminder_offset = Days{10});

// Entities with an outbox entry whose ledger group is CONTROL.
std::vector<std::string> control_isolation_violations(const std::filesystem::path& outbox_root,
                                                      RoundNumber round, const CampaignLedger& ledger);

}  // namespace darkpool
