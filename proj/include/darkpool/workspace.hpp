#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "darkpool/time.hpp"

namespace darkpool {

// A pipeline workspace: plain files under one root. Every artifact written
// through this class carries the producing config hash. Holding a Workspace
// holds the workspace lock.
class Workspace {
 public:
  // Throws kWorkspaceLocked when another invocation holds the lock.
  Workspace(std::filesystem::path root, std::string config_hash, Clock clock);
  ~Workspace();
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const std::filesystem::path& root() const { return root_; }
  const std::string& config_hash() const { return config_hash_; }
  std::filesystem::path path(std::string_view rel) const { return root_ / std::filesystem::path(rel); }

  // Objects get a "config_hash" member; JSONL gets a leading {"_meta": ...}
  // line; CSV and text get a leading "# config_hash=" line.
  void write_json(std::string_view rel, nlohmann::json j) const;
  void write_jsonl(std::string_view rel, std::string_view lines) const;
  void write_csv(std::string_view rel, std::string_view text) const;
  void write_text(std::string_view rel, std::string_view text) const;

  // Appends one event to logs/events.jsonl. Logs carry wall-clock data and
  // are excluded from the manifest.
  void log(std::string_view event, nlohmann::json fields = nlohmann::json::object()) const;

  void mark_failed(std::string_view command, std::string_view code, std::string_view message) const;
  // Removes the failure marker if it was left by `command`.
  void clear_failed(std::string_view command) const;

  // manifest.json: sha256 and size of every artifact, sorted by path.
  nlohmann::json write_manifest() const;

 private:
  std::filesystem::path root_;
  std::string config_hash_;
  Clock clock_;
  int lock_fd_ = -1;
};

}  // namespace darkpool
