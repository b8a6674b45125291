#include "darkpool/workspace.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>

#include "darkpool/error.hpp"
#include "darkpool/fs_util.hpp"
#include "darkpool/hash.hpp"

namespace darkpool {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kLockFile = ".lock";
constexpr const char* kFailedFile = "FAILED";
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kLogDir = "logs";

}  // namespace

Workspace::Workspace(fs::path root, std::string config_hash, Clock clock)
    : root_(std::move(root)), config_hash_(std::move(config_hash)), clock_(std::move(clock)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create workspace " + root_.string() + ": " + ec.message());
  const auto lock = (root_ / kLockFile).string();
  lock_fd_ = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (lock_fd_ < 0) {
    throw Error(ErrorCode::kWorkspaceLocked,
                "workspace is locked by another invocation (remove " + lock + " if it is stale)");
  }
  const auto pid = std::to_string(::getpid()) + "\n";
  if (::write(lock_fd_, pid.data(), pid.size()) < 0) {
    // The pid is informational only.
  }
}

Workspace::~Workspace() {
  if (lock_fd_ >= 0) {
    ::close(lock_fd_);
    std::error_code ec;
    fs::remove(root_ / kLockFile, ec);
  }
}

void Workspace::write_json(std::string_view rel, json j) const {
  if (j.is_object()) j["config_hash"] = config_hash_;
  write_file_atomic(path(rel), j.dump(2) + "\n");
}

void Workspace::write_jsonl(std::string_view rel, std::string_view lines) const {
  const json meta{{"_meta", {{"config_hash", config_hash_}}}};
  write_file_atomic(path(rel), meta.dump() + "\n" + std::string(lines));
}

void Workspace::write_csv(std::string_view rel, std::string_view text) const {
  write_file_atomic(path(rel), "# config_hash=" + config_hash_ + "\n" + std::string(text));
}

void Workspace::write_text(std::string_view rel, std::string_view text) const {
  write_csv(rel, text);
}

void Workspace::log(std::string_view event, json fields) const {
  fields["event"] = event;
  fields["at"] = format_timestamp(clock_());
  fields["config_hash"] = config_hash_;
  fs::create_directories(root_ / kLogDir);
  std::ofstream out(root_ / kLogDir / "events.jsonl", std::ios::app);
  out << fields.dump() << "\n";
}

void Workspace::mark_failed(std::string_view command, std::string_view code, std::string_view message) const {
  const json j{{"command", command}, {"code", code}, {"message", message}, {"config_hash", config_hash_}};
  write_file_atomic(root_ / kFailedFile, j.dump(2) + "\n");
}

void Workspace::clear_failed(std::string_view command) const {
  const auto marker = root_ / kFailedFile;
  if (!fs::exists(marker)) return;
  try {
    if (json::parse(read_file(marker)).value("command", "") == command) fs::remove(marker);
  } catch (const std::exception&) {
    // Leave an unreadable marker for a human to inspect.
  }
}

json Workspace::write_manifest() const {
  std::vector<std::pair<std::string, fs::path>> files;
  for (const auto& e : fs::recursive_directory_iterator(root_)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root_).generic_string();
    if (rel == kLockFile || rel == kFailedFile || rel == kManifestFile || rel.rfind("logs/", 0) == 0) continue;
    if (rel.find(".tmp") != std::string::npos) continue;
    files.emplace_back(rel, e.path());
  }
  std::sort(files.begin(), files.end());
  json artifacts = json::array();
  for (const auto& [rel, p] : files) {
    const auto content = read_file(p);
    artifacts.push_back({{"path", rel}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }
  json manifest{{"config_hash", config_hash_}, {"artifacts", artifacts}};
  write_file_atomic(root_ / kManifestFile, manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace darkpool
