#include "darkpool/snapshot_store.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "darkpool/error.hpp"
#include "darkpool/fs_util.hpp"
#include "darkpool/hash.hpp"
#include "darkpool/json_io.hpp"

namespace darkpool {

namespace fs = std::filesystem;

namespace {

bool valid_snapshot_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) {
      return false;
    }
  }
  return true;
}

std::string body_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "bodies/%06zu.body", index);
  return buf;
}

}  // namespace

bool SnapshotStore::contains(const std::string& snapshot_id) const {
  return valid_snapshot_id(snapshot_id) && fs::exists(root_ / snapshot_id / "checksums.json");
}

std::vector<std::string> SnapshotStore::list() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    if (fs::exists(entry.path() / "checksums.json")) out.push_back(entry.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string SnapshotStore::store(const CrawlSnapshot& snapshot, const json& provenance) const {
  if (!valid_snapshot_id(snapshot.snapshot_id)) {
    throw Error(ErrorCode::kInvalidInput, "invalid snapshot id '" + snapshot.snapshot_id + "'");
  }
  const fs::path dir = root_ / snapshot.snapshot_id;
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (!fs::create_directory(dir, ec)) {
    if (fs::exists(dir)) {
      throw Error(ErrorCode::kDuplicateSnapshotId, "snapshot '" + snapshot.snapshot_id + "' exists");
    }
    throw Error(ErrorCode::kSnapshotAborted, "cannot create " + dir.string() + ": " + ec.message());
  }

  try {
    json checksums = json::object();
    auto put = [&](const std::string& rel, const std::string& content) {
      write_file_atomic(dir / rel, content);
      checksums[rel] = sha256_hex(content);
    };

    std::string log;
    for (std::size_t i = 0; i < snapshot.fetch_log.size(); ++i) {
      const auto& r = snapshot.fetch_log[i];
      json entry = r;
      entry["body_file"] = body_file_name(i);
      log += entry.dump() + "\n";
      put(body_file_name(i), r.body);
    }
    put("fetch_log.jsonl", log);

    json index = {{"snapshot_id", snapshot.snapshot_id},
                  {"started_at", format_timestamp(snapshot.started_at)},
                  {"finished_at", format_timestamp(snapshot.finished_at)},
                  {"rounds", snapshot.rounds},
                  {"ads_txt_files", snapshot.ads_txt_files},
                  {"sellers_json_files", snapshot.sellers_json_files}};
    if (!provenance.is_null()) index["provenance"] = provenance;
    put("index.json", index.dump(1));
    // Written last: its presence marks the snapshot complete.
    write_file_atomic(dir / "checksums.json", checksums.dump(1));
  } catch (const Error& e) {
    throw Error(ErrorCode::kSnapshotAborted, e.what());
  }
  return snapshot.snapshot_id;
}

CrawlSnapshot SnapshotStore::load(const std::string& snapshot_id) const {
  if (!contains(snapshot_id)) {
    throw Error(ErrorCode::kUnknownSnapshotId, "unknown snapshot '" + snapshot_id + "'");
  }
  const fs::path dir = root_ / snapshot_id;

  auto checked = [&](const json& checksums, const std::string& rel) {
    auto it = checksums.find(rel);
    std::string content;
    try {
      content = read_file(dir / rel);
    } catch (const Error&) {
      throw Error(ErrorCode::kCorruptSnapshot, "missing " + rel + " in " + snapshot_id);
    }
    if (it == checksums.end() || it->get<std::string>() != sha256_hex(content)) {
      throw Error(ErrorCode::kCorruptSnapshot, "checksum mismatch for " + rel + " in " + snapshot_id);
    }
    return content;
  };

  try {
    const json checksums = json::parse(read_file(dir / "checksums.json"));
    const json index = json::parse(checked(checksums, "index.json"));

    CrawlSnapshot s;
    index.at("snapshot_id").get_to(s.snapshot_id);
    s.started_at = parse_timestamp(index.at("started_at").get<std::string>()).value();
    s.finished_at = parse_timestamp(index.at("finished_at").get<std::string>()).value();
    index.at("rounds").get_to(s.rounds);
    index.at("ads_txt_files").get_to(s.ads_txt_files);
    index.at("sellers_json_files").get_to(s.sellers_json_files);

    const std::string log = checked(checksums, "fetch_log.jsonl");
    std::size_t pos = 0;
    while (pos < log.size()) {
      auto nl = log.find('\n', pos);
      const json entry = json::parse(log.substr(pos, nl - pos));
      pos = nl == std::string::npos ? log.size() : nl + 1;
      FetchResult r = entry.get<FetchResult>();
      r.body = checked(checksums, entry.at("body_file").get<std::string>());
      s.fetch_log.push_back(std::move(r));
    }
    return s;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kCorruptSnapshot, "cannot decode " + snapshot_id + ": " + e.what());
  }
}

ReplayTransport::ReplayTransport(const CrawlSnapshot& snapshot) {
  for (const auto& r : snapshot.fetch_log) {
    if (r.status < 0) continue;
    TransportResponse response;
    response.status = r.status;
    response.body = r.body;
    response.content_type = r.content_type;
    response.final_url = r.final_url;
    map_.add(r.url, std::move(response));
  }
}

TransportResponse ReplayTransport::get(const std::string& url) { return map_.get(url); }

}  // namespace darkpool
