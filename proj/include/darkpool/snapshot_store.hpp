#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "darkpool/crawler.hpp"

namespace darkpool {

// On-disk layout, one directory per snapshot:
//   <root>/<id>/bodies/<n>.body   raw fetched bodies, n = fetch_log index
//   <root>/<id>/fetch_log.jsonl   one FetchResult per line
//   <root>/<id>/index.json        parsed ads.txt / sellers.json files
//   <root>/<id>/checksums.json    sha256 of every file above
// Snapshots are immutable once stored.
class SnapshotStore {
 public:
  explicit SnapshotStore(std::filesystem::path root) : root_(std::move(root)) {}

  // Throws kDuplicateSnapshotId, or kSnapshotAborted if the store is not
  // writable. A non-null `provenance` is recorded in index.json.
  std::string store(const CrawlSnapshot& snapshot, const nlohmann::json& provenance = nullptr) const;

  // Throws kUnknownSnapshotId, or kCorruptSnapshot on checksum mismatch.
  CrawlSnapshot load(const std::string& snapshot_id) const;

  bool contains(const std::string& snapshot_id) const;
  std::vector<std::string> list() const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

// Serves a recorded fetch log back to the crawler, so a stored snapshot can
// be re-crawled offline and compared.
class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(const CrawlSnapshot& snapshot);
  TransportResponse get(const std::string& url) override;

 private:
  MapTransport map_;
};

}  // namespace darkpool
