#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "darkpool/ads_txt.hpp"
#include "darkpool/sellers_json.hpp"
#include "darkpool/time.hpp"
#include "darkpool/transport.hpp"

namespace darkpool {

enum class FileKind { kAdsTxt, kSellersJson };

std::string_view file_kind_name(FileKind k);

struct FetchResult {
  std::string url;
  std::string final_url;
  int status = kConnectionFailed;
  std::string body;
  Timestamp fetched_at{};
  std::optional<std::string> content_type;

  // Crawler bookkeeping.
  FileKind kind = FileKind::kAdsTxt;
  std::string domain;
  int round = 0;
  int attempts = 0;
  std::string note;  // transport or parse error, empty on success

  bool ok() const { return status >= 200 && status < 300; }
  bool operator==(const FetchResult&) const = default;
};

struct CrawlSnapshot {
  std::string snapshot_id;
  std::map<std::string, AdsTxtFile> ads_txt_files;        // by publisher domain
  std::map<std::string, SellersJsonFile> sellers_json_files;  // by ad system domain
  std::vector<FetchResult> fetch_log;
  Timestamp started_at{};
  Timestamp finished_at{};
  int rounds = 0;

  bool operator==(const CrawlSnapshot&) const = default;
};

struct CrawlConfig {
  std::string snapshot_id = "snapshot";
  std::size_t concurrency = 16;
  std::chrono::milliseconds per_host_delay{2000};
  int retries = 2;
  int max_rounds = 10;
  std::size_t max_body_bytes = 16u << 20;
};

// Crawls ads.txt for the seeds, then sellers.json for every ad system
// discovered, following INTERMEDIARY/BOTH entries until a round discovers
// nothing new or max_rounds is reached. Each (domain, file) is fetched at
// most once. Fetch failures are logged in the snapshot, never thrown.
CrawlSnapshot crawl_to_fixpoint(const std::set<std::string>& seed_publishers,
                                const CrawlConfig& config, Transport& transport,
                                const Clock& clock = system_clock());

// Spaces requests to the same host by at least `delay`. Thread-safe.
class HostThrottle {
 public:
  explicit HostThrottle(std::chrono::milliseconds delay) : delay_(delay) {}
  void acquire(const std::string& host);

 private:
  std::chrono::milliseconds delay_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_allowed_;
};

}  // namespace darkpool
