#include "darkpool/crawler.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"

namespace darkpool {

std::string_view file_kind_name(FileKind k) {
  return k == FileKind::kAdsTxt ? "ads.txt" : "sellers.json";
}

void HostThrottle::acquire(const std::string& host) {
  if (delay_.count() <= 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    auto& next = next_allowed_[host];
    slot = std::max(now, next);
    next = slot + delay_;
  }
  std::this_thread::sleep_until(slot);
}

namespace {

struct FetchJob {
  std::string domain;
  FileKind kind;
};

class Fetcher {
 public:
  Fetcher(const CrawlConfig& config, Transport& transport, const Clock& clock)
      : config_(config), transport_(transport), clock_(clock), throttle_(config.per_host_delay) {}

  FetchResult fetch(const FetchJob& job, int round) {
    const std::string path = job.kind == FileKind::kAdsTxt ? "/ads.txt" : "/sellers.json";
    FetchResult result;
    result.kind = job.kind;
    result.domain = job.domain;
    result.round = round;
    result.url = "https://" + job.domain + path;

    TransportResponse response;
    std::string used_url = result.url;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
      throttle_.acquire(job.domain);
      ++result.attempts;
      used_url = result.url;
      response = transport_.get(used_url);
      if (response.connection_failed()) {
        // HTTPS first, plain HTTP when the TLS endpoint is unreachable.
        throttle_.acquire(job.domain);
        used_url = "http://" + job.domain + path;
        response = transport_.get(used_url);
      }
      if (!response.connection_failed() && response.status < 500) break;
    }

    result.url = used_url;
    result.status = response.status;
    result.final_url = response.final_url.empty() ? used_url : response.final_url;
    result.content_type = response.content_type;
    result.body = std::move(response.body);
    if (result.body.size() > config_.max_body_bytes) result.body.resize(config_.max_body_bytes);
    result.note = response.error;
    result.fetched_at = clock_();
    return result;
  }

  std::vector<FetchResult> fetch_all(const std::vector<FetchJob>& jobs, int round) {
    std::vector<FetchResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        results[i] = fetch(jobs[i], round);
      }
    };
    const std::size_t n_workers = std::clamp<std::size_t>(config_.concurrency, 1, jobs.size());
    if (n_workers <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(n_workers);
      for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    }
    return results;
  }

 private:
  const CrawlConfig& config_;
  Transport& transport_;
  const Clock& clock_;
  HostThrottle throttle_;
};

}  // namespace

CrawlSnapshot crawl_to_fixpoint(const std::set<std::string>& seed_publishers,
                                const CrawlConfig& config, Transport& transport,
                                const Clock& clock) {
  if (seed_publishers.empty()) {
    throw Error(ErrorCode::kInvalidInput, "crawl requires at least one seed publisher");
  }
  CrawlSnapshot snapshot;
  snapshot.snapshot_id = config.snapshot_id;
  snapshot.started_at = clock();

  Fetcher fetcher(config, transport, clock);
  std::set<std::string> seen_sellers;

  std::set<std::string> seeds;
  for (const auto& s : seed_publishers) {
    if (auto d = normalize_domain(s); !d.empty()) seeds.insert(d);
  }
  std::vector<FetchJob> jobs;
  for (const auto& d : seeds) jobs.push_back({d, FileKind::kAdsTxt});

  int round = 0;
  while (!jobs.empty() && round < config.max_rounds) {
    std::set<std::string> discovered;
    for (auto& result : fetcher.fetch_all(jobs, round)) {
      if (result.ok()) {
        try {
          if (result.kind == FileKind::kAdsTxt) {
            auto file = parse_ads_txt(result.domain, result.body, result.content_type);
            for (const auto& r : file.records) discovered.insert(r.ad_system_domain);
            snapshot.ads_txt_files.emplace(result.domain, std::move(file));
          } else {
            auto file = parse_sellers_json(result.domain, result.body);
            for (const auto& d : extract_expansion_domains(file)) discovered.insert(d);
            snapshot.sellers_json_files.emplace(result.domain, std::move(file));
          }
        } catch (const Error& e) {
          result.note = std::string(error_code_name(e.code())) + ": " + e.what();
        }
      } else if (result.note.empty()) {
        result.note = "HTTP " + std::to_string(result.status);
      }
      snapshot.fetch_log.push_back(std::move(result));
    }
    ++round;

    jobs.clear();
    for (const auto& d : discovered) {
      if (seen_sellers.insert(d).second) jobs.push_back({d, FileKind::kSellersJson});
    }
  }
  snapshot.rounds = round;
  snapshot.finished_at = clock();
  return snapshot;
}

}  // namespace darkpool
