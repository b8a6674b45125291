#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "darkpool/campaign.hpp"
#include "darkpool/crawler.hpp"
#include "darkpool/did.hpp"
#include "darkpool/har.hpp"
#include "darkpool/time.hpp"
#include "darkpool/transport.hpp"

namespace darkpool {

enum class TransportKind { kHttp, kDirectory };

// Pipeline configuration, read from a JSON file. Relative paths resolve
// against the file's directory. Every referenced input must exist.
struct PipelineConfig {
  std::filesystem::path source;
  std::string hash;  // sha256 of the canonical JSON form

  std::filesystem::path workspace;

  struct Inputs {
    std::optional<std::filesystem::path> seeds;        // one domain per line
    std::optional<std::filesystem::path> problematic;  // domain,category
    std::optional<std::filesystem::path> entities;     // CSV, entity JSON, or a directory of them
    std::optional<std::filesystem::path> popularity;   // rank,domain
    std::optional<std::filesystem::path> har_dir;
    std::optional<std::filesystem::path> screenshot_dir;
    std::optional<std::filesystem::path> known_advertisers;  // one domain per line
  } inputs;

  CrawlConfig crawl;
  TransportKind transport = TransportKind::kHttp;
  std::filesystem::path web_root;  // directory transport
  HttpTransportOptions http;

  MatchOptions evidence;

  bool probe_common_prefixes = false;  // stub prober over `deliverable`
  std::set<std::string> deliverable;

  std::uint64_t seed = 1;
  RecipientOptions recipients;
  ScheduleOffsets schedule;
  SnapshotWindows windows;
  std::size_t max_report_instances = 25;
  std::map<Branding, BrandingProfile> branding;

  bool live_dispatch = false;
  std::optional<Timestamp> fixed_time;

  Clock clock() const { return fixed_time ? fixed_clock(*fixed_time) : system_clock(); }

  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  // `overrides` is merge-patched over the file before validation, so it is
  // part of the hash. Throws kInvalidConfig.
  static PipelineConfig load(const std::filesystem::path& path,
                             const nlohmann::json& overrides = nlohmann::json::object());
};

// Lines of a domain list; '#' comments and blanks skipped, the last CSV field taken.
std::vector<std::string> read_domain_list(const std::filesystem::path& path);

// Transport for crawling and contact pages. For the directory kind, a
// subdirectory named after `snapshot_id` takes precedence over the root, so
// one fixture can hold several points in time.
std::unique_ptr<Transport> make_transport(const PipelineConfig& config, const std::string& snapshot_id);

}  // namespace darkpool
