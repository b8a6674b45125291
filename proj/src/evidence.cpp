#include "darkpool/evidence.hpp"

#include <algorithm>

#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"
#include "darkpool/fs_util.hpp"

namespace darkpool {

namespace fs = std::filesystem;

EvidenceRun collect_evidence(const fs::path& har_dir, const std::vector<SellerPool>& pools,
                             const EntityMap& entities, const MatchOptions& options,
                             const std::optional<std::set<std::string>>& known_advertisers,
                             Timestamp default_observed_at) {
  if (!fs::is_directory(har_dir)) {
    throw Error(ErrorCode::kInvalidInput, "HAR directory not found: " + har_dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(har_dir)) {
    if (e.is_regular_file() && to_lower(e.path().extension().string()) == ".har") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::set<std::string> ad_systems;
  for (const auto& p : pools) ad_systems.insert(p.ad_system_domain);

  EvidenceRun run;
  for (const auto& file : files) {
    const auto rel = fs::relative(file, har_dir).generic_string();
    HarDocument har;
    try {
      har = HarDocument::parse(read_file(file));
    } catch (const Error& e) {
      run.notes.push_back(rel + ": " + std::string(error_code_name(e.code())) + ": " + e.what());
      continue;
    }
    ++run.har_files;
    std::string publisher = har.page_url ? registrable_domain(url_host(*har.page_url)) : std::string();
    if (publisher.empty()) publisher = registrable_domain(file.stem().string());

    Timestamp observed = default_observed_at;
    if (!har.entries.empty() && har.entries.front().started) observed = *har.entries.front().started;

    const auto hits = extract_kv_pairs(har);
    run.hits += hits.size();
    for (auto& record : match_pooled_ids(hits, pools, publisher, entities, options, rel, observed)) {
      run.records.push_back(attribute_advertiser(har, std::move(record), ad_systems, known_advertisers));
    }
  }
  return run;
}

}  // namespace darkpool
