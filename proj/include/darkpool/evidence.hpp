#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "darkpool/har.hpp"

namespace darkpool {

struct EvidenceRun {
  std::vector<EvidenceRecord> records;
  std::vector<std::string> notes;  // unreadable HAR files and similar
  std::size_t har_files = 0;
  std::size_t hits = 0;
};

// Scans every *.har file under `har_dir` in name order. The crawled
// publisher is the host of the recorded page, else the file stem. har_path
// is relative to `har_dir`. Advertisers are attributed against the pools'
// ad systems.
EvidenceRun collect_evidence(const std::filesystem::path& har_dir, const std::vector<SellerPool>& pools,
                             const EntityMap& entities, const MatchOptions& options = {},
                             const std::optional<std::set<std::string>>& known_advertisers = std::nullopt,
                             Timestamp default_observed_at = {});

}  // namespace darkpool
