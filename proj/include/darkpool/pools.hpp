#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "darkpool/crawler.hpp"
#include "darkpool/entities.hpp"
#include "darkpool/sellers_json.hpp"

namespace darkpool {

struct PoolMember {
  std::string domain;  // registrable
  bool direct = false;
  bool reseller = false;

  bool operator==(const PoolMember&) const = default;
};

// Publishers whose ads.txt files list the same (ad system, seller ID).
struct SellerPool {
  std::string ad_system_domain;  // registrable
  std::string seller_id;         // byte-exact
  std::vector<PoolMember> members;  // sorted by domain, size >= 2
  std::optional<std::string> owner_domain;
  std::optional<SellerType> owner_seller_type;

  std::set<std::string> member_domains() const;
  bool has_member(std::string_view domain) const;
  bool operator==(const SellerPool&) const = default;
};

struct ProblematicMember {
  std::string domain;
  ProblemCategory category = ProblemCategory::kOther;

  bool operator==(const ProblematicMember&) const = default;
};

struct DarkPoolFinding {
  SellerPool pool;
  std::set<std::string> organizations;
  std::vector<ProblematicMember> problematic_members;  // sorted, non-empty
  std::vector<std::string> victim_members;             // sorted
  std::string detected_in;

  bool operator==(const DarkPoolFinding&) const = default;
};

// Sorted by (ad_system_domain, seller_id) bytewise.
std::vector<SellerPool> build_pools(const CrawlSnapshot& snapshot);

// A pool is dark when its members span at least two organizations and at
// least one member is problematic.
std::vector<DarkPoolFinding> classify_dark_pools(const std::vector<SellerPool>& pools,
                                                 const EntityMap& entities,
                                                 const ProblematicList& problematic,
                                                 const std::string& snapshot_id = "");

struct MemberChange {
  std::string ad_system_domain;
  std::string seller_id;
  std::vector<std::string> added_members;
  std::vector<std::string> removed_members;

  bool operator==(const MemberChange&) const = default;
};

struct RemediationDelta {
  std::vector<DarkPoolFinding> resolved;  // in before, not after
  std::vector<DarkPoolFinding> introduced;  // in after, not before
  std::vector<MemberChange> persisting;   // in both; member diffs may be empty
};

RemediationDelta diff_findings(const std::vector<DarkPoolFinding>& before,
                               const std::vector<DarkPoolFinding>& after);

}  // namespace darkpool
