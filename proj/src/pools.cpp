#include "darkpool/pools.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "darkpool/domain.hpp"

namespace darkpool {

std::set<std::string> SellerPool::member_domains() const {
  std::set<std::string> out;
  for (const auto& m : members) out.insert(m.domain);
  return out;
}

bool SellerPool::has_member(std::string_view domain) const {
  const auto reg = registrable_domain(domain);
  return std::any_of(members.begin(), members.end(),
                     [&](const PoolMember& m) { return m.domain == reg; });
}

namespace {

// sellers.json files keyed by registrable domain. When several hosts reduce
// to the same registrable domain the one equal to it wins, then the
// lexicographically first.
std::map<std::string, const SellersJsonFile*> sellers_by_registrable(const CrawlSnapshot& snapshot) {
  std::map<std::string, const SellersJsonFile*> out;
  for (const auto& [host, file] : snapshot.sellers_json_files) {
    const auto reg = registrable_domain(host);
    auto [it, inserted] = out.emplace(reg, &file);
    if (!inserted && host == reg) it->second = &file;
  }
  return out;
}

}  // namespace

std::vector<SellerPool> build_pools(const CrawlSnapshot& snapshot) {
  std::map<std::pair<std::string, std::string>, std::map<std::string, PoolMember>> groups;
  for (const auto& [publisher, file] : snapshot.ads_txt_files) {
    const auto member_domain = registrable_domain(publisher);
    for (const auto& record : file.records) {
      auto& members = groups[{registrable_domain(record.ad_system_domain), record.seller_account_id}];
      auto& member = members[member_domain];
      member.domain = member_domain;
      (record.relationship == Relationship::kDirect ? member.direct : member.reseller) = true;
    }
  }

  const auto sellers = sellers_by_registrable(snapshot);
  std::vector<SellerPool> pools;
  for (auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    SellerPool pool;
    pool.ad_system_domain = key.first;
    pool.seller_id = key.second;
    for (auto& [domain, member] : members) pool.members.push_back(std::move(member));
    if (auto it = sellers.find(key.first); it != sellers.end()) {
      if (const SellerEntry* entry = it->second->find(key.second)) {
        if (entry->domain) pool.owner_domain = registrable_domain(*entry->domain);
        pool.owner_seller_type = entry->seller_type;
      }
    }
    pools.push_back(std::move(pool));
  }
  return pools;
}

std::vector<DarkPoolFinding> classify_dark_pools(const std::vector<SellerPool>& pools,
                                                 const EntityMap& entities,
                                                 const ProblematicList& problematic,
                                                 const std::string& snapshot_id) {
  std::vector<DarkPoolFinding> findings;
  for (const auto& pool : pools) {
    DarkPoolFinding finding;
    for (const auto& m : pool.members) {
      finding.organizations.insert(entities.organization_of(m.domain));
      if (auto category = problematic.category_of(m.domain)) {
        finding.problematic_members.push_back({m.domain, *category});
      } else {
        finding.victim_members.push_back(m.domain);
      }
    }
    if (finding.organizations.size() < 2 || finding.problematic_members.empty()) continue;
    finding.pool = pool;
    finding.detected_in = snapshot_id;
    findings.push_back(std::move(finding));
  }
  return findings;
}

RemediationDelta diff_findings(const std::vector<DarkPoolFinding>& before,
                               const std::vector<DarkPoolFinding>& after) {
  using Key = std::pair<std::string, std::string>;
  auto index = [](const std::vector<DarkPoolFinding>& list) {
    std::map<Key, const DarkPoolFinding*> out;
    for (const auto& f : list) out.emplace(Key{f.pool.ad_system_domain, f.pool.seller_id}, &f);
    return out;
  };
  const auto b = index(before);
  const auto a = index(after);

  RemediationDelta delta;
  for (const auto& [key, finding] : b) {
    auto it = a.find(key);
    if (it == a.end()) {
      delta.resolved.push_back(*finding);
      continue;
    }
    const auto old_members = finding->pool.member_domains();
    const auto new_members = it->second->pool.member_domains();
    MemberChange change{key.first, key.second, {}, {}};
    std::set_difference(new_members.begin(), new_members.end(), old_members.begin(),
                        old_members.end(), std::back_inserter(change.added_members));
    std::set_difference(old_members.begin(), old_members.end(), new_members.begin(),
                        new_members.end(), std::back_inserter(change.removed_members));
    delta.persisting.push_back(std::move(change));
  }
  for (const auto& [key, finding] : a) {
    if (!b.count(key)) delta.introduced.push_back(*finding);
  }
  return delta;
}

}  // namespace darkpool
