#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "darkpool/crawler.hpp"
#include "darkpool/entities.hpp"
#include "darkpool/har.hpp"
#include "darkpool/pools.hpp"

namespace darkpool {

enum class Measure { kProbDomainsVp, kPoolsAd, kPartnerPoolsAd };
enum class GroupFilter { kT1, kT2, kT1UnionT2 };

std::string_view measure_name(Measure m);
std::optional<Measure> parse_measure(std::string_view s);
std::string_view group_filter_name(GroupFilter g);
std::optional<GroupFilter> parse_group_filter(std::string_view s);

struct MeasureValue {
  std::string entity_domain;
  Measure measure = Measure::kProbDomainsVp;
  std::string snapshot_id;
  std::int64_t value = 0;
  bool unknown_entity = false;  // absent from the snapshot's graph; value is 0

  bool operator==(const MeasureValue&) const = default;
};

// Pools and findings of one snapshot, computed once and reused across
// entities.
struct SnapshotAnalysis {
  std::string snapshot_id;
  std::vector<SellerPool> pools;
  std::vector<DarkPoolFinding> findings;
  std::set<std::string> publishers;   // registrable ads.txt hosts
  std::set<std::string> ad_systems;   // registrable ad systems and sellers.json owners

  static SnapshotAnalysis analyze(const CrawlSnapshot& snapshot, const ProblematicList& problematic,
                                  const EntityMap& entities);
};

MeasureValue compute_measure(Measure measure, std::string_view entity, const SnapshotAnalysis& analysis);
MeasureValue compute_measure(Measure measure, std::string_view entity, const CrawlSnapshot& snapshot,
                             const ProblematicList& problematic, const EntityMap& entities);

// Round-3 measure for an advertiser: dark-pooled seller IDs issued by the ad
// systems that carried its creatives.
MeasureValue compute_advertiser_pools(std::string_view advertiser, const std::set<std::string>& ad_systems,
                                      const SnapshotAnalysis& analysis);

// Ad systems that issued the seller IDs in each advertiser's evidence.
std::map<std::string, std::set<std::string>> advertiser_exposure(const std::vector<EvidenceRecord>& evidence);

struct MatchedPair {
  std::string treatment_domain;
  std::string control_domain;
  Measure measure = Measure::kProbDomainsVp;
  std::int64_t t_pre = 0;
  std::int64_t c_pre = 0;
  std::int64_t t_post = 0;
  std::int64_t c_post = 0;
  std::int64_t delta = 0;

  bool operator==(const MatchedPair&) const = default;
};

using EntityValue = std::pair<std::string, std::int64_t>;

// Nearest pre-value control per treatment, with replacement; ties go to the
// lexicographically smallest control domain. Output follows treatment order.
// Throws kEmptyControlPool.
std::vector<MatchedPair> match_controls(const std::vector<EntityValue>& treatment,
                                        const std::vector<EntityValue>& control_pool,
                                        Measure measure = Measure::kProbDomainsVp);

// (t_post - c_post) - (t_pre - c_pre)
std::int64_t pair_delta(const MatchedPair& p);

struct DidResult {
  Measure measure = Measure::kProbDomainsVp;
  GroupFilter group_filter = GroupFilter::kT1UnionT2;
  std::vector<MatchedPair> pairs;
  std::size_t n_rem = 0;
  double n_rem_fraction = 0.0;
  double mu_overall = 0.0;
  std::optional<double> mu_remediated;  // absent when no pair remediated
  std::string matching = "nearest-neighbor, with replacement, lexicographic ties";
};

// Recomputes every delta. Throws kNoPairs.
DidResult compute_did(std::vector<MatchedPair> pairs, Measure measure = Measure::kProbDomainsVp,
                      GroupFilter filter = GroupFilter::kT1UnionT2);

struct TTestReport {
  double statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  bool significant = false;  // p < 0.05
};

// Welch's unequal-variance two-sample t-test, two-sided. Throws
// kDegenerateSample when a sample has fewer than 2 values or zero variance.
TTestReport compare_sources(const std::vector<double>& deltas_t1, const std::vector<double>& deltas_t2);

// Snapshot choice around a send time T0: the pre snapshot is the latest one
// in [T0 - pre_max, T0 - pre_min]; the post snapshot is the earliest one in
// [T0 + post_min, T0 + post_max].
struct SnapshotWindows {
  Days pre_min{7};
  Days pre_max{14};
  Days post_min{28};
  Days post_max{35};
};
using SnapshotTime = std::pair<std::string, Timestamp>;
std::optional<std::string> select_pre_snapshot(const std::vector<SnapshotTime>& snapshots, Timestamp t0,
                                               const SnapshotWindows& w = {});
std::optional<std::string> select_post_snapshot(const std::vector<SnapshotTime>& snapshots, Timestamp t0,
                                                const SnapshotWindows& w = {});

// CSV forms.
// measures: entity_domain,measure,snapshot_id,value,unknown_entity
// pairs:    treatment_domain,control_domain,measure,t_pre,c_pre,t_post,c_post,delta
std::string format_measures_csv(const std::vector<MeasureValue>& values);
std::vector<MeasureValue> parse_measures_csv(std::string_view text);
std::string format_pairs_csv(const std::vector<MatchedPair>& pairs);
std::vector<MatchedPair> parse_pairs_csv(std::string_view text);

// One row of the recipient x {N_rem, mu_ov, mu_rem} table.
struct RecipientRow {
  std::string recipient;  // e.g. "Publishers"
  DidResult result;
};

// One row of the source x recipient table; `significant` marks a source
// difference for that recipient.
struct SourceRow {
  std::string source;  // "Academic" or "Activist"
  std::string recipient;
  DidResult result;
  bool significant = false;
};

std::string recipient_label(std::string_view recipient, Measure m);
std::string format_recipient_table_csv(const std::vector<RecipientRow>& rows);
std::string format_recipient_table_text(const std::vector<RecipientRow>& rows);
std::string format_source_table_csv(const std::vector<SourceRow>& rows);
std::string format_source_table_text(const std::vector<SourceRow>& rows);

}  // namespace darkpool
