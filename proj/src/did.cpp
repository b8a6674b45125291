#include "darkpool/did.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "darkpool/csv.hpp"
#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"

namespace darkpool {

namespace {

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  std::string s(buf);
  if (s == "-0.0" || s == "-0.000000" || s == "-0.00") s.erase(0, 1);
  return s;
}

std::int64_t to_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidInput, std::string("bad ") + what + ": " + s);
  }
}

Measure measure_from(const std::string& s) {
  auto m = parse_measure(s);
  if (!m) throw Error(ErrorCode::kInvalidInput, "bad measure " + s);
  return *m;
}

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs, double m) {
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

std::string mu_rem_text(const DidResult& r, int precision) {
  return r.mu_remediated ? fixed(*r.mu_remediated, precision) : std::string();
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::kProbDomainsVp: return "PROBDOMAINS_VP";
    case Measure::kPoolsAd: return "POOLS_AD";
    case Measure::kPartnerPoolsAd: return "PARTNERPOOLS_AD";
  }
  return "PROBDOMAINS_VP";
}

std::optional<Measure> parse_measure(std::string_view s) {
  for (auto m : {Measure::kProbDomainsVp, Measure::kPoolsAd, Measure::kPartnerPoolsAd}) {
    if (iequals(s, measure_name(m))) return m;
  }
  return std::nullopt;
}

std::string_view group_filter_name(GroupFilter g) {
  switch (g) {
    case GroupFilter::kT1: return "T1";
    case GroupFilter::kT2: return "T2";
    case GroupFilter::kT1UnionT2: return "T1_UNION_T2";
  }
  return "T1_UNION_T2";
}

std::optional<GroupFilter> parse_group_filter(std::string_view s) {
  if (iequals(s, "t1")) return GroupFilter::kT1;
  if (iequals(s, "t2")) return GroupFilter::kT2;
  if (iequals(s, "union") || iequals(s, "T1_UNION_T2")) return GroupFilter::kT1UnionT2;
  return std::nullopt;
}

SnapshotAnalysis SnapshotAnalysis::analyze(const CrawlSnapshot& snapshot, const ProblematicList& problematic,
                                           const EntityMap& entities) {
  SnapshotAnalysis a;
  a.snapshot_id = snapshot.snapshot_id;
  a.pools = build_pools(snapshot);
  a.findings = classify_dark_pools(a.pools, entities, problematic, snapshot.snapshot_id);
  for (const auto& [host, file] : snapshot.ads_txt_files) {
    a.publishers.insert(registrable_domain(host));
    for (const auto& r : file.records) a.ad_systems.insert(registrable_domain(r.ad_system_domain));
  }
  for (const auto& [host, file] : snapshot.sellers_json_files) {
    a.ad_systems.insert(registrable_domain(host));
  }
  for (const auto& p : a.pools) {
    if (p.owner_domain) a.ad_systems.insert(*p.owner_domain);
  }
  return a;
}

MeasureValue compute_measure(Measure measure, std::string_view entity_domain, const SnapshotAnalysis& a) {
  MeasureValue v;
  v.entity_domain = registrable_domain(entity_domain);
  v.measure = measure;
  v.snapshot_id = a.snapshot_id;
  const auto& e = v.entity_domain;
  switch (measure) {
    case Measure::kProbDomainsVp: {
      v.unknown_entity = !a.publishers.count(e);
      std::set<std::string> problematic;
      for (const auto& f : a.findings) {
        if (!std::binary_search(f.victim_members.begin(), f.victim_members.end(), e)) continue;
        for (const auto& m : f.problematic_members) problematic.insert(m.domain);
      }
      v.value = static_cast<std::int64_t>(problematic.size());
      break;
    }
    case Measure::kPoolsAd: {
      v.unknown_entity = !a.ad_systems.count(e);
      std::set<std::string> ids;
      for (const auto& f : a.findings) {
        if (f.pool.ad_system_domain == e) ids.insert(f.pool.seller_id);
      }
      v.value = static_cast<std::int64_t>(ids.size());
      break;
    }
    case Measure::kPartnerPoolsAd: {
      v.unknown_entity = !a.ad_systems.count(e);
      std::set<std::pair<std::string, std::string>> ids;
      for (const auto& f : a.findings) {
        if (f.pool.owner_domain == e && f.pool.ad_system_domain != e) {
          ids.emplace(f.pool.ad_system_domain, f.pool.seller_id);
        }
      }
      v.value = static_cast<std::int64_t>(ids.size());
      break;
    }
  }
  return v;
}

MeasureValue compute_measure(Measure measure, std::string_view entity, const CrawlSnapshot& snapshot,
                             const ProblematicList& problematic, const EntityMap& entities) {
  return compute_measure(measure, entity, SnapshotAnalysis::analyze(snapshot, problematic, entities));
}

MeasureValue compute_advertiser_pools(std::string_view advertiser, const std::set<std::string>& ad_systems,
                                      const SnapshotAnalysis& a) {
  MeasureValue v;
  v.entity_domain = registrable_domain(advertiser);
  v.measure = Measure::kPoolsAd;
  v.snapshot_id = a.snapshot_id;
  v.unknown_entity = ad_systems.empty();
  std::set<std::pair<std::string, std::string>> ids;
  for (const auto& f : a.findings) {
    if (ad_systems.count(f.pool.ad_system_domain)) ids.emplace(f.pool.ad_system_domain, f.pool.seller_id);
  }
  v.value = static_cast<std::int64_t>(ids.size());
  return v;
}

std::map<std::string, std::set<std::string>> advertiser_exposure(const std::vector<EvidenceRecord>& evidence) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& e : evidence) {
    if (e.advertiser_domain) out[*e.advertiser_domain].insert(e.issuing_ad_system);
  }
  return out;
}

std::vector<MatchedPair> match_controls(const std::vector<EntityValue>& treatment,
                                        const std::vector<EntityValue>& control_pool, Measure measure) {
  if (control_pool.empty()) throw Error(ErrorCode::kEmptyControlPool, "control pool is empty");
  // Sorted by (value, domain); the nearest neighbours of x are around lower_bound(x).
  std::vector<EntityValue> controls = control_pool;
  std::sort(controls.begin(), controls.end(),
            [](const EntityValue& a, const EntityValue& b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });

  std::vector<MatchedPair> pairs;
  pairs.reserve(treatment.size());
  for (const auto& [t_domain, t_pre] : treatment) {
    auto it = std::lower_bound(controls.begin(), controls.end(), t_pre,
                               [](const EntityValue& c, std::int64_t v) { return c.second < v; });
    std::optional<std::int64_t> best_distance;
    std::vector<const EntityValue*> candidates;
    // Candidates: every control sharing the nearest value at or above, and at or below.
    auto consider_value = [&](std::int64_t value) {
      const auto d = value > t_pre ? value - t_pre : t_pre - value;
      if (best_distance && d > *best_distance) return;
      if (!best_distance || d < *best_distance) candidates.clear();
      best_distance = d;
      auto lo = std::lower_bound(controls.begin(), controls.end(), value,
                                 [](const EntityValue& c, std::int64_t v) { return c.second < v; });
      for (auto c = lo; c != controls.end() && c->second == value; ++c) candidates.push_back(&*c);
    };
    if (it != controls.end()) consider_value(it->second);
    if (it != controls.begin()) consider_value(std::prev(it)->second);
    const auto* chosen = *std::min_element(candidates.begin(), candidates.end(),
                                           [](const EntityValue* a, const EntityValue* b) { return a->first < b->first; });
    MatchedPair p;
    p.treatment_domain = t_domain;
    p.control_domain = chosen->first;
    p.measure = measure;
    p.t_pre = t_pre;
    p.c_pre = chosen->second;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::int64_t pair_delta(const MatchedPair& p) { return (p.t_post - p.c_post) - (p.t_pre - p.c_pre); }

DidResult compute_did(std::vector<MatchedPair> pairs, Measure measure, GroupFilter filter) {
  if (pairs.empty()) throw Error(ErrorCode::kNoPairs, "no matched pairs for " + std::string(measure_name(measure)));
  DidResult r;
  r.measure = measure;
  r.group_filter = filter;
  std::int64_t sum = 0;
  std::int64_t rem_sum = 0;
  for (auto& p : pairs) {
    p.delta = pair_delta(p);
    sum += p.delta;
    if (p.delta < 0) {
      ++r.n_rem;
      rem_sum += p.delta;
    }
  }
  const auto n = static_cast<double>(pairs.size());
  r.n_rem_fraction = static_cast<double>(r.n_rem) / n;
  r.mu_overall = static_cast<double>(sum) / n;
  if (r.n_rem > 0) r.mu_remediated = static_cast<double>(rem_sum) / static_cast<double>(r.n_rem);
  r.pairs = std::move(pairs);
  return r;
}

TTestReport compare_sources(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kDegenerateSample, "each sample needs at least 2 values");
  }
  const double ma = mean(a), mb = mean(b);
  const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
  if (va <= 0.0 || vb <= 0.0) throw Error(ErrorCode::kDegenerateSample, "a sample has zero variance");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = va / na, sb = vb / nb;
  TTestReport r;
  r.statistic = (ma - mb) / std::sqrt(sa + sb);
  r.degrees_of_freedom = (sa + sb) * (sa + sb) / (sa * sa / (na - 1) + sb * sb / (nb - 1));
  const boost::math::students_t dist(r.degrees_of_freedom);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.statistic)));
  r.p_value = std::min(1.0, r.p_value);
  r.significant = r.p_value < 0.05;
  return r;
}

std::optional<std::string> select_pre_snapshot(const std::vector<SnapshotTime>& snapshots, Timestamp t0,
                                               const SnapshotWindows& w) {
  std::optional<SnapshotTime> best;
  for (const auto& s : snapshots) {
    if (s.second < t0 - w.pre_max || s.second > t0 - w.pre_min) continue;
    if (!best || std::tie(s.second, s.first) > std::tie(best->second, best->first)) best = s;
  }
  return best ? std::optional(best->first) : std::nullopt;
}

std::optional<std::string> select_post_snapshot(const std::vector<SnapshotTime>& snapshots, Timestamp t0,
                                                const SnapshotWindows& w) {
  std::optional<SnapshotTime> best;
  for (const auto& s : snapshots) {
    if (s.second < t0 + w.post_min || s.second > t0 + w.post_max) continue;
    if (!best || std::tie(s.second, s.first) < std::tie(best->second, best->first)) best = s;
  }
  return best ? std::optional(best->first) : std::nullopt;
}

std::string format_measures_csv(const std::vector<MeasureValue>& values) {
  std::string out = csv::format_row({"entity_domain", "measure", "snapshot_id", "value", "unknown_entity"});
  for (const auto& v : values) {
    out += csv::format_row({v.entity_domain, std::string(measure_name(v.measure)), v.snapshot_id,
                            std::to_string(v.value), v.unknown_entity ? "true" : "false"});
  }
  return out;
}

std::vector<MeasureValue> parse_measures_csv(std::string_view text) {
  std::vector<MeasureValue> out;
  for (const auto& row : csv::parse(text)) {
    if (row.empty() || row[0] == "entity_domain") continue;
    if (row.size() < 4) throw Error(ErrorCode::kInvalidInput, "short measures row");
    MeasureValue v;
    v.entity_domain = row[0];
    v.measure = measure_from(row[1]);
    v.snapshot_id = row[2];
    v.value = to_int(row[3], "value");
    v.unknown_entity = row.size() > 4 && row[4] == "true";
    out.push_back(std::move(v));
  }
  return out;
}

std::string format_pairs_csv(const std::vector<MatchedPair>& pairs) {
  std::string out = csv::format_row(
      {"treatment_domain", "control_domain", "measure", "t_pre", "c_pre", "t_post", "c_post", "delta"});
  for (const auto& p : pairs) {
    out += csv::format_row({p.treatment_domain, p.control_domain, std::string(measure_name(p.measure)),
                            std::to_string(p.t_pre), std::to_string(p.c_pre), std::to_string(p.t_post),
                            std::to_string(p.c_post), std::to_string(p.delta)});
  }
  return out;
}

std::vector<MatchedPair> parse_pairs_csv(std::string_view text) {
  std::vector<MatchedPair> out;
  for (const auto& row : csv::parse(text)) {
    if (row.empty() || row[0] == "treatment_domain") continue;
    if (row.size() < 7) throw Error(ErrorCode::kInvalidInput, "short pairs row");
    MatchedPair p;
    p.treatment_domain = row[0];
    p.control_domain = row[1];
    p.measure = measure_from(row[2]);
    p.t_pre = to_int(row[3], "t_pre");
    p.c_pre = to_int(row[4], "c_pre");
    p.t_post = to_int(row[5], "t_post");
    p.c_post = to_int(row[6], "c_post");
    p.delta = pair_delta(p);
    out.push_back(std::move(p));
  }
  return out;
}

std::string recipient_label(std::string_view recipient, Measure m) {
  const char* short_name = m == Measure::kProbDomainsVp ? "probdomains_vp"
                           : m == Measure::kPoolsAd     ? "pools_ad"
                                                        : "partnerpools_ad";
  return std::string(recipient) + " (" + short_name + ")";
}

std::string format_recipient_table_csv(const std::vector<RecipientRow>& rows) {
  std::string out = csv::format_row({"recipient", "measure", "group", "n_pairs", "n_rem", "n_rem_fraction",
                                     "mu_overall", "mu_remediated", "matching"});
  for (const auto& row : rows) {
    const auto& r = row.result;
    out += csv::format_row({row.recipient, std::string(measure_name(r.measure)),
                            std::string(group_filter_name(r.group_filter)), std::to_string(r.pairs.size()),
                            std::to_string(r.n_rem), fixed(r.n_rem_fraction, 6), fixed(r.mu_overall, 6),
                            mu_rem_text(r, 6), r.matching});
  }
  return out;
}

std::string format_recipient_table_text(const std::vector<RecipientRow>& rows) {
  std::string out = pad("Recipient (Measure)", 40) + pad("N_rem", 10) + pad("mu_ov", 10) + "mu_rem\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    const auto mu_rem = r.mu_remediated ? fixed(*r.mu_remediated, 1) : "n/a";
    out += pad(recipient_label(row.recipient, r.measure), 40) + pad(fixed(100.0 * r.n_rem_fraction, 1) + "%", 10) +
           pad(fixed(r.mu_overall, 1), 10) + mu_rem + "\n";
  }
  return out;
}

std::string format_source_table_csv(const std::vector<SourceRow>& rows) {
  std::string out = csv::format_row({"source", "recipient", "measure", "n_pairs", "n_rem", "n_rem_fraction",
                                     "mu_overall", "mu_remediated", "significant"});
  for (const auto& row : rows) {
    const auto& r = row.result;
    out += csv::format_row({row.source, row.recipient, std::string(measure_name(r.measure)),
                            std::to_string(r.pairs.size()), std::to_string(r.n_rem), fixed(r.n_rem_fraction, 6),
                            fixed(r.mu_overall, 6), mu_rem_text(r, 6), row.significant ? "true" : "false"});
  }
  return out;
}

std::string format_source_table_text(const std::vector<SourceRow>& rows) {
  std::string out = pad("Source", 10) + pad("Recipient (Measure)", 40) + pad("N_rem", 10) + pad("mu_ov", 10) +
                    "mu_rem\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    const auto mu_rem = r.mu_remediated ? fixed(*r.mu_remediated, 1) : "n/a";
    out += pad(row.source, 10) + pad(recipient_label(row.recipient, r.measure) + (row.significant ? " *" : ""), 40) +
           pad(fixed(100.0 * r.n_rem_fraction, 1) + "%", 10) + pad(fixed(r.mu_overall, 1), 10) + mu_rem + "\n";
  }
  out += "* significant source difference (Welch t-test, p < 0.05)\n";
  return out;
}

}  // namespace darkpool
