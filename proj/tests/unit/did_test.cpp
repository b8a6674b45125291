#include "darkpool/did.hpp"

#include <random>

#include <gtest/gtest.h>

#include "darkpool/error.hpp"
#include "support/synthetic.hpp"

namespace darkpool {
namespace {

MatchedPair pair(std::string t, std::string c, std::int64_t tp, std::int64_t cp, std::int64_t tq, std::int64_t cq) {
  MatchedPair p;
  p.treatment_domain = std::move(t);
  p.control_domain = std::move(c);
  p.t_pre = tp;
  p.c_pre = cp;
  p.t_post = tq;
  p.c_post = cq;
  return p;
}

TEST(DidTest, DeltaOfTheWorkedPair) {
  EXPECT_EQ(pair_delta(pair("t", "c", 5, 5, 2, 4)), -2);
  auto r = compute_did({pair("t", "c", 3, 3, 3, 3)});
  EXPECT_EQ(r.pairs[0].delta, 0);
  EXPECT_EQ(r.n_rem, 0u);
  EXPECT_FALSE(r.mu_remediated.has_value());
}

TEST(DidTest, AggregatesAreMeansOverPairs) {
  auto r = compute_did({pair("a", "x", 5, 5, 2, 4), pair("b", "x", 1, 1, 4, 1), pair("c", "y", 2, 0, 1, 0)});
  EXPECT_EQ(r.n_rem, 2u);
  EXPECT_DOUBLE_EQ(r.n_rem_fraction, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.mu_overall, (-2.0 + 3.0 - 1.0) / 3.0);
  EXPECT_DOUBLE_EQ(*r.mu_remediated, -1.5);
  EXPECT_THROW(compute_did({}), Error);
}

TEST(DidTest, AntisymmetryAndShiftInvariance) {
  std::mt19937_64 rng(5);
  std::vector<MatchedPair> pairs, swapped, shifted;
  for (int i = 0; i < 50; ++i) {
    auto p = pair("t" + std::to_string(i), "c", rng() % 20, rng() % 20, rng() % 20, rng() % 20);
    pairs.push_back(p);
    swapped.push_back(pair(p.treatment_domain, "c", p.t_post, p.c_post, p.t_pre, p.c_pre));
    shifted.push_back(pair(p.treatment_domain, "c", p.t_pre + 7, p.c_pre + 7, p.t_post + 7, p.c_post + 7));
  }
  auto a = compute_did(pairs), b = compute_did(swapped), c = compute_did(shifted);
  EXPECT_DOUBLE_EQ(a.mu_overall, -b.mu_overall);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(a.pairs[i].delta, -b.pairs[i].delta);
    EXPECT_EQ(a.pairs[i].delta, c.pairs[i].delta);
  }
}

TEST(DidTest, MatchingPicksNearestThenLexicographic) {
  auto exact = match_controls({{"t.com", 7}}, {{"far.com", 9}, {"near.com", 7}});
  EXPECT_EQ(exact[0].control_domain, "near.com");
  auto tie = match_controls({{"t.com", 5}}, {{"zeta.com", 4}, {"alpha.com", 4}});
  EXPECT_EQ(tie[0].control_domain, "alpha.com");
  auto straddle = match_controls({{"t.com", 5}}, {{"b.com", 6}, {"a.com", 4}, {"c.com", 9}});
  EXPECT_EQ(straddle[0].control_domain, "a.com");
  auto reuse = match_controls({{"t1.com", 1}, {"t2.com", 1}}, {{"c.com", 1}, {"d.com", 10}});
  EXPECT_EQ(reuse[0].control_domain, "c.com");
  EXPECT_EQ(reuse[1].control_domain, "c.com");
  EXPECT_THROW(match_controls({{"t.com", 1}}, {}), Error);
}

TEST(DidTest, WelchTestBehaviour) {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  auto same = compare_sources(a, a);
  EXPECT_NEAR(same.p_value, 1.0, 1e-12);
  EXPECT_FALSE(same.significant);
  // Reference values from the Welch formula by hand: t = -5, df = 8.
  auto apart = compare_sources(a, {6, 7, 8, 9, 10});
  EXPECT_NEAR(apart.statistic, -5.0, 1e-12);
  EXPECT_NEAR(apart.degrees_of_freedom, 8.0, 1e-12);
  EXPECT_NEAR(apart.p_value, 0.001053, 1e-5);
  EXPECT_THROW(compare_sources({1, 1, 1}, a), Error);
  EXPECT_THROW(compare_sources({1}, a), Error);
}

TEST(DidTest, MeasuresOnAppendixBShape) {
  CrawlSnapshot s;
  s.snapshot_id = "s1";
  for (auto d : {"a.com", "b.com", "c.com"}) {
    s.ads_txt_files[d].records.push_back({"adxa.com", "12345", Relationship::kDirect, std::nullopt, 1});
  }
  s.sellers_json_files["adxa.com"].sellers.push_back({"12345", std::nullopt, "publisherc.com", SellerType::kPublisher, false});
  ProblematicList problematic;
  problematic.add("a.com", ProblemCategory::kPiracy);
  EntityMap entities;
  EXPECT_EQ(compute_measure(Measure::kProbDomainsVp, "b.com", s, problematic, entities).value, 1);
  EXPECT_EQ(compute_measure(Measure::kPoolsAd, "adxa.com", s, problematic, entities).value, 1);
  EXPECT_EQ(compute_measure(Measure::kPartnerPoolsAd, "publisherc.com", s, problematic, entities).value, 1);
  auto zero = compute_measure(Measure::kPoolsAd, "quiet.com", s, problematic, entities);
  EXPECT_EQ(zero.value, 0);
  EXPECT_TRUE(zero.unknown_entity);
}

TEST(DidTest, MeasuresMatchBruteForceCounts) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto w = testing::make_synthetic_world(seed, 400);
    const auto a = SnapshotAnalysis::analyze(w.snapshot, w.problematic, w.entities);
    const auto oracle = testing::oracle_dark_pools(w);
    for (const auto& pub : a.publishers) {
      std::set<std::string> probs;
      for (const auto& f : oracle) {
        if (f.victims.count(pub)) probs.insert(f.problematic.begin(), f.problematic.end());
      }
      EXPECT_EQ(compute_measure(Measure::kProbDomainsVp, pub, a).value, static_cast<std::int64_t>(probs.size()));
    }
    for (const auto& ad : a.ad_systems) {
      std::set<std::string> ids;
      for (const auto& f : oracle) {
        if (f.ad_system == ad) ids.insert(f.seller_id);
      }
      EXPECT_EQ(compute_measure(Measure::kPoolsAd, ad, a).value, static_cast<std::int64_t>(ids.size()));
    }
  }
}

TEST(DidTest, SnapshotWindowsPickTheClosestToTheBoundary) {
  const Timestamp t0 = *parse_timestamp("2024-03-15T00:00:00Z");
  std::vector<SnapshotTime> snaps = {{"early", t0 - Days{13}}, {"late", t0 - Days{8}}, {"too-late", t0 - Days{3}},
                                     {"p1", t0 + Days{29}}, {"p2", t0 + Days{33}}, {"p3", t0 + Days{40}}};
  EXPECT_EQ(select_pre_snapshot(snaps, t0), "late");
  EXPECT_EQ(select_post_snapshot(snaps, t0), "p1");
  EXPECT_FALSE(select_post_snapshot({{"x", t0}}, t0));
}

TEST(DidTest, CsvRoundTrips) {
  std::vector<MatchedPair> pairs = {pair("t.com", "c.com", 5, 5, 2, 4)};
  pairs[0].delta = -2;
  EXPECT_EQ(parse_pairs_csv(format_pairs_csv(pairs)), pairs);
  std::vector<MeasureValue> values = {{"b.com", Measure::kProbDomainsVp, "s1", 3, false},
                                      {"x.com", Measure::kPoolsAd, "s1", 0, true}};
  EXPECT_EQ(parse_measures_csv(format_measures_csv(values)), values);
}

TEST(DidTest, TablesCarryTheRecipientSchema) {
  auto r = compute_did({pair("a", "x", 5, 5, 2, 4)});
  const auto text = format_recipient_table_text({{"Publishers", r}});
  EXPECT_NE(text.find("Recipient (Measure)"), std::string::npos);
  EXPECT_NE(text.find("Publishers (probdomains_vp)"), std::string::npos);
  EXPECT_NE(text.find("100.0%"), std::string::npos);
  const auto csv_text = format_source_table_csv({{"Academic", "Publishers", r, true}});
  EXPECT_EQ(csv_text.substr(0, csv_text.find('\n')),
            "source,recipient,measure,n_pairs,n_rem,n_rem_fraction,mu_overall,mu_remediated,significant");
}

}  // namespace
}  // namespace darkpool
