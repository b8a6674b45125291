// Acceptance suite: one line per criterion, nonzero exit if any fails.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "darkpool/ads_txt.hpp"
#include "darkpool/campaign.hpp"
#include "darkpool/crawler.hpp"
#include "darkpool/did.hpp"
#include "darkpool/error.hpp"
#include "darkpool/evidence.hpp"
#include "darkpool/fs_util.hpp"
#include "darkpool/har.hpp"
#include "darkpool/json_io.hpp"
#include "darkpool/pools.hpp"
#include "darkpool/sellers_json.hpp"
#include "support/appendix_b.hpp"
#include "support/pipeline.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace darkpool;
using darkpool::testing::TempDir;

namespace {

// Pinned thresholds.
constexpr double kInjectedEffect = -3.0;
constexpr double kEffectTolerance = 0.3;
constexpr int kEffectMinRuns = 95;       // of 100
constexpr double kNullTolerance = 0.2;
constexpr int kNullMinRuns = 100;        // of 100
constexpr std::size_t kDidPairs = 500;
constexpr int kTTestNullMinRuns = 90;    // of 100, p > 0.05
constexpr int kTTestSeparatedMinRuns = 100;
constexpr std::size_t kTTestSampleSize = 50;
constexpr std::size_t kHarHits = 47;
constexpr std::size_t kReportCap = 25;

const fs::path kFixtures = DARKPOOL_FIXTURE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> run;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

// ---- 1 -------------------------------------------------------------------

Outcome appendix_b_end_to_end() {
  const std::map<std::string, std::pair<std::string, std::string>> site = {
      {"a.com/ads.txt", {"adxA.com, 12345, DIRECT\n", "text/plain"}},
      {"b.com/ads.txt", {"adxA.com, 12345, DIRECT\n", "text/plain"}},
      {"c.com/ads.txt", {"adxA.com, 12345, DIRECT\n", "text/plain"}},
      {"adxa.com/sellers.json", {darkpool::testing::kAppendixBSellersJson, "application/json"}},
  };
  httplib::Server server;
  server.Get(R"(/.*)", [&](const httplib::Request& req, httplib::Response& res) {
    auto host = req.get_header_value("Host");
    host = host.substr(0, host.find(':'));
    auto it = site.find(host + req.path);
    if (it == site.end()) {
      res.status = 404;
      return;
    }
    res.set_content(it->second.first, it->second.second);
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  if (port <= 0) return fail("cannot bind a local port");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  TempDir dir;
  write_file_atomic(dir.path() / "seeds.txt", "a.com\nb.com\nc.com\n");
  write_file_atomic(dir.path() / "problematic.csv", "domain,category\na.com,misinformation\n");
  const std::string target = "127.0.0.1:" + std::to_string(port);
  const json config{{"workspace", "ws"},
                    {"inputs", {{"seeds", "seeds.txt"}, {"problematic", "problematic.csv"}}},
                    {"crawl", {{"concurrency", 2}, {"per_host_delay_ms", 0}, {"retries", 0}, {"timeout_ms", 2000}}},
                    {"transport",
                     {{"kind", "http"},
                      {"verify_tls", false},
                      {"host_overrides", {{"a.com", target}, {"b.com", target}, {"c.com", target}, {"adxa.com", target}}}}}};
  write_file_atomic(dir.path() / "config.json", config.dump());
  const auto cfg = (dir.path() / "config.json").string();

  auto crawl = darkpool::testing::run_cli_args({"--config", cfg, "--now", "2024-01-01T00:00:00Z", "crawl", "--snapshot", "s1"});
  auto detect = darkpool::testing::run_cli_args({"--config", cfg, "detect", "--snapshot", "s1"});
  server.stop();
  thread.join();
  if (crawl.status != 0) return fail("crawl failed: " + crawl.err);
  if (detect.status != 0) return fail("detect failed: " + detect.err);

  const auto pools = from_jsonl<SellerPool>(read_file(dir.path() / "ws/detect/s1/pools.jsonl"));
  const auto findings = from_jsonl<DarkPoolFinding>(read_file(dir.path() / "ws/detect/s1/findings.jsonl"));
  if (pools.size() != 1) return fail(std::to_string(pools.size()) + " pools, expected 1");
  if (findings.size() != 1) return fail(std::to_string(findings.size()) + " findings, expected 1");
  const auto& f = findings.front();
  std::vector<std::string> problematic;
  for (const auto& m : f.problematic_members) problematic.push_back(m.domain);
  if (problematic != std::vector<std::string>{"a.com"}) return fail("wrong problematic members");
  if (f.victim_members != std::vector<std::string>{"b.com", "c.com"}) return fail("wrong victims");
  if (f.pool.owner_domain != std::optional<std::string>("publisherc.com")) return fail("wrong owner");
  return {true, "1 pool, 1 dark pool {a.com} / {b.com, c.com}, owner publisherc.com, served over local HTTP"};
}

// ---- 2 -------------------------------------------------------------------

Outcome parser_corpus() {
  const auto corpus = json::parse(read_file(kFixtures / "parser_corpus.json")).at("cases");
  std::size_t passed = 0;
  std::string failures;
  for (const auto& c : corpus) {
    const auto& expect = c.at("expect");
    const auto body = c.at("body").get<std::string>();
    const auto name = c.at("name").get<std::string>();
    std::string problem;
    try {
      if (c.at("kind") == "ads_txt") {
        std::optional<std::string> ct;
        if (c.contains("content_type")) ct = c.at("content_type").get<std::string>();
        const auto f = parse_ads_txt("example.com", body, ct ? std::optional<std::string_view>(*ct) : std::nullopt);
        if (expect.contains("error")) {
          problem = "expected an error";
        } else if (f.records.size() != expect.at("records") || f.variables.size() != expect.at("variables") ||
                   f.skipped_lines.size() != expect.at("skipped") ||
                   f.blank_or_comment_lines != expect.at("blank_or_comment")) {
          problem = "counts " + std::to_string(f.records.size()) + "/" + std::to_string(f.variables.size()) + "/" +
                    std::to_string(f.skipped_lines.size()) + "/" + std::to_string(f.blank_or_comment_lines);
        } else if (expect.contains("contact") && f.variable_values("CONTACT") != expect.at("contact").get<std::vector<std::string>>()) {
          problem = "CONTACT values";
        } else if (expect.contains("caid") && f.records.at(0).certification_authority_id != expect.at("caid").get<std::string>()) {
          problem = "certification authority id";
        } else if (expect.contains("first_domain") && f.records.at(0).ad_system_domain != expect.at("first_domain")) {
          problem = "first domain";
        } else if (expect.contains("first_id") && f.records.at(0).seller_account_id != expect.at("first_id")) {
          problem = "first seller id";
        }
      } else {
        const auto f = parse_sellers_json("adx.com", body);
        const auto confidential = std::count_if(f.sellers.begin(), f.sellers.end(), [](const SellerEntry& s) { return s.is_confidential; });
        if (expect.contains("error")) {
          problem = "expected an error";
        } else if (f.sellers.size() != expect.at("sellers") || f.skipped_entries.size() != expect.at("skipped") ||
                   f.flagged_entries.size() != expect.at("flagged") ||
                   static_cast<std::size_t>(confidential) != expect.at("confidential")) {
          problem = "counts";
        } else if (expect.contains("first_id") && f.sellers.at(0).seller_id != expect.at("first_id")) {
          problem = "first seller id";
        } else if (expect.contains("contact_email") && f.contact_email != expect.at("contact_email").get<std::string>()) {
          problem = "contact email";
        }
      }
    } catch (const Error& e) {
      if (!expect.contains("error") || expect.at("error") != error_code_name(e.code())) {
        problem = std::string("unexpected ") + std::string(error_code_name(e.code()));
      }
    }
    if (problem.empty()) {
      ++passed;
    } else {
      failures += " " + name + "(" + problem + ")";
    }
  }
  if (corpus.size() != 40) return fail("corpus has " + std::to_string(corpus.size()) + " cases");
  if (passed != corpus.size()) return fail(std::to_string(passed) + "/40;" + failures);
  return {true, "40/40 cases"};
}

// ---- 3 -------------------------------------------------------------------

Outcome pool_oracle() {
  std::size_t agree = 0;
  std::size_t total_findings = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto w = darkpool::testing::make_synthetic_world(seed, 1000);
    const auto findings = classify_dark_pools(build_pools(w.snapshot), w.entities, w.problematic);
    const auto expected = darkpool::testing::oracle_dark_pools(w);
    total_findings += expected.size();
    if (darkpool::testing::as_oracle_form(findings) == expected) ++agree;
  }
  if (agree != 100) return fail(std::to_string(agree) + "/100 snapshots agree");
  return {true, "100/100 snapshots agree (" + std::to_string(total_findings) + " dark pools)"};
}

// ---- 4 -------------------------------------------------------------------

Outcome three_level_chain() {
  MapTransport t;
  t.add_ok("https://pub1.com/ads.txt", "adx-a.com, 1, DIRECT\nadx-b.com, 9, RESELLER\n");
  t.add_ok("https://pub2.com/ads.txt", "adx-a.com, 2, DIRECT\n");
  t.add_ok("https://adx-a.com/sellers.json",
           R"({"sellers":[{"seller_id":"1","domain":"pub1.com","seller_type":"PUBLISHER"},
                          {"seller_id":"5","domain":"mid.com","seller_type":"INTERMEDIARY"}]})",
           "application/json");
  t.add_ok("https://adx-b.com/sellers.json",
           R"({"sellers":[{"seller_id":"9","domain":"mid.com","seller_type":"BOTH"}]})", "application/json");
  // The third level points back at an ad system that was already fetched.
  t.add_ok("https://mid.com/sellers.json",
           R"({"sellers":[{"seller_id":"7","domain":"pub3.com","seller_type":"PUBLISHER"},
                          {"seller_id":"8","domain":"adx-a.com","seller_type":"INTERMEDIARY"}]})",
           "application/json");
  CrawlConfig config;
  config.per_host_delay = std::chrono::milliseconds(0);
  config.retries = 0;
  const auto snap = crawl_to_fixpoint({"pub1.com", "pub2.com"}, config, t, fixed_clock(Timestamp{}));
  if (snap.rounds != 3) return fail("terminated after " + std::to_string(snap.rounds) + " rounds");
  auto requests = t.requests();
  std::map<std::string, int> count;
  for (const auto& r : requests) ++count[r];
  const std::set<std::string> expected = {"https://pub1.com/ads.txt", "https://pub2.com/ads.txt",
                                          "https://adx-a.com/sellers.json", "https://adx-b.com/sellers.json",
                                          "https://mid.com/sellers.json"};
  std::set<std::string> seen;
  for (const auto& [url, n] : count) {
    if (n != 1) return fail(url + " fetched " + std::to_string(n) + " times");
    seen.insert(url);
  }
  if (seen != expected) return fail("fetched set differs from the chain's domains");
  return {true, "3 rounds, 5 files, each fetched once"};
}

// ---- 5 -------------------------------------------------------------------

MatchedPair make_pair(std::string t, std::string c, std::int64_t tp, std::int64_t cp, std::int64_t tq, std::int64_t cq) {
  MatchedPair p;
  p.treatment_domain = std::move(t);
  p.control_domain = std::move(c);
  p.t_pre = tp;
  p.c_pre = cp;
  p.t_post = tq;
  p.c_post = cq;
  return p;
}

// Pairs share a pre-period level; post values add unit normal noise, plus
// `effect` for the treated side.
double simulate_did(std::uint64_t seed, double effect) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> level(0, 40);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<MatchedPair> pairs;
  for (std::size_t i = 0; i < kDidPairs; ++i) {
    const int pre = level(rng);
    const auto t_post = std::llround(pre + noise(rng) + effect);
    const auto c_post = std::llround(pre + noise(rng));
    pairs.push_back(make_pair("t" + std::to_string(i) + ".com", "c" + std::to_string(i) + ".com", pre, pre, t_post, c_post));
  }
  return compute_did(pairs).mu_overall;
}

Outcome pm_did() {
  // (a) ten hand-computed pairs.
  std::vector<MatchedPair> pairs = {
      make_pair("t01.com", "c01.com", 5, 5, 2, 4),    // -2
      make_pair("t02.com", "c02.com", 3, 3, 3, 3),    //  0
      make_pair("t03.com", "c03.com", 10, 9, 4, 9),   // -6
      make_pair("t04.com", "c04.com", 0, 0, 2, 0),    // +2
      make_pair("t05.com", "c05.com", 7, 7, 7, 8),    // -1
      make_pair("t06.com", "c06.com", 1, 2, 1, 1),    // +1
      make_pair("t07.com", "c07.com", 4, 4, 0, 2),    // -2
      make_pair("t08.com", "c08.com", 6, 5, 6, 5),    //  0
      make_pair("t09.com", "c09.com", 2, 2, 5, 2),    // +3
      make_pair("t10.com", "c10.com", 8, 8, 5, 8),    // -3
  };
  const std::vector<std::int64_t> deltas = {-2, 0, -6, 2, -1, 1, -2, 0, 3, -3};
  const auto r = compute_did(pairs);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (r.pairs[i].delta != deltas[i]) return fail("pair " + std::to_string(i + 1) + " delta");
  }
  // n_rem = 5 (deltas -2 -6 -1 -2 -3), mu_ov = -8/10, mu_rem = -14/5.
  if (r.n_rem != 5 || r.n_rem_fraction != 0.5 || r.mu_overall != -0.8 || !r.mu_remediated ||
      *r.mu_remediated != -2.8) {
    return fail("hand fixture aggregates");
  }

  // (b) injected effect.
  int within = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const double mu = simulate_did(seed, kInjectedEffect);
    worst = std::max(worst, std::abs(mu - kInjectedEffect));
    if (std::abs(mu - kInjectedEffect) <= kEffectTolerance) ++within;
  }
  if (within < kEffectMinRuns) return fail("effect recovered in " + std::to_string(within) + "/100 runs");

  // (c) null effect.
  int calm = 0;
  double worst_null = 0.0;
  for (std::uint64_t seed = 1001; seed <= 1100; ++seed) {
    const double mu = simulate_did(seed, 0.0);
    worst_null = std::max(worst_null, std::abs(mu));
    if (std::abs(mu) <= kNullTolerance) ++calm;
  }
  if (calm < kNullMinRuns) return fail("null within tolerance in " + std::to_string(calm) + "/100 runs");

  char buf[200];
  std::snprintf(buf, sizeof buf, "hand fixture exact; effect %d/100 within 0.3 (max err %.3f); null %d/100 within 0.2 (max %.3f)",
                within, worst, calm, worst_null);
  return {true, buf};
}

// ---- 6 -------------------------------------------------------------------

Outcome matching_oracle() {
  std::mt19937_64 rng(606);
  std::size_t ties = 0;
  for (int config = 0; config < 100; ++config) {
    const std::size_t nt = 1 + rng() % 30;
    const std::size_t nc = 1 + rng() % 30;
    const int range = 1 + static_cast<int>(rng() % 12);  // small ranges force ties
    auto name = [&](const char* prefix) {
      std::string s = prefix;
      for (int i = 0; i < 5; ++i) s += static_cast<char>('a' + rng() % 26);
      return s + ".com";
    };
    std::vector<EntityValue> treated, controls;
    for (std::size_t i = 0; i < nt; ++i) treated.emplace_back(name("t"), static_cast<std::int64_t>(rng() % range));
    std::set<std::string> used;
    while (controls.size() < nc) {
      auto n = name("c");
      if (used.insert(n).second) controls.emplace_back(n, static_cast<std::int64_t>(rng() % range));
    }
    const auto got = match_controls(treated, controls);
    if (got.size() != treated.size()) return fail("configuration " + std::to_string(config) + " size");
    for (std::size_t i = 0; i < treated.size(); ++i) {
      // Exhaustive scan.
      const EntityValue* best = nullptr;
      std::size_t at_best = 0;
      for (const auto& c : controls) {
        const auto d = std::abs(c.second - treated[i].second);
        const auto bd = best ? std::abs(best->second - treated[i].second) : -1;
        if (!best || d < bd) {
          best = &c;
          at_best = 1;
        } else if (d == bd) {
          ++at_best;
          if (c.first < best->first) best = &c;
        }
      }
      if (at_best > 1) ++ties;
      if (got[i].treatment_domain != treated[i].first || got[i].control_domain != best->first ||
          got[i].t_pre != treated[i].second || got[i].c_pre != best->second) {
        return fail("configuration " + std::to_string(config) + " treatment " + treated[i].first);
      }
    }
  }
  if (ties == 0) return fail("no tie cases exercised");
  return {true, "100/100 configurations, " + std::to_string(ties) + " tied matches resolved lexicographically"};
}

// ---- 7 -------------------------------------------------------------------

Outcome t_test_sanity() {
  int null_ok = 0;
  int separated_ok = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<double> a, b, c;
    for (std::size_t i = 0; i < kTTestSampleSize; ++i) {
      a.push_back(unit(rng));
      b.push_back(unit(rng));
      c.push_back(-30.0 + unit(rng));
    }
    if (compare_sources(a, b).p_value > 0.05) ++null_ok;
    if (compare_sources(a, c).p_value < 0.05) ++separated_ok;
  }
  if (null_ok < kTTestNullMinRuns) return fail("identical samples: p>0.05 in " + std::to_string(null_ok) + "/100");
  if (separated_ok < kTTestSeparatedMinRuns) return fail("separated samples: p<0.05 in " + std::to_string(separated_ok) + "/100");
  return {true, "identical p>0.05 in " + std::to_string(null_ok) + "/100; separated p<0.05 in " +
                    std::to_string(separated_ok) + "/100"};
}

// ---- 8 -------------------------------------------------------------------

struct ExpectedHit {
  std::size_t entry;
  HitLocation location;
  std::string key;
  std::string value;
};

Outcome har_evidence() {
  using L = HitLocation;
  // Enumerated by reading the fixture entry by entry.
  const std::vector<ExpectedHit> expected = {
      {0, L::kHeader, "User-Agent", "FixtureBrowser/1.0"},
      {0, L::kHeader, "Content-Type", "text/html"},
      {0, L::kCookie, "consent", "yes"},
      {0, L::kCookie, "lang", "en"},
      {1, L::kUrlQuery, "v", "3"},
      {1, L::kUrlQuery, "build", "2024a"},
      {1, L::kResponseBody, "site", "news"},
      {1, L::kHeader, "Accept", "*/*"},
      {2, L::kUrlQuery, "pub_id", "PUB-7781"},
      {2, L::kUrlQuery, "slot", "top"},
      {2, L::kUrlQuery, "w", "300"},
      {2, L::kUrlQuery, "h", "250"},
      {2, L::kResponseBody, "bid", "0.42"},
      {2, L::kResponseBody, "currency", "USD"},
      {2, L::kCookie, "uid", "abc123"},
      {3, L::kUrlQuery, "cid", "9001"},
      {3, L::kHeader, "Location", "https://go.redirector-net.com/r?d=1"},
      {4, L::kUrlQuery, "d", "1"},
      {4, L::kHeader, "Location", "https://www.brand.com/landing"},
      {5, L::kUrlQuery, "utm_source", "adx"},
      {5, L::kUrlQuery, "utm_campaign", "spring sale"},
      {6, L::kRequestBody, "id", "884213"},
      {6, L::kRequestBody, "tagid", "leaderboard"},
      {6, L::kHeader, "Content-Type", "application/json"},
      {7, L::kUrlQuery, "account_id", "ACC99812"},
      {7, L::kUrlQuery, "gdpr", "0"},
      {7, L::kUrlQuery, "cb", "1700000000"},
      {7, L::kCookie, "sync", "ok"},
      {8, L::kUrlQuery, "sid", "55512"},
      {8, L::kUrlQuery, "aid", "99887766"},
      {8, L::kUrlQuery, "tiny", "123"},
      {8, L::kHeader, "X-Forwarded-For", "10.0.0.1"},
      {9, L::kRequestBody, "publisher_id", "77777"},
      {9, L::kRequestBody, "ref", "pub-7781"},
      {9, L::kResponseBody, "status", "logged"},
      {9, L::kResponseBody, "echo", "XPUB-77810"},
      {10, L::kUrlQuery, "pub_id", "PUB-7781"},
      {10, L::kUrlQuery, "slot", "side"},
      {10, L::kUrlQuery, "w", "160"},
      {10, L::kUrlQuery, "h", "600"},
      {11, L::kUrlQuery, "page", "2"},
      {11, L::kResponseBody, "user", "alice"},
      {11, L::kResponseBody, "text", "great%20article"},
      {11, L::kResponseBody, "user", "bob"},
      {11, L::kResponseBody, "text", "a=b"},
      {11, L::kHeader, "Referer", "https://news-site.com/"},
      {11, L::kCookie, "session", "xyz"},
  };
  if (expected.size() != kHarHits) return fail("enumeration has " + std::to_string(expected.size()) + " hits");

  const auto har_dir = kFixtures / "har";
  const auto har = HarDocument::parse(read_file(har_dir / "news-site.com.har"));
  if (har.entries.size() != 12) return fail("fixture has " + std::to_string(har.entries.size()) + " entries");
  const auto hits = extract_kv_pairs(har);
  if (hits.size() != expected.size()) return fail(std::to_string(hits.size()) + " hits, expected 47");
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const auto& h = hits[i];
    const auto& e = expected[i];
    if (h.entry_index != e.entry || h.location != e.location || h.key != e.key || h.value != e.value) {
      return fail("hit " + std::to_string(i) + " is " + h.key + "=" + h.value);
    }
  }

  auto pool = [](std::string adx, std::string id, std::optional<std::string> owner) {
    SellerPool p;
    p.ad_system_domain = std::move(adx);
    p.seller_id = std::move(id);
    p.members = {{"m1.com", true, false}, {"m2.com", false, true}};
    p.owner_domain = std::move(owner);
    return p;
  };
  const std::vector<SellerPool> pools = {
      pool("adx-one.com", "PUB-7781", "victim-one.com"),
      pool("adx-two.com", "884213", "victim-two.com"),
      pool("adx-three.com", "ACC99812", "victim-three.com"),
      pool("adx-four.com", "55512", "news-site.com"),        // owner is the crawled publisher
      pool("adx-five.com", "77777", "news-owner.com"),       // owner in the same organization
      pool("adx-six.com", "123", "victim-six.com"),          // too short to count
      pool("adx-seven.com", "99887766", std::nullopt),       // no declared owner
  };
  EntityMap entities;
  entities.add("news-site.com", "News Corp");
  entities.add("news-owner.com", "News Corp");
  const auto run = collect_evidence(har_dir, pools, entities);
  if (run.hits != kHarHits) return fail("collect_evidence saw " + std::to_string(run.hits) + " hits");
  struct Want {
    std::string adx, id, owner;
    std::optional<std::string> advertiser;
  };
  const std::vector<Want> want = {{"adx-one.com", "PUB-7781", "victim-one.com", "brand.com"},
                                  {"adx-two.com", "884213", "victim-two.com", std::nullopt},
                                  {"adx-three.com", "ACC99812", "victim-three.com", std::nullopt}};
  if (run.records.size() != want.size()) return fail(std::to_string(run.records.size()) + " records, expected 3");
  for (std::size_t i = 0; i < want.size(); ++i) {
    const auto& r = run.records[i];
    if (r.issuing_ad_system != want[i].adx || r.seller_id != want[i].id || r.owner_domain != want[i].owner ||
        r.advertiser_domain != want[i].advertiser || r.crawled_publisher != "news-site.com") {
      return fail("record " + std::to_string(i) + " is " + r.issuing_ad_system + "/" + r.seller_id);
    }
  }
  return {true, "47/47 hits in order, 3 planted records, 0 decoys"};
}

// ---- 9 -------------------------------------------------------------------

std::string fill(std::string tmpl, std::initializer_list<std::size_t> counts) {
  for (auto n : counts) tmpl.replace(tmpl.find("<num>"), 5, std::to_string(n));
  return tmpl;
}

using Key = std::pair<std::string, std::string>;

struct Count {
  std::set<Key> ids;
  std::set<std::string> pubs;
};

Outcome campaign_rendering() {
  const std::string kVictimDynamic =
      "During network traffic analysis of problematic publishers, we observed that <num> sellerID(s) in your "
      "ads.txt are being used by <num> potentially problematic publisher(s) to monetize their ad inventory.";
  const std::string kVictimStatic =
      "We observed that <num> sellerID(s) in your ads.txt are being used in ads.txt of at least <num> other "
      "potentially problematic publishers.";
  const std::string kIssued = "<num> seller IDs issued by you are being pooled by <num> potentially problematic publishers.";
  const std::string kOwned =
      "<num> seller IDs owned by you and issued by another ad-network are being pooled by <num> potentially "
      "problematic publishers.";
  const std::string kConfirmedIssued =
      "We confirmed that <num> seller IDs issued by you are being pooled by <num> potentially problematic publishers.";
  const std::string kConfirmedOwned =
      "We confirmed that <num> seller IDs owned by you and issued by another ad-network are being pooled by <num> "
      "potentially problematic publishers.";
  const std::string kCreative =
      "An ad creative associated with your brand was observed on <num> problematic publishers. This association "
      "could negatively impact your reputation and future business.";

  TempDir dir;
  const auto ws = dir.path() / "ws";
  darkpool::testing::run_fixture_pipeline(kFixtures / "campaign", ws);

  std::size_t entries = 0, sentences = 0, capped = 0, controls = 0;
  for (int round = 1; round <= 3; ++round) {
    const auto rdir = "round" + std::to_string(round);
    const auto plan = json::parse(read_file(ws / "campaign" / rdir / "plan.json"));
    const auto snap = plan.at("pre_snapshot_id").get<std::string>();
    const auto findings = from_jsonl<DarkPoolFinding>(read_file(ws / "detect" / snap / "findings.jsonl"));
    const auto evidence = from_jsonl<EvidenceRecord>(read_file(ws / "evidence" / snap / "evidence.jsonl"));
    const auto assignments = json::parse(read_file(ws / "campaign" / rdir / "assignments.json")).at("assignments");
    const auto outbox = ws / "campaign" / "outbox" / rdir;

    for (const auto& a : assignments) {
      const auto entity = a.at("entity_domain").get<std::string>();
      const auto entry = outbox / entity;
      if (a.at("group") == "CONTROL") {
        ++controls;
        if (fs::exists(entry)) return fail("control entity " + entity + " has an outbox entry");
        continue;
      }
      if (!fs::exists(entry / "meta.json")) continue;  // no contact
      ++entries;
      const auto body = read_file(entry / "body.txt");

      // Independent counts.
      std::vector<std::pair<std::string, Count>> want;
      auto key_f = [](const DarkPoolFinding& f) { return Key{f.pool.ad_system_domain, f.pool.seller_id}; };
      auto key_e = [](const EvidenceRecord& e) { return Key{e.issuing_ad_system, e.seller_id}; };
      auto add_f = [&](Count& c, const DarkPoolFinding& f) {
        c.ids.insert(key_f(f));
        for (const auto& m : f.problematic_members) c.pubs.insert(m.domain);
      };
      auto add_e = [&](Count& c, const EvidenceRecord& e) {
        c.ids.insert(key_e(e));
        c.pubs.insert(e.crawled_publisher);
      };
      if (round == 1) {
        Count stat, dyn;
        for (const auto& f : findings) {
          if (std::count(f.victim_members.begin(), f.victim_members.end(), entity)) add_f(stat, f);
        }
        for (const auto& e : evidence) {
          if (e.owner_domain == entity || stat.ids.count(key_e(e))) add_e(dyn, e);
        }
        want = {{kVictimDynamic, dyn}, {kVictimStatic, stat}};
      } else if (round == 2) {
        Count issued, owned, ci, co;
        for (const auto& f : findings) {
          if (f.pool.ad_system_domain == entity) add_f(issued, f);
          else if (f.pool.owner_domain == entity) add_f(owned, f);
        }
        for (const auto& e : evidence) {
          if (e.issuing_ad_system == entity) add_e(ci, e);
          else if (e.owner_domain == entity) add_e(co, e);
        }
        want = {{kIssued, issued}, {kOwned, owned}, {kConfirmedIssued, ci}, {kConfirmedOwned, co}};
      } else {
        Count adv;
        for (const auto& e : evidence) {
          if (e.advertiser_domain == entity) add_e(adv, e);
        }
        if (!body.empty() && body.find(fill(kCreative, {adv.pubs.size()})) == std::string::npos) {
          return fail(entity + ": creative sentence missing or miscounted");
        }
        ++sentences;
      }
      for (const auto& [tmpl, c] : want) {
        const auto sentence = fill(tmpl, {c.ids.size(), c.pubs.size()});
        const bool present = body.find(sentence) != std::string::npos;
        if (c.ids.empty() == present) return fail(entity + ": sentence mismatch: " + sentence);
        if (present) ++sentences;
      }

      const auto report = json::parse(read_file(entry / "report.json"));
      const auto& paragraphs = report.at("sections").at(0).at("paragraphs");
      std::size_t numbered = 0;
      for (const auto& p : paragraphs) {
        const auto s = p.get<std::string>();
        if (!s.empty() && std::isdigit(static_cast<unsigned char>(s[0]))) ++numbered;
      }
      if (numbered > kReportCap) return fail(entity + " report lists " + std::to_string(numbered) + " instances");
      const auto meta = json::parse(read_file(entry / "meta.json"));
      const auto total = meta.at("total_instances").get<std::size_t>();
      if (total > kReportCap) {
        ++capped;
        const auto note = "Showing 25 of " + std::to_string(total) + " instances.";
        if (numbered != kReportCap || paragraphs.at(0) != note) return fail(entity + " cap note");
      }
    }
  }
  const auto subject = read_file(ws / "campaign/outbox/round3/brand.com/subject.txt");
  if (subject != "Brand safety violation for your domain brand.com\n") return fail("advertiser subject: " + subject);
  if (capped == 0) return fail("no report exceeded the cap; fixture does not exercise it");
  return {true, std::to_string(entries) + " outbox entries, " + std::to_string(sentences) + " sentences verified, " +
                    std::to_string(controls) + " control entities withheld, " + std::to_string(capped) +
                    " reports capped at 25"};
}

// ---- 10 ------------------------------------------------------------------

Outcome determinism() {
  TempDir dir;
  const auto fixture = kFixtures / "campaign";
  darkpool::testing::run_fixture_pipeline(fixture, dir.path() / "run1");
  darkpool::testing::run_fixture_pipeline(fixture, dir.path() / "run2");
  const auto m1 = read_file(dir.path() / "run1/manifest.json");
  const auto m2 = read_file(dir.path() / "run2/manifest.json");
  if (m1 != m2) return fail("manifests differ between runs");
  const auto golden = fixture / "golden_manifest.json";
  if (!fs::exists(golden)) return fail("golden manifest missing");
  if (read_file(golden) != m1) return fail("manifest differs from the checked-in golden manifest");
  const auto n = json::parse(m1).at("artifacts").size();
  return {true, "2 runs byte-identical and equal to the golden manifest (" + std::to_string(n) + " artifacts)"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "Appendix-B end-to-end", 5, appendix_b_end_to_end},
      {2, "Parser conformance corpus", 1, parser_corpus},
      {3, "Pool detection equals pairwise oracle", 60, pool_oracle},
      {4, "Fixpoint termination and coverage", 5, three_level_chain},
      {5, "PM-DiD correctness", 30, pm_did},
      {6, "Nearest-neighbor matching oracle", 10, matching_oracle},
      {7, "t-test sanity", 10, t_test_sanity},
      {8, "HAR evidence", 2, har_evidence},
      {9, "Campaign rendering", 5, campaign_rendering},
      {10, "Determinism", 120, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && secs > c.budget_seconds) o = fail("took longer than the time budget");
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %-40s %7.3fs (budget %gs)  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs,
                c.budget_seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
