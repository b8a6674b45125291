#include "darkpool/campaign.hpp"

#include <gtest/gtest.h>

#include "darkpool/error.hpp"
#include "darkpool/outbox.hpp"
#include "support/temp_dir.hpp"

namespace darkpool {
namespace {

const Timestamp kT0 = *parse_timestamp("2024-03-01T00:00:00Z");

DarkPoolFinding finding(std::string ad, std::string id, std::optional<std::string> owner,
                        std::vector<std::string> problematic, std::vector<std::string> victims) {
  DarkPoolFinding f;
  f.pool.ad_system_domain = std::move(ad);
  f.pool.seller_id = std::move(id);
  f.pool.owner_domain = std::move(owner);
  for (const auto& p : problematic) f.problematic_members.push_back({p, ProblemCategory::kMisinformation});
  f.victim_members = std::move(victims);
  return f;
}

EvidenceRecord evidence(std::string publisher, std::string ad, std::string id, std::string owner,
                        std::optional<std::string> advertiser = std::nullopt) {
  EvidenceRecord e;
  e.crawled_publisher = std::move(publisher);
  e.issuing_ad_system = std::move(ad);
  e.seller_id = std::move(id);
  e.owner_domain = std::move(owner);
  e.advertiser_domain = std::move(advertiser);
  e.har_path = "hars/" + e.crawled_publisher + ".har";
  return e;
}

std::vector<ContactRecord> contact(const std::string& domain) {
  return {{domain, "abuse@" + domain, ContactSource::kContactPage, {}, false}};
}

TEST(CampaignTest, RoundOneSelectsPopularVictims) {
  const std::vector<DarkPoolFinding> f = {finding("adxa.com", "12345", "publisherc.com", {"a.com"}, {"b.com", "c.com"})};
  EXPECT_EQ(select_recipients(RoundNumber::kPublishers, f, {}, {"c.com", "x.com", "b.com"}),
            (std::vector<std::string>{"b.com", "c.com"}));
  RecipientOptions top2;
  top2.top_k = 2;
  EXPECT_EQ(select_recipients(RoundNumber::kPublishers, f, {}, {"c.com", "x.com", "b.com"}, top2),
            std::vector<std::string>{"c.com"});
}

TEST(CampaignTest, RoundTwoNeedsMoreThanOneDarkPool) {
  const std::vector<DarkPoolFinding> f = {finding("one.com", "1", std::nullopt, {"a.com"}, {"b.com"}),
                                          finding("two.com", "1", std::nullopt, {"a.com"}, {"b.com"}),
                                          finding("two.com", "2", "one.com", {"a.com"}, {"c.com"})};
  EXPECT_EQ(select_recipients(RoundNumber::kAdNetworks, f, {}, {}), std::vector<std::string>{"two.com"});
  RecipientOptions owned;
  owned.ad_network_basis = AdNetworkBasis::kIssuedOrOwned;
  EXPECT_EQ(select_recipients(RoundNumber::kAdNetworks, f, {}, {}, owned),
            (std::vector<std::string>{"one.com", "two.com"}));
}

TEST(CampaignTest, RoundThreeSelectsDistinctAdvertisers) {
  const std::vector<EvidenceRecord> e = {evidence("a.com", "adx.com", "1", "v.com", "brand.com"),
                                         evidence("b.com", "adx.com", "1", "v.com", "brand.com"),
                                         evidence("b.com", "adx.com", "2", "v.com")};
  EXPECT_EQ(select_recipients(RoundNumber::kAdvertisers, {}, e, {}), std::vector<std::string>{"brand.com"});
  EXPECT_THROW(select_recipients(RoundNumber::kAdvertisers, {}, {}, {}), Error);
}

TEST(CampaignTest, GroupsAreBalancedAndReproducible) {
  auto three = assign_groups({"c.com", "a.com", "b.com"}, 42);
  std::set<Group> groups;
  for (const auto& a : three) groups.insert(a.group);
  EXPECT_EQ(groups.size(), 3u);

  std::vector<std::string> ten;
  for (int i = 0; i < 10; ++i) ten.push_back("d" + std::to_string(i) + ".com");
  auto first = assign_groups(ten, 7);
  std::map<Group, int> sizes;
  for (const auto& a : first) ++sizes[a.group];
  EXPECT_EQ(sizes[Group::kT1Academic], 4);
  EXPECT_EQ(sizes[Group::kT2Activist], 3);
  EXPECT_EQ(sizes[Group::kControl], 3);
  auto reversed = ten;
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(assign_groups(reversed, 7), first);
}

TEST(CampaignTest, DifferentSeedsOverlapAboutOneThird) {
  std::vector<std::string> many;
  for (int i = 0; i < 1000; ++i) many.push_back("e" + std::to_string(i) + ".com");
  auto a = assign_groups(many, 1);
  auto b = assign_groups(many, 2);
  std::map<std::string, Group> ga;
  for (const auto& x : a) ga[x.entity_domain] = x.group;
  int same = 0;
  for (const auto& x : b) same += ga[x.entity_domain] == x.group;
  EXPECT_NEAR(same / 1000.0, 1.0 / 3.0, 0.06);
}

TEST(CampaignTest, BoundedRandomStaysInRange) {
  std::mt19937_64 rng(3);
  std::vector<int> counts(7);
  for (int i = 0; i < 7000; ++i) ++counts[bounded_random(rng, 7)];
  for (int c : counts) EXPECT_NEAR(c, 1000, 150);
}

TEST(CampaignTest, AdvertiserPayloadSubjectAndCount) {
  const std::vector<EvidenceRecord> e = {evidence("a.com", "adx.com", "1", "v.com", "brand.com"),
                                         evidence("b.com", "adx.com", "2", "v.com", "brand.com"),
                                         evidence("c.com", "ssp.com", "3", "w.com", "brand.com")};
  auto p = render_notification("brand.com", EntityRole::kAdvertiser, Group::kT2Activist, contact("brand.com"), {}, e);
  EXPECT_EQ(p.subject, "Brand safety violation for your domain brand.com");
  EXPECT_NE(p.body.find("An ad creative associated with your brand was observed on 3 problematic publishers. "
                        "This association could negatively impact your reputation and future business."),
            std::string::npos);
  EXPECT_EQ(p.branding, Branding::kActivist);
  std::set<std::string> kinds;
  for (const auto& a : p.attachments) kinds.insert(a.kind);
  EXPECT_EQ(kinds, (std::set<std::string>{"report", "har"}));
}

TEST(CampaignTest, AdNetworkSentencesFollowIssuedOwnedAndConfirmed) {
  const std::vector<DarkPoolFinding> f = {finding("adx.com", "1", "v1.com", {"a.com"}, {"v1.com"}),
                                          finding("adx.com", "2", "v2.com", {"b.com"}, {"v2.com"}),
                                          finding("ssp.com", "9", "adx.com", {"a.com"}, {"v3.com"})};
  const std::vector<EvidenceRecord> e = {evidence("a.com", "adx.com", "1", "v1.com")};
  auto p = render_notification("adx.com", EntityRole::kAdNetwork, Group::kT1Academic, contact("adx.com"), f, e);
  EXPECT_EQ(p.subject, "Potential ad inventory vulnerability for your domain adx.com");
  EXPECT_NE(p.body.find("2 seller IDs issued by you are being pooled by 2 potentially problematic publishers."),
            std::string::npos);
  EXPECT_NE(p.body.find("1 seller IDs owned by you and issued by another ad-network are being pooled by 1 "
                        "potentially problematic publishers."),
            std::string::npos);
  EXPECT_NE(p.body.find("We confirmed that 1 seller IDs issued by you are being pooled by 1 potentially "
                        "problematic publishers."),
            std::string::npos);
  EXPECT_EQ(p.body.find("We confirmed that 1 seller IDs owned by you"), std::string::npos);
  EXPECT_EQ(p.body.find("<num>"), std::string::npos);
  EXPECT_EQ(p.body.find("<domain>"), std::string::npos);
}

TEST(CampaignTest, VictimPublisherSentences) {
  const std::vector<DarkPoolFinding> f = {finding("adxa.com", "12345", "publisherc.com", {"a.com"}, {"b.com", "c.com"})};
  const std::vector<EvidenceRecord> e = {evidence("a.com", "adxa.com", "12345", "publisherc.com")};
  auto p = render_notification("b.com", EntityRole::kPublisher, Group::kT1Academic, contact("b.com"), f, e);
  EXPECT_NE(p.body.find("During network traffic analysis of problematic publishers, we observed that 1 sellerID(s) "
                        "in your ads.txt are being used by 1 potentially problematic publisher(s) to monetize their "
                        "ad inventory."),
            std::string::npos);
  EXPECT_NE(p.body.find("We observed that 1 sellerID(s) in your ads.txt are being used in ads.txt of at least 1 "
                        "other potentially problematic publishers."),
            std::string::npos);
}

TEST(CampaignTest, RenderErrors) {
  const std::vector<DarkPoolFinding> f = {finding("adx.com", "1", std::nullopt, {"a.com"}, {"b.com"})};
  auto code_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code_of([&] { render_notification("z.com", EntityRole::kPublisher, Group::kT1Academic, contact("z.com"), f, {}); }),
            ErrorCode::kNothingToReport);
  EXPECT_EQ(code_of([&] { render_notification("b.com", EntityRole::kPublisher, Group::kT1Academic, {}, f, {}); }),
            ErrorCode::kMissingContact);
  EXPECT_EQ(code_of([&] { render_notification("b.com", EntityRole::kPublisher, Group::kControl, contact("b.com"), f, {}); }),
            ErrorCode::kControlGroupWithheld);
}

TEST(CampaignTest, ReportCapsInstancesAt25) {
  std::vector<DarkPoolFinding> f;
  for (int i = 0; i < 40; ++i) f.push_back(finding("adx.com", "id" + std::to_string(i), std::nullopt, {"a.com"}, {"b.com"}));
  auto p = render_notification("adx.com", EntityRole::kAdNetwork, Group::kT1Academic, contact("adx.com"), f, {});
  EXPECT_EQ(p.total_instances, 40u);
  ASSERT_EQ(p.report.sections.size(), 3u);
  EXPECT_EQ(p.report.sections[0].heading, "Instances");
  EXPECT_EQ(p.report.sections[0].paragraphs.size(), 26u);  // cap note + 25
  EXPECT_EQ(p.report.sections[1].heading, "Root causes");
  EXPECT_EQ(p.report.sections[2].heading, "Remediation options");
  const auto pdf = render_report_pdf(p.report);
  EXPECT_EQ(pdf.rfind("%PDF-1.4", 0), 0u);
  EXPECT_EQ(render_report_pdf(p.report), pdf);
}

TEST(CampaignTest, ScheduleFollowsOffsetsAndGuardsOverlap) {
  CampaignRound r1{RoundNumber::kPublishers, {"b.com"}, "pre-1", "", std::nullopt, std::nullopt};
  auto plan1 = schedule_round(r1, fixed_clock(kT0));
  EXPECT_EQ(plan1.reminder_at, kT0 + Days{10});
  EXPECT_EQ(plan1.post_window_start, kT0 + Days{28});
  EXPECT_EQ(plan1.post_window_end, kT0 + Days{35});

  CampaignRound r2{RoundNumber::kAdNetworks, {"adx.com"}, "pre-2", "", std::nullopt, std::nullopt};
  EXPECT_THROW(schedule_round(r2, fixed_clock(kT0 + Days{20}), {plan1}), Error);
  auto plan2 = schedule_round(r2, fixed_clock(kT0 + Days{35}), {plan1});
  plan1.post_snapshot_completed_at = kT0 + Days{29};
  EXPECT_NO_THROW(schedule_round(r2, fixed_clock(kT0 + Days{30}), {plan1}));

  CampaignRound r3{RoundNumber::kAdvertisers, {"brand.com"}, "pre-3", "", std::nullopt, std::nullopt};
  auto plan3 = schedule_round(r3, fixed_clock(plan2.post_window_end), {plan1, plan2});
  Timestamp last{};
  for (const auto* p : {&plan1, &plan2, &plan3}) {
    for (const auto& ev : p->events()) {
      EXPECT_GE(ev.at, last);
      last = ev.at;
    }
  }
  CampaignRound no_pre{RoundNumber::kPublishers, {}, "", "", std::nullopt, std::nullopt};
  EXPECT_THROW(schedule_round(no_pre, fixed_clock(kT0)), Error);
  ScheduleOffsets bad;
  bad.reminder = Days{20};
  EXPECT_THROW(schedule_round(r1, fixed_clock(kT0), {}, bad), Error);
}

TEST(OutboxTest, WritesEntriesAndDispatchesDryRun) {
  testing::TempDir dir;
  const std::vector<DarkPoolFinding> f = {finding("adx.com", "1", std::nullopt, {"a.com"}, {"b.com"})};
  auto p = render_notification("b.com", EntityRole::kPublisher, Group::kT1Academic, contact("b.com"), f, {});
  const auto entry = write_outbox_entry(dir.path(), p, "cafe");
  for (auto name : {"subject.txt", "body.txt", "report.pdf", "report.json", "attachments.json", "meta.json"}) {
    EXPECT_TRUE(std::filesystem::exists(entry / name)) << name;
  }
  EXPECT_THROW(write_outbox_entry(dir.path(), p, "cafe"), Error);
  p.group = Group::kControl;
  EXPECT_THROW(write_outbox_entry(dir.path() / "other", p, "cafe"), Error);

  CampaignLedger ledger;
  ledger.record_assignments({{"b.com", Group::kT1Academic, 1, RoundNumber::kPublishers},
                             {"c.com", Group::kControl, 1, RoundNumber::kPublishers}});
  auto summary = dispatch_round(dir.path(), RoundNumber::kPublishers, ledger, nullptr, fixed_clock(kT0));
  EXPECT_EQ(summary.dispatched, std::vector<std::string>{"b.com"});
  const auto* e = ledger.find(RoundNumber::kPublishers, "b.com");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->dispatch_mode, "dry-run");
  EXPECT_EQ(e->reminder_at, kT0 + Days{10});
  EXPECT_TRUE(control_isolation_violations(dir.path(), RoundNumber::kPublishers, ledger).empty());

  RecordingMailTransport mail;
  summary = dispatch_round(dir.path(), RoundNumber::kPublishers, ledger, &mail, fixed_clock(kT0));
  EXPECT_EQ(summary.already_sent, std::vector<std::string>{"b.com"});
  EXPECT_TRUE(mail.sent().empty());

  EXPECT_EQ(ledger.import_open_log("round,entity_domain,responded\n1,b.com,true\n1,zzz.com,false\n"), 1u);
  EXPECT_TRUE(ledger.find(RoundNumber::kPublishers, "b.com")->opened);
  EXPECT_TRUE(ledger.due_reminders(kT0 + Days{11}).empty());

  ledger.save(dir.path() / "ledger.json");
  auto loaded = CampaignLedger::load(dir.path() / "ledger.json");
  EXPECT_EQ(loaded.to_json(), ledger.to_json());
}

TEST(OutboxTest, ControlEntityInOutboxBlocksDispatch) {
  testing::TempDir dir;
  const std::vector<DarkPoolFinding> f = {finding("adx.com", "1", std::nullopt, {"a.com"}, {"b.com"})};
  // Rendered as treated, later recorded as control.
  write_outbox_entry(dir.path(), render_notification("b.com", EntityRole::kPublisher, Group::kT1Academic,
                                                     contact("b.com"), f, {}),
                     "cafe");
  CampaignLedger ledger;
  ledger.record_assignments({{"b.com", Group::kControl, 1, RoundNumber::kPublishers}});
  EXPECT_EQ(control_isolation_violations(dir.path(), RoundNumber::kPublishers, ledger),
            std::vector<std::string>{"b.com"});
  try {
    dispatch_round(dir.path(), RoundNumber::kPublishers, ledger, nullptr, fixed_clock(kT0));
    FAIL() << "dispatch should refuse";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kControlGroupWithheld);
  }
  EXPECT_FALSE(ledger.find(RoundNumber::kPublishers, "b.com")->sent_at);
}

}  // namespace
}  // namespace darkpool
