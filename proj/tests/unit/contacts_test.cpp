#include "darkpool/contacts.hpp"

#include <gtest/gtest.h>

#include "darkpool/error.hpp"

namespace darkpool {
namespace {

const Clock kClock = fixed_clock(*parse_timestamp("2024-03-01T00:00:00Z"));

CrawlSnapshot snapshot_with_contacts() {
  CrawlSnapshot s;
  auto& ads = s.ads_txt_files["pub.com"];
  ads.variables.push_back({"CONTACT", "adstxt@pub.com", 1});
  ads.variables.push_back({"contact", "https://pub.com/form", 2});
  auto& sellers = s.sellers_json_files["adx.com"];
  sellers.contact_email = "sellers@adx.com";
  return s;
}

TEST(ContactsTest, ExtractsEmailsInDocumentOrder) {
  EXPECT_EQ(extract_emails("write to a.b@x.co.uk or ops-team@y.com."),
            (std::vector<std::string>{"a.b@x.co.uk", "ops-team@y.com"}));
  EXPECT_TRUE(extract_emails("no address here @ all").empty());
}

TEST(ContactsTest, StripTagsDropsScriptsAndDecodesEntities) {
  EXPECT_EQ(extract_emails(strip_tags("<p>mail&#64;site.com</p><script>var x='js@bad.com'</script>")),
            std::vector<std::string>{"mail@site.com"});
}

TEST(ContactsTest, FindsContactLinksAndSkipsMailto) {
  const auto links = find_contact_links(
      R"(<a href="/about">About</a><a href='mailto:x@y.com'>contact</a><a class="n" href="contact-us.html">Reach us</a>)"
      R"(<A HREF="https://other.com/help">Contact</A>)",
      "https://pub.com/index/page.html");
  EXPECT_EQ(links, (std::vector<std::string>{"https://pub.com/index/contact-us.html", "https://other.com/help"}));
}

TEST(ContactsTest, PublisherPrefersAdsTxtThenContactPage) {
  MapTransport t;
  t.add_ok("https://pub.com/", R"(<a href="/contact">Contact</a>)", "text/html");
  t.add_ok("https://pub.com/contact", R"(<p>press@pub.com</p><a href="mailto:ADSTXT@pub.com">x</a>)", "text/html");
  auto d = discover_contacts("www.pub.com", EntityRole::kPublisher, snapshot_with_contacts(), t, nullptr, kClock);
  ASSERT_EQ(d.contacts.size(), 2u);
  EXPECT_EQ(d.contacts[0].email, "adstxt@pub.com");
  EXPECT_EQ(d.contacts[0].source, ContactSource::kAdsTxt);
  EXPECT_EQ(d.contacts[1].email, "press@pub.com");
  EXPECT_EQ(d.contacts[1].source, ContactSource::kContactPage);
  EXPECT_EQ(d.contacts[0].discovered_at, kClock());
}

TEST(ContactsTest, AdNetworkUsesSellersJsonContact) {
  MapTransport t;
  auto d = discover_contacts("adx.com", EntityRole::kAdNetwork, snapshot_with_contacts(), t, nullptr, kClock);
  ASSERT_EQ(d.contacts.size(), 1u);
  EXPECT_EQ(d.contacts[0].source, ContactSource::kSellersJson);
}

TEST(ContactsTest, CommonPrefixesNeedADeliveredProbe) {
  MapTransport t;
  StubProber prober(ProbeOutcome::kBounced, {"support@brand.com"});
  auto d = discover_contacts("brand.com", EntityRole::kAdvertiser, CrawlSnapshot{}, t, &prober, kClock);
  ASSERT_EQ(d.contacts.size(), 1u);
  EXPECT_EQ(d.contacts[0].email, "support@brand.com");
  EXPECT_TRUE(d.contacts[0].verified);
  EXPECT_EQ(prober.probed().size(), std::size(kCommonPrefixes));
}

TEST(ContactsTest, WithoutProberCommonPrefixesAreSkippedAndNothingIsFound) {
  MapTransport t;
  try {
    discover_contacts("brand.com", EntityRole::kAdvertiser, CrawlSnapshot{}, t, nullptr, kClock);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoContactFound);
  }
  ContactRecord r{"brand.com", "info@brand.com", ContactSource::kCommonPrefix, {}, false};
  EXPECT_THROW(probe_deliverability(r, nullptr), Error);
}

TEST(ContactsTest, ContactBookRoundTrips) {
  std::vector<ContactBookRow> rows = {
      {EntityRole::kPublisher, {"pub.com", "a@pub.com", ContactSource::kAdsTxt, {}, false}},
      {EntityRole::kAdvertiser, {"brand.com", "info@brand.com", ContactSource::kCommonPrefix, {}, true}}};
  const auto text = format_contact_book(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), "entity_domain,role,email,source,verified");
  const auto back = parse_contact_book(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].role, EntityRole::kAdvertiser);
  EXPECT_EQ(back[1].record, rows[1].record);
}

}  // namespace
}  // namespace darkpool
