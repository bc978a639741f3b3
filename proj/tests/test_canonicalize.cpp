#include <doctest.h>

#include "paraudit/canonicalize.hpp"
#include "test_util.hpp"

using namespace paraudit;

TEST_CASE("brand normalization golden cases") {
  BrandNormalizer norm;
  SUBCASE("accepted tokens") {
    CHECK(norm.canonical_brand("HubSpot").token == "hubspot");
    CHECK(norm.canonical_brand("Sales-Force!").token == "salesforce");
    CHECK(norm.canonical_brand("Zoho CRM").token == "zohocrm");
    CHECK(norm.canonical_brand("  Pipedrive  ").token == "pipedrive");
    CHECK(norm.canonical_brand("monday.com").token == "mondaycom");
    CHECK(norm.canonical_brand("K6").token == "k6");
    CHECK(norm.canonical_brand("G2").token == "g2");
    CHECK(norm.canonical_brand("EY").token == "ey");
    CHECK(norm.canonical_brand("BP").token == "bp");
    CHECK(norm.canonical_brand("3M company").token == "3mcompany");
  }
  SUBCASE("rejections") {
    CHECK(norm.canonical_brand("Up").rejected == BrandReject::stoplist);
    CHECK(norm.canonical_brand("Pro").rejected == BrandReject::stoplist);
    CHECK(norm.canonical_brand("CLOUD").rejected == BrandReject::stoplist);
    CHECK(norm.canonical_brand("ab").rejected == BrandReject::too_short);
    CHECK(norm.canonical_brand("X").rejected == BrandReject::too_short);
    CHECK(norm.canonical_brand("").rejected == BrandReject::empty);
    CHECK(norm.canonical_brand("!!!").rejected == BrandReject::empty);
  }
  SUBCASE("unicode compatibility fold") {
    CHECK(norm.canonical_brand("Café Brands").token == "cafebrands");
    CHECK(norm.canonical_brand("MünchenSoft").token == "munchensoft");
    CHECK(norm.canonical_brand("Ｚｏｈｏ").token == "zoho");
  }
}

TEST_CASE("fullwidth fold hits the stoplist like its ASCII twin") {
  BrandNormalizer norm;
  // fullwidth "Pro" folds to "pro" and is stoplisted
  CHECK(norm.canonical_brand("Ｐｒｏ").rejected == BrandReject::stoplist);
}

TEST_CASE("idempotence: accepted tokens canonicalize to themselves") {
  BrandNormalizer norm;
  for (const char* raw : {"HubSpot", "Sales-Force!", "Zoho CRM", "G2", "K6", "Notion"}) {
    CanonicalBrand c = norm.canonical_brand(raw);
    REQUIRE(c.accepted());
    CHECK(norm.canonical_brand(c.token).token == c.token);
  }
}

TEST_CASE("case and punctuation insensitivity") {
  BrandNormalizer norm;
  CHECK(norm.canonical_brand("HUBSPOT").token == norm.canonical_brand("hub-spot").token);
  CHECK(norm.canonical_brand("Sales force").token == norm.canonical_brand("SALESFORCE").token);
}

TEST_CASE("allowlist exactness: only the four known short brands pass at length 2") {
  BrandNormalizer norm;
  for (const std::string& ok : {"g2", "ey", "k6", "bp"})
    CHECK(norm.canonical_brand(ok).accepted());
  // every other length-2 alphanumeric token is rejected
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  int accepted = 0;
  for (char a : alphabet)
    for (char b : alphabet)
      if (norm.canonical_brand(std::string{a, b}).accepted()) ++accepted;
  CHECK(accepted == 4);
}

TEST_CASE("custom stoplist and allowlist from files") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("stop.txt"), "acme\n");
  testutil::write_file(dir.file("allow.txt"), "zz\n");
  BrandNormalizer norm(load_token_file(dir.file("stop.txt")),
                       load_token_file(dir.file("allow.txt")));
  CHECK(norm.canonical_brand("ACME").rejected == BrandReject::stoplist);
  CHECK(norm.canonical_brand("zz").token == "zz");
  CHECK(norm.canonical_brand("Cloud").token == "cloud");  // default stoplist replaced
  CHECK(norm.canonical_brand("Up").rejected == BrandReject::too_short);  // length still applies
}

TEST_CASE("stoplist hash is stable and order-insensitive") {
  BrandNormalizer a({"x", "y"}, {});
  BrandNormalizer b({"y", "x"}, {});
  BrandNormalizer c({"x", "z"}, {});
  CHECK(a.stoplist_hash() == b.stoplist_hash());
  CHECK(a.stoplist_hash() != c.stoplist_hash());
}

TEST_CASE("domain collapse golden cases") {
  PublicSuffixList psl;
  CHECK(psl.canonical_domain("https://www.hubspot.com/pricing") == "hubspot.com");
  CHECK(psl.canonical_domain("https://blog.example.co.uk/post") == "example.co.uk");
  CHECK(psl.canonical_domain("http://a.b.c.example.com") == "example.com");
  CHECK(psl.canonical_domain("https://EXAMPLE.COM/") == "example.com");
  CHECK(psl.canonical_domain("https://example.com:8443/x?q=1") == "example.com");
  CHECK(psl.canonical_domain("https://user:pw@example.de/y") == "example.de");
  CHECK(psl.canonical_domain("https://news.shop.example.com.au/") == "example.com.au");
  // unknown TLD falls back to the implicit single-label rule
  CHECK(psl.canonical_domain("https://foo.bar.unknowntld") == "bar.unknowntld");
  // wildcard *.ck with !www.ck exception
  CHECK(psl.canonical_domain("https://www.ck/") == "www.ck");
  CHECK(psl.canonical_domain("https://shop.anything.ck/") == "shop.anything.ck");
}

TEST_CASE("domain collapse error cases") {
  PublicSuffixList psl;
  CHECK_THROWS_AS(psl.canonical_domain("not a url"), ValidationError);
  CHECK_THROWS_AS(psl.canonical_domain("https://192.168.0.1/x"), ValidationError);
  CHECK_THROWS_AS(psl.canonical_domain("https://[::1]/x"), ValidationError);
  CHECK_THROWS_AS(psl.canonical_domain("https://co.uk/"), ValidationError);
  CHECK_THROWS_AS(psl.canonical_domain("https://com/"), ValidationError);
}

TEST_CASE("domain collapse is stable under subdomain prefixing") {
  PublicSuffixList psl;
  for (const char* url : {"https://hubspot.com/", "https://blog.example.co.uk/"}) {
    std::string d = psl.canonical_domain(url);
    CHECK(psl.canonical_domain("https://sub.extra." + d + "/path") == d);
  }
}

TEST_CASE("public suffix snapshot can be overridden from file") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("psl.dat"), "// tiny\nexample\n");
  PublicSuffixList psl = PublicSuffixList::from_file(dir.file("psl.dat"));
  CHECK(psl.canonical_domain("https://foo.example/") == "foo.example");
}
