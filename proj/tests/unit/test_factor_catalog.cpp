#include <gtest/gtest.h>

#include <set>

#include "rasch_assess/factor_catalog.hpp"

using namespace rasch_assess;

TEST(FactorCatalog, DefaultCatalogHas23Factors) {
  const auto catalog = default_catalog();
  EXPECT_EQ(catalog.size(), 23u);
}

TEST(FactorCatalog, DefaultCatalogGroupsMatchPublishedTable) {
  const auto catalog = default_catalog();
  const auto* measurement = catalog.find("measurement-model");
  ASSERT_NE(measurement, nullptr);
  EXPECT_EQ(measurement->name, "Measurement model");
  EXPECT_EQ(measurement->group, FactorGroup::Process);
  const auto* customer = catalog.find("customer-involvement");
  ASSERT_NE(customer, nullptr);
  EXPECT_EQ(customer->group, FactorGroup::Customer);
  EXPECT_EQ(catalog[0].id, "measurement-model");
  EXPECT_EQ(catalog[22].id, "customer-involvement");
}

TEST(FactorCatalog, DefaultCatalogCoversAllSixGroups) {
  std::set<FactorGroup> groups;
  for (const auto& f : default_catalog()) groups.insert(f.group);
  EXPECT_EQ(groups.size(), 6u);
  EXPECT_EQ(kAllGroups.size(), 6u);
}

TEST(FactorCatalog, DefaultCatalogIsDeterministicAndSlugged) {
  const auto a = default_catalog();
  const auto b = default_catalog();
  EXPECT_EQ(a, b);
  for (const auto& f : a) EXPECT_EQ(f.id, slugify(f.name)) << f.name;
  EXPECT_NE(a.find("changes-in-management-style-and-decentralized-decision-making"), nullptr);
  EXPECT_NE(a.find("new-mindset-roles"), nullptr);
}

TEST(FactorCatalog, SlugifyCollapsesRuns) {
  EXPECT_EQ(slugify("New mindset/roles"), "new-mindset-roles");
  EXPECT_EQ(slugify("  Tool -- set!! "), "tool-set");
  EXPECT_EQ(slugify("A/B"), "a-b");
}

TEST(FactorCatalog, ParseGroupIsCaseInsensitive) {
  EXPECT_EQ(parse_group("process"), FactorGroup::Process);
  EXPECT_EQ(parse_group("TOOLS"), FactorGroup::Tools);
  EXPECT_FALSE(parse_group("Finance").has_value());
}

TEST(LoadCatalog, MinimalInput) {
  const auto catalog = load_catalog("id,group,name\nf1,Process,Measurement model");
  ASSERT_EQ(catalog.size(), 1u);
  EXPECT_EQ(catalog[0].id, "f1");
  EXPECT_EQ(catalog[0].group, FactorGroup::Process);
}

TEST(LoadCatalog, DuplicateIdNamesIdAndLine) {
  try {
    load_catalog("id,group,name\nf1,Process,A\nf1,Team,B\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.findings().size(), 1u);
    EXPECT_EQ(e.findings()[0].line, 3u);
    EXPECT_NE(e.findings()[0].message.find("'f1'"), std::string::npos);
  }
}

TEST(LoadCatalog, UnknownGroupNamesValueAndLine) {
  try {
    load_catalog("id,group,name\nf1,Finance,A\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.findings()[0].line, 2u);
    EXPECT_NE(e.findings()[0].message.find("Finance"), std::string::npos);
  }
}

TEST(LoadCatalog, BlankFieldsRejected) {
  EXPECT_THROW(load_catalog("id,group,name\n,Process,A\n"), ValidationError);
  EXPECT_THROW(load_catalog("id,group,name\nf1,Process,\n"), ValidationError);
  EXPECT_THROW(load_catalog("id,group,name\nf1,,A\n"), ValidationError);
  EXPECT_THROW(load_catalog("id,group,name\nf1,Process\n"), ValidationError);
  EXPECT_THROW(load_catalog("name,group,id\nf1,Process,A\n"), ValidationError);
}

TEST(LoadCatalog, QuotedFieldsAndCrlf) {
  const auto catalog = load_catalog("id,group,name\r\nf1,team,\"Trust, and \"\"respect\"\"\"\r\n");
  ASSERT_EQ(catalog.size(), 1u);
  EXPECT_EQ(catalog[0].name, "Trust, and \"respect\"");
  EXPECT_EQ(catalog[0].group, FactorGroup::Team);
}

TEST(LoadCatalog, RoundTripsDefaultCatalog) {
  const auto catalog = default_catalog();
  EXPECT_EQ(load_catalog(serialize_catalog(catalog)), catalog);
}

TEST(LoadCatalog, RoundTripsCatalogsWithAwkwardNames) {
  // property: serialize then load is the identity for any valid catalog
  const std::vector<std::string> names = {"a,b", "say \"hi\"", "plain", "x\ny", "trailing "};
  for (std::size_t mask = 1; mask < (1u << names.size()); ++mask) {
    std::vector<SuccessFactor> factors;
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (mask & (1u << k)) {
        factors.push_back({"id" + std::to_string(k), names[k], kAllGroups[k % kAllGroups.size()]});
      }
    }
    FactorCatalog catalog(factors);
    EXPECT_EQ(load_catalog(serialize_catalog(catalog)), catalog) << mask;
  }
}
