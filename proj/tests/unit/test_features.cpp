#include <gtest/gtest.h>

#include "optlaws/error.hpp"
#include "optlaws/features.hpp"

using namespace optlaws;

TEST(MarkerPolicy, DefaultRule) {
  const PolicyRule rule;
  const MarkerPolicy p = rule.apply({2.0, 5.0, 8.0});
  EXPECT_EQ(p.a_c1, 2.0);
  EXPECT_EQ(p.a_c2, 8.0);
  EXPECT_EQ(p.a_e1, 5.0);
  EXPECT_EQ(p.a_e2, 5.0);

  const MarkerPolicy tri = rule.apply({2.0, 2.0, 2.0});
  EXPECT_EQ(tri.a_c1, 2.0);
  EXPECT_EQ(tri.a_c2, 2.0);
  EXPECT_EQ(tri.a_e1, 2.0);

  const MarkerPolicy wsd = rule.apply({1.0, 1.0, 7.0});
  EXPECT_EQ(wsd.a_c1, 1.0);
  EXPECT_EQ(wsd.a_c2, 7.0);
  EXPECT_EQ(wsd.a_e1, 1.0);
  EXPECT_EQ(wsd.a_e2, 1.0);
}

TEST(MarkerPolicy, ParseAndPrint) {
  EXPECT_EQ(PolicyRule::parse("a1/a3/a2").to_string(), "a1/a3/a2");
  EXPECT_EQ(PolicyRule::parse("a2/a3/a1").to_string(), "a2/a3/a1");
  EXPECT_THROW(PolicyRule::parse("a1/a4/a2"), InvalidArgument);
  EXPECT_THROW(PolicyRule::parse("a1-a3-a2"), InvalidArgument);
  EXPECT_THROW((MarkerPolicy{3.0, 2.0, 1.0, 1.0}.validate(10.0)), InvalidArgument);
}

TEST(Features, ConstantWithCooldownConvergenceEntry) {
  // a1 = 2, a2 = 8, h = 0.4, S = 10 with the constant phase folded in.
  const Schedule s = Schedule::general(0.4, 0.4, {2.0, 2.0, 8.0}, 10.0);
  MarkerPolicy p{2.0, 2.0, 2.0, 2.0};
  const FeatureVector fv = compute_features(s, p, 10.0, 1.0, PowerSet::reference());
  EXPECT_NEAR(fv[1], 1.0 / (0.4 * 14.0 / 2.0), 1e-15);
}

TEST(Features, ZeroPowersGiveOnes) {
  const Schedule s = Schedule::general(1.0, 0.5, {2.0, 4.0, 6.0}, 10.0);
  PowerSet zero;
  const FeatureVector fv = compute_features(s, PolicyRule{}.apply(s.markers()), 10.0, 2.0, zero);
  for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_EQ(fv[i], 1.0) << i;
}

TEST(Features, ZeroWarmupIsDomainErrorNamingTerm) {
  const Schedule s = Schedule::general(1.0, 1.0, {0.0, 0.0, 5.0}, 10.0);
  try {
    compute_features(s, PolicyRule{}.apply(s.markers()), 10.0, 1.0, PowerSet::reference());
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("inv_warmup_eta"), std::string::npos) << e.what();
  }
}

TEST(Features, NamesAndSpans) {
  const auto names = feature_names();
  EXPECT_EQ(names.size(), 16u);
  EXPECT_EQ(names[15], "one");
  const Schedule s = Schedule::general(1.0, 0.5, {2.0, 4.0, 6.0}, 10.0);
  const FeatureVector fv =
      compute_features(s, PolicyRule{}.apply(s.markers()), 10.0, 2.0, PowerSet::reference());
  EXPECT_EQ(fv.convergence().size(), 4u);
  EXPECT_EQ(fv.escape().size(), 4u);
  EXPECT_EQ(fv.mixed().size(), 4u);
  EXPECT_EQ(fv.bias().size(), 4u);
  EXPECT_EQ(fv.bias()[3], 1.0);
}

TEST(Features, CompactTermSet) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    EXPECT_TRUE(term_active(TermSet::full, i));
    EXPECT_EQ(term_active(TermSet::compact, i), i < 4 || i >= 8);
  }
  EXPECT_EQ(term_set_from_string("compact"), TermSet::compact);
  EXPECT_THROW(term_set_from_string("tiny"), InvalidArgument);
}

TEST(Features, HorizonMustMatchSchedule) {
  const Schedule s = Schedule::general(1.0, 0.5, {2.0, 4.0, 6.0}, 10.0);
  EXPECT_THROW(compute_features(s, PolicyRule{}.apply(s.markers()), 9.0, 1.0,
                                PowerSet::reference()),
               InvalidArgument);
  EXPECT_THROW(compute_features(s, PolicyRule{}.apply(s.markers()), 10.0, 0.0,
                                PowerSet::reference()),
               InvalidArgument);
}
