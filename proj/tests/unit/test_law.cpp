#include <gtest/gtest.h>

#include <random>

#include "optlaws/error.hpp"
#include "optlaws/law.hpp"
#include "oracle.hpp"

using namespace optlaws;

namespace {

const Normalizer kNorm;

// Runs whose log-loss is exactly c·F, with F from the quadrature oracle.
std::vector<RunRecord> planted_runs(const std::array<double, 16>& c, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RunRecord> runs;
  for (int i = 0; i < n; ++i) {
    RunRecord r;
    r.model = 0.2 + 5.0 * u(gen);
    r.tokens = 10.0 + 200.0 * u(gen);
    r.eta1 = 2e-4 + 2e-3 * u(gen);
    const bool decay = u(gen) < 0.5;
    r.eta2 = decay ? r.eta1 * (0.2 + 0.7 * u(gen)) : r.eta1;
    const double a1 = 0.05 + 0.05 * r.tokens * u(gen);
    const double a2 = decay ? a1 + 0.1 * r.tokens * u(gen) + 0.01 : a1;
    const double a3 = a2 + (r.tokens - a2) * 0.9 * u(gen);
    r.markers = {a1, a2, a3};
    const auto f = oracle::features(r.model, r.tokens, kNorm.rate(r.eta1), kNorm.rate(r.eta2),
                                    a1, a2, a3);
    r.loss = std::exp(oracle::dot(c, f));
    runs.push_back(r);
  }
  return runs;
}

std::array<double, 16> table_c() { return oracle::kTableC; }

}  // namespace

TEST(Fit, RecoversPlantedCoefficients) {
  const auto runs = planted_runs(table_c(), 80, 3);
  const FittedLaw law = fit(runs);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(law.c[i], table_c()[i], 1e-6) << i;
  EXPECT_LE(law.residual_rms, 1e-10);
  EXPECT_EQ(law.rows, 80u);
  EXPECT_GT(law.condition_number, 1.0);
}

TEST(Fit, SkipsDivergentRowsAndRejectsEmptyDesign) {
  auto runs = planted_runs(table_c(), 40, 5);
  RunRecord bad = runs.front();
  bad.diverged = true;
  bad.loss = kDivergedLoss;
  runs.push_back(bad);
  EXPECT_EQ(fit(runs).rows, 40u);

  std::vector<RunRecord> all_bad(20, bad);
  try {
    fit(all_bad);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no fittable rows"), std::string::npos);
  }
}

TEST(Fit, NeedsMoreRowsThanTerms) {
  const auto runs = planted_runs(table_c(), 16, 6);
  EXPECT_THROW(fit(runs), DataError);
  EXPECT_NO_THROW(fit(planted_runs(table_c(), 17, 6)));
}

TEST(Fit, RankDeficientDesignReportsCondition) {
  // Every row shares the same schedule shape and horizon, so most columns are constant.
  auto runs = planted_runs(table_c(), 30, 8);
  for (auto& r : runs) {
    r.tokens = 50.0;
    r.eta1 = r.eta2 = 1e-3;
    r.markers = {1.0, 1.0, 20.0};
  }
  try {
    fit(runs);
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_GT(e.condition_number(), 1e12);
  }
}

TEST(Fit, OlsOptimality) {
  auto runs = planted_runs(table_c(), 60, 9);
  std::mt19937_64 gen(10);
  std::normal_distribution<double> noise(0.0, 1e-3);
  for (auto& r : runs) r.loss *= std::exp(noise(gen));
  const FittedLaw law = fit(runs);
  auto sse = [&](const FittedLaw& l) {
    double s = 0.0;
    for (const auto& r : runs) {
      const double e = std::log(r.loss) - predict(l, config_from_run(r)).log_loss;
      s += e * e;
    }
    return s;
  };
  const double base = sse(law);
  for (std::size_t i = 0; i < 16; ++i) {
    for (double d : {-1e-3, 1e-3}) {
      FittedLaw p = law;
      p.c[i] += d;
      EXPECT_GE(sse(p), base) << "coefficient " << i;
    }
  }
}

TEST(Fit, CompactModeFitsTwelveTerms) {
  std::array<double, 16> c = table_c();
  for (int i = 4; i < 8; ++i) c[i] = 0.0;
  FitOptions opts;
  opts.terms = TermSet::compact;
  const FittedLaw law = fit(planted_runs(c, 40, 11), opts);
  for (int i = 4; i < 8; ++i) EXPECT_EQ(law.c[i], 0.0);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(law.c[i], c[i], 1e-6);
}

TEST(Predict, ConstantModel) {
  FittedLaw law;
  law.c.fill(0.0);
  law.c[15] = 0.7;
  for (const auto& r : planted_runs(table_c(), 5, 12))
    EXPECT_NEAR(predict(law, config_from_run(r)).loss, std::exp(0.7), 1e-15);
}

TEST(Predict, InSampleMatchesLoss) {
  const auto runs = planted_runs(table_c(), 40, 13);
  const FittedLaw law = fit(runs);
  for (const auto& r : runs)
    EXPECT_NEAR(predict(law, config_from_run(r)).log_loss, std::log(r.loss), 1e-9);
}

TEST(Predict, ReferenceLawIsFlagged) {
  const FittedLaw ref = FittedLaw::reference();
  EXPECT_TRUE(ref.reference_only);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(ref.c[i], oracle::kTableC[i]);
    EXPECT_EQ(ref.powers[i], oracle::kTablePowers[i]);
  }
}

TEST(Rank, OrdersSurvivorsThenGated) {
  const FittedLaw law = FittedLaw::reference();
  std::vector<Config> configs{
      {Schedule::general(0.0667, 0.0667, {0.5, 0.5, 30.0}, 50.0), 1.2, "wsd"},
      {Schedule::general(0.6, 0.6, {0.05, 0.05, 0.05}, 50.0), 1.2, "hot"},
      {Schedule::general(0.0667, 0.0667, {0.5, 0.5, 0.5}, 50.0), 1.2, "linear"},
  };
  const auto ranked = rank(law, configs);
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked.back().label, "hot");
  EXPECT_TRUE(ranked.back().gate.diverged());
  EXPECT_LE(ranked[0].prediction.log_loss, ranked[1].prediction.log_loss);
  EXPECT_THROW(rank(law, std::span<const Config>{}), InvalidArgument);
  const auto single = rank(law, std::span(configs).first(1));
  ASSERT_EQ(single.size(), 1u);
}

TEST(Rank, TiesBreakBySmallerPeakThenWarmupThenOrder) {
  FittedLaw law;
  law.c.fill(0.0);
  std::vector<Config> configs{
      {Schedule::general(0.08, 0.08, {2.0, 2.0, 2.0}, 50.0), 1.0, "b"},
      {Schedule::general(0.05, 0.05, {3.0, 3.0, 3.0}, 50.0), 1.0, "c"},
      {Schedule::general(0.05, 0.05, {1.0, 1.0, 1.0}, 50.0), 1.0, "d"},
      {Schedule::general(0.05, 0.05, {1.0, 1.0, 1.0}, 50.0), 1.0, "e"},
  };
  const auto ranked = rank(law, configs);
  std::string order;
  for (const auto& e : ranked) order += e.label;
  EXPECT_EQ(order, "decb");
}

TEST(Rank, BiasShiftLeavesOrderUnchanged) {
  FittedLaw law = FittedLaw::reference();
  std::vector<Config> configs;
  for (double a3 : {5.0, 20.0, 35.0, 45.0})
    configs.push_back({Schedule::general(0.0667, 0.0667, {0.5, 0.5, a3}, 50.0), 1.2, ""});
  const auto before = rank(law, configs);
  law.c[15] += 0.37;
  const auto after = rank(law, configs);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    EXPECT_EQ(before[i].index, after[i].index);
    EXPECT_NEAR(after[i].prediction.log_loss - before[i].prediction.log_loss, 0.37, 1e-12);
  }
}

TEST(Continual, EmptyPretrainWithUnitTailPeakMatchesPretrain) {
  const FittedLaw pre = FittedLaw::reference();
  const FittedLaw cont = pre.with_mode(LawMode::continual);
  const Config cfg{Schedule::general(1.0, 1.0, {2.0, 2.0, 30.0}, 50.0), 1.2, ""};
  const Schedule pre_sched = Schedule::general(1.0, 1.0, {1.0, 1.0, 1.0}, 10.0);
  const FeatureVector a = law_features(pre, cfg);
  const FeatureVector b = continual_features(cont, pre_sched, 0.0, cfg);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(a[i], b[i]) << i;

  const FeatureVector c = continual_features(cont, pre_sched, 10.0, cfg);
  EXPECT_NE(a[0], c[0]);
  for (std::size_t i : {1u, 2u, 4u, 5u, 6u, 7u, 9u, 11u, 12u, 13u, 14u, 15u})
    EXPECT_DOUBLE_EQ(a[i], c[i]) << i;
}

TEST(Continual, SettingTwoMatchesClosedForm) {
  const double step = 2048.0 * 2048.0 / 1e9;
  const double h1 = 1.2e-3 / 1.5e-2, h2 = 6e-4 / 1.5e-2, h_pre = 1e-3 / 1.5e-2;
  const double a1 = 1200 * step, a2 = 7000 * step, a3 = 13000 * step;
  const double S = 100.0, N = 4.05, S_pre = 300.0, a_pre = 500 * step;
  const Schedule pre = Schedule::general(h_pre, h_pre, {a_pre, a_pre, a_pre}, S_pre);
  const Config cfg{Schedule::general(h1, h2, {a1, a2, a3}, S), N, ""};
  const FittedLaw law = FittedLaw::reference().with_mode(LawMode::continual);
  const FeatureVector fv = continual_features(law, pre, S_pre, cfg);

  const double warm = S_pre * h_pre / 2.0 + a1 * h1 / 2.0;
  const double tail = (S - a3) * h2 / 2.0;
  const double tail_d = h2 * h2 / (S - a3) / std::pow(h2, 4);
  const double warm_d = h1 * h1 / a1 + (h1 - h2) * (h1 - h2) / (a2 - a1);
  EXPECT_NEAR(fv[0], 1.0 / warm, 1e-14);
  EXPECT_NEAR(fv[1], 1.0 / tail, 1e-14);
  EXPECT_NEAR(fv[3], std::pow(warm * tail, -0.23), 1e-14);
  EXPECT_NEAR(fv[4], tail_d, 1e-12 * tail_d);
  EXPECT_NEAR(fv[5], std::pow(warm_d, 0.25), 1e-14);
  EXPECT_NEAR(fv[8], std::pow(tail_d / warm, 0.2), 1e-13);
  EXPECT_NEAR(fv[14], std::pow(h1, 0.2), 1e-15);
}

TEST(Continual, ReferenceLawOrdersThreeSettings) {
  // Expected ordering of the settings: 1 > 2 > 3.
  const double step = 2048.0 * 2048.0 / 1e9;
  auto r = [](double x) { return x / 1.5e-2; };
  const Schedule pre = Schedule::general(r(1e-3), r(1e-3), {500 * step, 500 * step, 500 * step},
                                         300.0);
  const PretrainContext ctx{pre};
  const FittedLaw law = FittedLaw::reference().with_mode(LawMode::continual);
  const std::vector<Config> settings{
      {Schedule::general(r(1e-3), r(5e-4), {5000 * step, 10000 * step, 15000 * step}, 100.0),
       4.05, "1"},
      {Schedule::general(r(1.2e-3), r(6e-4), {1200 * step, 7000 * step, 13000 * step}, 100.0),
       4.05, "2"},
      {Schedule::general(r(1e-3), r(1e-3), {2000 * step, 2000 * step, 2000 * step}, 100.0), 1.90,
       "3"},
  };
  const double l1 = predict(law, settings[0], &ctx).loss;
  const double l2 = predict(law, settings[1], &ctx).loss;
  const double l3 = predict(law, settings[2], &ctx).loss;
  EXPECT_GT(l1, l2);
  EXPECT_GT(l2, l3);
  EXPECT_THROW(predict(law, settings[0]), InvalidArgument);
}

TEST(Continual, ZeroTailPeakIsDomainError) {
  const FittedLaw law = FittedLaw::reference().with_mode(LawMode::continual);
  const Schedule pre = Schedule::constant(1.0, 5.0);
  const Config cfg{Schedule({{SegmentKind::linear, 0.0, 2.0, 0.0, 1.0},
                             {SegmentKind::linear, 2.0, 4.0, 1.0, 0.0},
                             {SegmentKind::constant, 4.0, 10.0, 0.0, 0.0}},
                            {2.0, 4.0, 4.0}),
                   1.0, ""};
  EXPECT_THROW(continual_features(law, pre, 5.0, cfg), DomainError);
}

TEST(Sweep, WarmupMajorWithSentinel) {
  const FittedLaw law = FittedLaw::reference();
  const std::vector<double> etas{0.05, 0.6};
  const std::vector<double> warmups{0.3, 5.0};
  const auto cells = sweep_grid(law, {}, etas, warmups, 4.05, 100.0);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].warmup, 0.3);
  EXPECT_EQ(cells[1].warmup, 0.3);
  EXPECT_EQ(cells[1].eta_max, 0.6);
  EXPECT_TRUE(cells[1].gated);
  EXPECT_EQ(cells[1].loss, kDivergedLoss);
  EXPECT_FALSE(cells[0].gated);
  const auto one = sweep_grid(law, {}, std::span(etas).first(1), std::span(warmups).first(1),
                              4.05, 100.0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_FALSE(one[0].gated);
  EXPECT_THROW(sweep_grid(law, {}, {}, warmups, 4.05, 100.0), InvalidArgument);
  const auto custom = sweep_grid(law, {}, etas, warmups, 4.05, 100.0, 9.0);
  EXPECT_EQ(custom[1].loss, 9.0);
}

TEST(SimpleLawTest, ClosedFormsMatchDirectEvaluation) {
  SimpleLaw law{1.1, 0.7, 0.3, 0.5, 0.9, 0.8, 1.2, 0.6, 0.7, 0.05};
  for (double S : {10.0, 100.0, 1000.0}) {
    const double a = 0.05 * S, ac = 0.7 * S;
    const Schedule cos = Schedule::warmup_cooldown(1.3, a, S, CooldownShape::cosine);
    const Schedule cst = Schedule::warmup_constant_cooldown(1.3, a, ac, S);
    EXPECT_NEAR(simple_law_cosine(law, 0.05, S, 1.3), simple_law_eval(law, cos, a, S), 1e-12);
    EXPECT_NEAR(simple_law_constant(law, 0.05, 0.7, S, 1.3), simple_law_eval(law, cst, a, S),
                1e-12);
    EXPECT_NEAR(prop1_gap(law, 0.05, 0.7, S, 1.3),
                std::abs(simple_law_eval(law, cos, a, S) - simple_law_eval(law, cst, a, S)),
                1e-12);
  }
}

TEST(SimpleLawTest, NoConstantPhaseFavoursLinear) {
  const SimpleLaw law;
  for (double S : {10.0, 1e3, 1e5})
    EXPECT_GT(simple_law_cosine(law, 0.1, S), simple_law_constant(law, 0.1, 0.1, S));
}

TEST(SimpleLawTest, GapVanishesWithHorizon) {
  const SimpleLaw law;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 2; k <= 8; ++k) {
    const double g = prop1_gap(law, 0.01, 0.85, std::pow(10.0, k));
    EXPECT_TRUE(std::isfinite(g));
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_LT(prop1_gap(law, 0.01, 0.85, 1e8), 1e-2 * prop1_gap(law, 0.01, 0.85, 1e2));
}

TEST(SimpleLawTest, RejectsNonPositiveConstants) {
  SimpleLaw law;
  law.c4 = 0.0;
  EXPECT_THROW(simple_law_cosine(law, 0.1, 10.0), InvalidArgument);
  EXPECT_THROW(prop1_gap(SimpleLaw{}, 0.5, 0.2, 10.0), InvalidArgument);
}
