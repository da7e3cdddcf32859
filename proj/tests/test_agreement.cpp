#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "suspense/agreement.hpp"

using namespace suspense;

namespace {

oracle::Level to_oracle(AgreementLevel l) {
  switch (l) {
    case AgreementLevel::nominal: return oracle::Level::nominal;
    case AgreementLevel::ordinal: return oracle::Level::ordinal;
    case AgreementLevel::interval: return oracle::Level::interval;
  }
  return oracle::Level::ordinal;
}

std::vector<Unit> toy_table() { return {{0, 0}, {1, 1}, {3, 3}, {4, 4}}; }

}  // namespace

TEST(Krippendorff, PerfectAgreement) {
  for (auto level : {AgreementLevel::nominal, AgreementLevel::ordinal, AgreementLevel::interval})
    EXPECT_DOUBLE_EQ(krippendorff_alpha(toy_table(), level), 1.0);
}

TEST(Krippendorff, Degenerate) {
  try {
    krippendorff_alpha({{1}, {2}, {3}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateData);
  }
  EXPECT_THROW(krippendorff_alpha({{2, 2}, {2, 2, 2}}), Error);
}

TEST(Krippendorff, ToyTableMatchesPairEnumeration) {
  const std::vector<Unit> t{{0, 1}, {2, 2}, {3, 4}, {4, 4}};
  for (auto level : {AgreementLevel::nominal, AgreementLevel::ordinal, AgreementLevel::interval})
    EXPECT_NEAR(krippendorff_alpha(t, level), oracle::pairwise_alpha(t, to_oracle(level), 5), 1e-12);
}

TEST(Krippendorff, NominalTextbookValue) {
  // Two coders, ten units, categories a/b: 1 - D_o/D_e with n = 20.
  const std::vector<Unit> t{{0, 0}, {0, 1}, {1, 1}, {1, 1}, {0, 0}, {0, 0}, {1, 0}, {1, 1}, {0, 0}, {1, 1}};
  // 2 disagreeing units; n_a = n_b = 10.
  const double d_o = 4.0 / 20.0;
  const double d_e = 2.0 * 10.0 * 10.0 / (20.0 * 19.0);
  EXPECT_NEAR(krippendorff_alpha(t, AgreementLevel::nominal), 1.0 - d_o / d_e, 1e-12);
}

TEST(Krippendorff, RandomTablesMatchOracle) {
  std::mt19937_64 gen(23);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Unit> units(2 + gen() % 10);
    for (auto& u : units) {
      u.resize(gen() % 5);
      for (auto& v : u) v = gen() % 5;
    }
    const auto level = static_cast<AgreementLevel>(gen() % 3);
    try {
      const double a = krippendorff_alpha(units, level);
      EXPECT_NEAR(a, oracle::pairwise_alpha(units, to_oracle(level), 5), 1e-9);
      EXPECT_LE(a, 1.0 + 1e-12);
      ++checked;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DegenerateData);
    }
  }
  EXPECT_GT(checked, 200);
}

TEST(Krippendorff, PerturbationLowersAlpha) {
  auto t = toy_table();
  t[1][1] = 2;
  EXPECT_LT(krippendorff_alpha(t), 1.0);
  auto u = t;
  u[2][0] = 1;
  EXPECT_LT(krippendorff_alpha(u), krippendorff_alpha(t));
}

TEST(Screening, Thresholds) {
  std::map<std::string, AnnotatorStats> stats;
  stats["fast"] = {0.9, 500.0, 1};
  stats["noisy"] = {0.34, 900.0, 1};
  stats["good"] = {0.5, 800.0, 1};
  stats["unknown"] = {std::nullopt, std::nullopt, 1};
  EXPECT_EQ(screen_annotators(stats), (std::vector<std::string>{"fast", "noisy"}));
  EXPECT_TRUE(screen_annotators(stats, {0.0, 0.0}).empty());
}

TEST(AnnotatorAgreement, PerfectAndOutlier) {
  using L = RelativeLabel;
  const std::vector<L> base{L::Same, L::Increase, L::BigIncrease, L::Decrease, L::Same, L::BigDecrease};
  std::vector<L> off = base;
  std::reverse(off.begin(), off.end());
  std::vector<AnnotationSet> sets{{"s", "a", base, 900.0}, {"s", "b", base, 700.0}, {"s", "c", off, 550.0}};
  const auto stats = annotator_agreement(sets);
  ASSERT_EQ(stats.size(), 3u);
  EXPECT_GT(*stats.at("a").mean_alpha, *stats.at("c").mean_alpha);
  EXPECT_DOUBLE_EQ(*stats.at("c").mean_rt_ms, 550.0);
  const auto flagged = screen_annotators(stats);
  EXPECT_NE(std::find(flagged.begin(), flagged.end(), "c"), flagged.end());

  std::vector<AnnotationSet> same{{"s", "a", base, {}}, {"s", "b", base, {}}};
  EXPECT_DOUBLE_EQ(*annotator_agreement(same).at("a").mean_alpha, 1.0);
}
