#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "suspense/correlation.hpp"

using namespace suspense;

using V = std::vector<double>;

TEST(Spearman, Examples) {
  EXPECT_DOUBLE_EQ(spearman(V{1, 2, 3, 4}, V{1, 2, 3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(V{1, 2, 3, 4}, V{4, 3, 2, 1}), -1.0);
  EXPECT_NEAR(spearman(V{1, 2, 3, 4}, V{1, 3, 2, 4}), 0.8, 1e-12);
}

TEST(Kendall, Examples) {
  EXPECT_DOUBLE_EQ(kendall(V{1, 2, 3}, V{1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(kendall(V{1, 2, 3}, V{3, 2, 1}), -1.0);
  EXPECT_NEAR(kendall(V{1, 2, 3}, V{1, 3, 2}), 1.0 / 3.0, 1e-12);
}

TEST(RankCorrelation, Preconditions) {
  EXPECT_THROW(spearman(V{1, 2}, V{1, 2}), Error);
  EXPECT_THROW(kendall(V{1, 2, 3}, V{1, 2}), Error);
  try {
    spearman(V{1, 1, 1}, V{1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSeries);
  }
  EXPECT_THROW(kendall(V{1, 2, 3}, V{5, 5, 5}), Error);
}

TEST(RankCorrelation, MatchesNaiveOraclesWithTies) {
  std::mt19937_64 gen(17);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 3 + gen() % 40;
    const std::uint64_t levels = 2 + gen() % 8;
    V a(n), b(n);
    for (auto& x : a) x = static_cast<double>(gen() % levels);
    for (auto& x : b) x = static_cast<double>(gen() % levels);
    try {
      const double rho = spearman(a, b), tau = kendall(a, b);
      EXPECT_NEAR(rho, oracle::naive_spearman(a, b), 1e-9);
      EXPECT_NEAR(tau, oracle::naive_kendall(a, b), 1e-9);
      ++checked;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DegenerateSeries);
    }
  }
  EXPECT_GT(checked, 450);
}

TEST(RankCorrelation, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    V a(12), b(12);
    for (auto& x : a) x = g(gen);
    for (auto& x : b) x = g(gen);
    V ta = a, tb = b;
    for (auto& x : ta) x = std::exp(x);
    for (auto& x : tb) x = x * x * x + 3;
    EXPECT_NEAR(spearman(a, b), spearman(ta, tb), 1e-12);
    EXPECT_NEAR(kendall(a, b), kendall(ta, tb), 1e-12);
  }
}

TEST(AlignPresent, SkipsGaps) {
  const std::vector<std::optional<double>> a{1.0, std::nullopt, 3.0, 4.0};
  const std::vector<std::optional<double>> b{2.0, 5.0, std::nullopt, 8.0};
  const auto [x, y] = align_present(a, b);
  EXPECT_EQ(x, (V{1, 4}));
  EXPECT_EQ(y, (V{2, 8}));
}

TEST(FisherCI, Examples) {
  const auto ci = fisher_ci(0.0, 28);
  EXPECT_NEAR(ci.hi, 0.37307692860469993, 1e-12);
  EXPECT_NEAR(ci.lo, -0.37307692860469993, 1e-12);
  EXPECT_NEAR(ci.hi, 0.373, 1e-3);
  const auto wide = fisher_ci(0.0, 4);
  EXPECT_NEAR(wide.hi, 0.9610870825606609, 1e-12);
  EXPECT_THROW(fisher_ci(0.0, 3), Error);
  EXPECT_THROW(fisher_ci(1.0, 10), Error);
}

TEST(FisherCI, ContainsRAndShrinksWithN) {
  for (double r : {-0.9, -0.3, 0.0, 0.45, 0.8}) {
    double prev = 3.0;
    for (std::size_t n = 4; n < 200; n += 7) {
      const auto ci = fisher_ci(r, n);
      EXPECT_LT(ci.lo, r);
      EXPECT_GT(ci.hi, r);
      EXPECT_LT(ci.hi - ci.lo, prev);
      prev = ci.hi - ci.lo;
    }
  }
}

TEST(NormalCriticalValue, Standard) { EXPECT_NEAR(normal_critical_value(0.05), 1.959963984540054, 1e-12); }
