#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "suspense/turning_points.hpp"
#include "synthetic.hpp"

using namespace suspense;

namespace {
const std::array<double, 5> kPriors{0.10, 0.25, 0.50, 0.75, 0.90};
}

TEST(PredictTPs, PlantedPeaks) {
  for (std::size_t n : {21u, 40u, 51u, 77u, 101u}) {
    const auto s = synthetic::planted_peaks(n, kPriors);
    const auto pred = predict_tps(s, TPConfig{});
    const auto theory = theory_baseline(n, kPriors);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(pred[k], theory[k]) << "n=" << n << " k=" << k;
  }
}

TEST(PredictTPs, FlatSeriesPicksWindowStart) {
  const Series flat(21, 1.0);
  const auto pred = predict_tps(flat, TPConfig{});
  // Windows [0, .2], [.15, .35], [.4, .6], [.65, .85], [.8, 1] over 20 steps.
  EXPECT_EQ(pred, (TPIndices{0, 3, 8, 13, 16}));
}

TEST(PredictTPs, UniqueMaxInWindow) {
  Series s(41, 0.0);
  s[21] = 5.0;
  EXPECT_EQ(predict_tps(s, TPConfig{})[2], 21u);
}

TEST(PredictTPs, SingleIndexWindows) {
  TPConfig cfg;
  cfg.half_widths = {0, 0, 0, 0, 0};
  std::mt19937_64 gen(1);
  Series s(101);
  for (auto& v : s) v = static_cast<double>(gen() % 100);
  EXPECT_EQ(predict_tps(s, cfg), (TPIndices{10, 25, 50, 75, 90}));
}

TEST(PredictTPs, EmptyWindow) {
  Series s(21);
  for (std::size_t i = 0; i < 21; ++i)
    if (i < 7 || i > 13) s[i] = 1.0;
  try {
    predict_tps(s, TPConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyWindow);
  }
}

TEST(TheoryBaseline, Examples) {
  EXPECT_EQ(theory_baseline(101, std::vector<double>{0.5}), (std::vector<std::size_t>{50}));
  EXPECT_EQ(theory_baseline(2, std::vector<double>{0.0}), (std::vector<std::size_t>{0}));
  EXPECT_EQ(theory_baseline(51, std::vector<double>{0.9}), (std::vector<std::size_t>{45}));
  EXPECT_EQ(theory_baseline(4, std::vector<double>{0.5}), (std::vector<std::size_t>{2}));  // 1.5 rounds up
  const auto idx = theory_baseline(37, kPriors);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
}

TEST(TPDistance, Examples) {
  const std::vector<std::size_t> gold{5, 12, 25, 37, 45};
  EXPECT_EQ(tp_distance(gold, gold, 51), 0.0);
  auto one_off = gold;
  one_off[2] += 5;
  EXPECT_NEAR(tp_distance(one_off, gold, 51), 2.0, 1e-9);
  auto all_off = gold;
  for (auto& i : all_off) i -= 5;  // 10% of 50 steps
  EXPECT_NEAR(tp_distance(all_off, gold, 51), 10.0, 1e-9);
  EXPECT_THROW(tp_distance(std::vector<std::size_t>{1, 2}, gold, 51), Error);
}

TEST(TPDistance, SymmetricAndTranslationConsistent) {
  std::mt19937_64 gen(6);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::size_t> a(5), b(5);
    for (auto& x : a) x = 5 + gen() % 60;
    for (auto& x : b) x = 5 + gen() % 60;
    EXPECT_DOUBLE_EQ(tp_distance(a, b, 80), tp_distance(b, a, 80));
    auto sa = a, sb = b;
    for (auto& x : sa) x += 7;
    for (auto& x : sb) x += 7;
    EXPECT_NEAR(tp_distance(sa, sb, 80), tp_distance(a, b, 80), 1e-12);
    EXPECT_EQ(tp_distance(a, b, 80) == 0.0, a == b);
  }
}

TEST(TPGold, LoadAndValidate) {
  std::istringstream in("{\"synopsis_id\":\"m\",\"tp_indices\":[1,3,5,7,9]}\n");
  const auto g = load_tp_gold(in);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].indices[4], 9u);
  std::istringstream bad("{\"synopsis_id\":\"m\",\"tp_indices\":[1,3,2,7,9]}\n");
  EXPECT_THROW(load_tp_gold(bad), Error);
  std::istringstream short_("{\"synopsis_id\":\"m\",\"tp_indices\":[1,3]}\n");
  EXPECT_THROW(load_tp_gold(short_), Error);
}

TEST(GoldPositionStats, MeanAndSd) {
  std::vector<TPGold> gold{{"a", {10, 20, 50, 70, 90}}, {"b", {10, 30, 50, 80, 90}}};
  const auto st = gold_position_stats(gold, {101, 101});
  EXPECT_NEAR(st.mean[1], 0.25, 1e-12);
  EXPECT_NEAR(st.sd[1], std::sqrt(0.005), 1e-12);
  EXPECT_EQ(st.sd[0], 0.0);
}
