#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "suspense/measures.hpp"

using namespace suspense;

namespace {

std::vector<double> random_distribution(std::mt19937_64& gen, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double z = 0;
  for (auto& x : p) z += (x = e(gen));
  for (auto& x : p) x /= z;
  return p;
}

}  // namespace

TEST(HaleSurprise, Examples) {
  EXPECT_EQ(hale_surprise(1.0), 0.0);
  EXPECT_NEAR(hale_surprise(0.25), 1.3862943611198906, 1e-15);
  EXPECT_NEAR(hale_surprise(std::exp(-2.0)), 2.0, 1e-12);
  EXPECT_THROW(hale_surprise(0.0), Error);
  EXPECT_THROW(hale_surprise(-0.1), Error);
}

TEST(Entropy, Examples) {
  EXPECT_NEAR(entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}), std::log(4.0), 1e-15);
  EXPECT_EQ(entropy(std::vector<double>{1, 0, 0}), 0.0);
  EXPECT_NEAR(entropy(std::vector<double>{0.5, 0.25, 0.25}), 1.0397207708399179, 1e-15);
  try {
    entropy(std::vector<double>{0.5, 0.4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotADistribution);
  }
  EXPECT_THROW(entropy(std::vector<double>{1.5, -0.5}), Error);
}

TEST(UncertaintyReduction, Examples) {
  EXPECT_NEAR(hale_uncertainty_reduction(std::log(4.0), std::log(2.0)), std::log(2.0), 1e-15);
  EXPECT_EQ(hale_uncertainty_reduction(0.7, 0.7), 0.0);
  EXPECT_NEAR(hale_uncertainty_reduction(std::log(2.0), std::log(4.0)), -std::log(2.0), 1e-15);
}

TEST(UncertaintyReduction, Telescopes) {
  std::mt19937_64 gen(11);
  for (int seq = 0; seq < 100; ++seq) {
    std::vector<double> h;
    const std::size_t len = 2 + gen() % 20;
    for (std::size_t t = 0; t < len; ++t) h.push_back(entropy(random_distribution(gen, 1 + gen() % 12)));
    double total = 0;
    for (std::size_t t = 1; t < len; ++t) total += hale_uncertainty_reduction(h[t - 1], h[t]);
    EXPECT_NEAR(total, h.front() - h.back(), 1e-9);
  }
}

TEST(ElySurprise, Examples) {
  const Vector a{0.3, -0.2};
  EXPECT_EQ(ely_surprise(a, a, DistanceMetric::L1), 0.0);
  EXPECT_DOUBLE_EQ(ely_surprise(Vector{1, 2}, Vector{2, 0}, DistanceMetric::L1), 3.0);
  EXPECT_DOUBLE_EQ(ely_surprise(Vector{0, 0}, Vector{3, 4}, DistanceMetric::L2_squared), 25.0);
  EXPECT_DOUBLE_EQ(ely_surprise(Vector{0, 0}, Vector{3, 4}, DistanceMetric::L2), 5.0);
  EXPECT_THROW(ely_surprise(Vector{0, 0}, Vector{3, 4, 5}, DistanceMetric::L1), Error);
}

TEST(ElySurprise, SquaredIsSquareOfL2) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> g;
  for (int i = 0; i < 200; ++i) {
    Vector u(8), v(8);
    for (auto& x : u) x = g(gen);
    for (auto& x : v) x = g(gen);
    const double l2 = distance(u, v, DistanceMetric::L2);
    EXPECT_NEAR(distance(u, v, DistanceMetric::L2_squared), l2 * l2, 1e-12);
  }
}

TEST(ElyUncertainty, Examples) {
  const Vector e{0, 0};
  const Vector c1{0, 0}, c2{2, 0}, c3{0, 4}, c4{3, 4};
  EXPECT_EQ(ely_uncertainty(e, std::vector<WeightedCandidate>{{c1, 0.5}, {c1, 0.5}}, DistanceMetric::L1), 0.0);
  EXPECT_DOUBLE_EQ(ely_uncertainty(e, std::vector<WeightedCandidate>{{c2, 0.5}, {c3, 0.5}}, DistanceMetric::L1), 3.0);
  EXPECT_DOUBLE_EQ(ely_uncertainty(e, std::vector<WeightedCandidate>{{c4, 1.0}}, DistanceMetric::L2), 5.0);
  EXPECT_THROW(ely_uncertainty(e, std::vector<WeightedCandidate>{{c2, 0.5}}, DistanceMetric::L1), Error);
}

TEST(ElyUncertainty, DeltaEqualsSurpriseAndConvexBounds) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + gen() % 8;
    Vector e(5);
    for (auto& x : e) x = g(gen);
    std::vector<Vector> cands(k, Vector(5));
    for (auto& c : cands)
      for (auto& x : c) x = g(gen);
    const auto p = random_distribution(gen, k);
    std::vector<WeightedCandidate> wc;
    double lo = 1e300, hi = 0;
    for (std::size_t i = 0; i < k; ++i) {
      wc.push_back({cands[i], p[i]});
      const double d = distance(e, cands[i], DistanceMetric::L2);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    const double u = ely_uncertainty(e, wc, DistanceMetric::L2);
    EXPECT_GE(u, lo - 1e-12);
    EXPECT_LE(u, hi + 1e-12);
    EXPECT_NEAR(u, oracle::expected_distance(e, cands, p, 1), 1e-9);

    const std::size_t pick = gen() % k;
    std::vector<WeightedCandidate> delta;
    for (std::size_t i = 0; i < k; ++i) delta.push_back({cands[i], i == pick ? 1.0 : 0.0});
    EXPECT_NEAR(ely_uncertainty(e, delta, DistanceMetric::L1), ely_surprise(e, cands[pick], DistanceMetric::L1), 1e-12);
  }
}

TEST(AlphaEly, Examples) {
  const Vector a{0, 0}, b{1, 2};
  EXPECT_EQ(alpha_ely_surprise(0.0, a, b, DistanceMetric::L1), 0.0);
  EXPECT_EQ(alpha_ely_surprise(1.0, a, b, DistanceMetric::L1), ely_surprise(a, b, DistanceMetric::L1));
  EXPECT_DOUBLE_EQ(alpha_ely_surprise(2.0, a, b, DistanceMetric::L1), 6.0);
  EXPECT_THROW(alpha_ely_surprise(-1.0, a, b, DistanceMetric::L1), Error);

  const Vector c1{2, 0}, c2{0, 4};
  const std::vector<WeightedCandidate> ones{{c1, 0.5, 1}, {c2, 0.5, 1}};
  EXPECT_EQ(alpha_ely_uncertainty(a, ones, DistanceMetric::L1), ely_uncertainty(a, ones, DistanceMetric::L1));
  EXPECT_EQ(alpha_ely_uncertainty(a, std::vector<WeightedCandidate>{{c1, 0.5, 0}, {c2, 0.5, 0}}, DistanceMetric::L1),
            0.0);
  EXPECT_DOUBLE_EQ(
      alpha_ely_uncertainty(a, std::vector<WeightedCandidate>{{c1, 0.5, 1}, {c2, 0.5, 2}}, DistanceMetric::L1), 5.0);
}

TEST(Baselines, WordOverlap) {
  auto s = [](const char* text) { return make_story("x", {text}).sentences[0]; };
  EXPECT_EQ(baseline_word_overlap(s("a b c"), s("c b a")), 0.0);
  EXPECT_EQ(baseline_word_overlap(s("a b c"), s("d e f")), 1.0);
  EXPECT_DOUBLE_EQ(baseline_word_overlap(s("a b c"), s("b c d")), 0.5);
  EXPECT_EQ(baseline_word_overlap(s(""), s("")), 0.0);
}

TEST(Baselines, EmbeddingChange) {
  EXPECT_NEAR(baseline_embedding_change(Vector{1, 2}, Vector{1, 2}), 0.0, 1e-15);
  EXPECT_NEAR(baseline_embedding_change(Vector{1, 0}, Vector{0, 3}), 1.0, 1e-15);
  EXPECT_NEAR(baseline_embedding_change(Vector{1, 1}, Vector{-2, -2}), 2.0, 1e-15);
  EXPECT_THROW(baseline_embedding_change(Vector{0, 0}, Vector{1, 0}), Error);
}

TEST(ZScore, Examples) {
  const auto z = zscore(Series{1.0, 2.0, 3.0});
  EXPECT_NEAR(*z[0], -1.0, 1e-12);
  EXPECT_NEAR(*z[1], 0.0, 1e-12);
  EXPECT_NEAR(*z[2], 1.0, 1e-12);
  EXPECT_THROW(zscore(Series{2.0, 2.0, 2.0}), Error);
  const auto again = zscore(z);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(*again[i], *z[i], 1e-9);
  const auto gaps = zscore(Series{std::nullopt, 4.0, std::nullopt, 6.0});
  EXPECT_FALSE(gaps[0]);
  EXPECT_FALSE(gaps[2]);
  EXPECT_NEAR(*gaps[3], std::sqrt(0.5), 1e-12);
}

namespace {

struct Fixture {
  Story story;
  EmbeddingMatrix emb;
  StoryTrees trees;
  SentimentSet sentiment;
};

Fixture fixture(std::uint64_t seed) {
  Fixture f;
  f.story = make_story("f", {"alpha beta gamma", "delta epsilon zeta", "Hm.", "eta theta iota", "kappa lambda mu"});
  f.emb = contextualize(mock_embed(f.story, 8, seed), 0.3);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  int id = 0;
  for (std::size_t idx : f.story.active_indices()) {
    RolloutTree t("f", idx);
    for (int i = 0; i < 4; ++i) {
      CandidateNode n;
      n.node_id = id++;
      n.depth = 1;
      n.embedding = Vector(8);
      for (auto& x : n.embedding) x = g(gen);
      n.sentiment = (i % 2 ? -0.5 : 0.25);
      t.add(n);
    }
    f.trees.emplace(idx, t);
  }
  for (std::size_t idx : f.story.active_indices()) f.sentiment["f"].scores[idx] = idx % 2 ? -0.4 : 0.8;
  f.sentiment["f"].story_id = "f";
  return f;
}

}  // namespace

TEST(ComputeSeries, IdenticalEmbeddingsGiveZeroSurprise) {
  const auto story = make_story("s", {"one two three", "four five six"});
  EmbeddingMatrix m{"s", 2, {{0, {1, 0}}, {1, {1, 0}}}};
  AnalysisConfig cfg;
  cfg.measures = {Measure::S_Ely};
  const auto out = compute_series({story, m}, cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_FALSE(out[0].values[0]);
  EXPECT_EQ(*out[0].values[1], 0.0);
  cfg.measures.clear();
  EXPECT_TRUE(compute_series({story, m}, cfg).empty());
}

TEST(ComputeSeries, AbsentAtSkippedAndFirst) {
  auto f = fixture(1);
  AnalysisConfig cfg;
  cfg.measures.assign(std::begin(kAllMeasures), std::end(kAllMeasures));
  const auto out = compute_series({f.story, f.emb, &f.trees, &f.sentiment}, cfg);
  ASSERT_EQ(out.size(), std::size(kAllMeasures));
  for (const auto& s : out) {
    EXPECT_FALSE(s.values[2]) << to_string(s.measure);
    for (const auto& v : s.values)
      if (v) {
        EXPECT_TRUE(std::isfinite(*v));
      }
    const bool forward = s.measure == Measure::U_Ely || s.measure == Measure::U_alphaEly ||
                         s.measure == Measure::AlphaBaseline;
    EXPECT_EQ(s.values[0].has_value(), forward) << to_string(s.measure);
    EXPECT_TRUE(s.values[3].has_value()) << to_string(s.measure);
  }
}

TEST(ComputeSeries, SHaleUsesAlternativesAtPrevious) {
  auto f = fixture(2);
  AnalysisConfig cfg;
  cfg.measures = {Measure::S_Hale, Measure::U_Ely, Measure::U_Hale};
  const auto out = compute_series({f.story, f.emb, &f.trees, nullptr}, cfg);
  std::vector<Vector> alts;
  for (const auto* n : f.trees.at(1).at_depth(1)) alts.push_back(n->embedding);
  const double p = realized_probability(f.emb.at(1), f.emb.at(3), alts);
  EXPECT_NEAR(*out[0].values[3], -std::log(p), 1e-12);

  const auto d = path_distribution(f.trees.at(3), f.emb.at(3), 1);
  std::vector<Vector> cands;
  for (int id : d.node_ids) cands.push_back(f.trees.at(3).find(id)->embedding);
  EXPECT_NEAR(*out[1].values[3], oracle::expected_distance(f.emb.at(3), cands, d.probabilities, 0), 1e-12);

  const auto d1 = path_distribution(f.trees.at(1), f.emb.at(1), 1);
  EXPECT_NEAR(*out[2].values[3], entropy(d1.probabilities) - entropy(d.probabilities), 1e-12);
}

TEST(ComputeSeries, MissingTree) {
  auto f = fixture(3);
  AnalysisConfig cfg;
  cfg.measures = {Measure::U_Ely};
  try {
    compute_series({f.story, f.emb}, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingTree);
  }
  // Positions without a tree are absent rather than an error.
  f.trees.erase(3);
  const auto out = compute_series({f.story, f.emb, &f.trees}, cfg);
  EXPECT_FALSE(out[0].values[3]);
  EXPECT_TRUE(out[0].values[4]);
}

TEST(ComputeSeries, ConstantAlphaKeepsArgmax) {
  auto f = fixture(4);
  for (auto& [idx, s] : f.sentiment["f"].scores) s = 0.6;
  AnalysisConfig cfg;
  cfg.measures = {Measure::S_Ely, Measure::S_alphaEly};
  const auto out = compute_series({f.story, f.emb, nullptr, &f.sentiment}, cfg);
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < out[0].values.size(); ++i) {
    if (out[0].values[i] && (!out[0].values[a] || *out[0].values[i] > *out[0].values[a])) a = i;
    if (out[1].values[i] && (!out[1].values[b] || *out[1].values[i] > *out[1].values[b])) b = i;
    if (out[0].values[i]) {
      EXPECT_NEAR(*out[1].values[i], 0.6 * *out[0].values[i], 1e-12);
    }
  }
  EXPECT_EQ(a, b);
}

TEST(ComputeSeries, CandidateAlphaFromNodeSentiment) {
  auto f = fixture(5);
  AnalysisConfig cfg;
  cfg.measures = {Measure::U_alphaEly};
  const auto out = compute_series({f.story, f.emb, &f.trees, &f.sentiment}, cfg);
  const auto& tree = f.trees.at(0);
  const auto d = path_distribution(tree, f.emb.at(0), 1);
  double want = 0;
  for (std::size_t i = 0; i < d.node_ids.size(); ++i) {
    const auto* n = tree.find(d.node_ids[i]);
    want += d.probabilities[i] * alpha_weight(*n->sentiment) * distance(f.emb.at(0), n->embedding, DistanceMetric::L1);
  }
  EXPECT_NEAR(*out[0].values[0], want, 1e-12);
}

TEST(ComputeSeries, BaselineDirectionFlag) {
  auto f = fixture(6);
  AnalysisConfig cfg;
  cfg.measures = {Measure::WordOverlap, Measure::EmbedChange};
  const auto change = compute_series({f.story, f.emb}, cfg);
  cfg.similarity_as_change = false;
  const auto sim = compute_series({f.story, f.emb}, cfg);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t i = 0; i < change[m].values.size(); ++i)
      if (change[m].values[i]) {
        EXPECT_NEAR(*change[m].values[i] + *sim[m].values[i], 1.0, 1e-12);
      }
}
