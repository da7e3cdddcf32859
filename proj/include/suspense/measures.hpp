#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "suspense/continuation.hpp"
#include "suspense/embedding.hpp"
#include "suspense/error.hpp"
#include "suspense/story.hpp"
#include "suspense/vector_math.hpp"

namespace suspense {

// --- distances -----------------------------------------------------------

enum class DistanceMetric { L1, L2, L2_squared };

constexpr std::string_view to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::L1: return "L1";
    case DistanceMetric::L2: return "L2";
    case DistanceMetric::L2_squared: return "L2_squared";
  }
  return "?";
}

inline DistanceMetric parse_metric(std::string_view s) {
  if (s == "L1") return DistanceMetric::L1;
  if (s == "L2") return DistanceMetric::L2;
  if (s == "L2_squared") return DistanceMetric::L2_squared;
  throw Error(ErrorKind::InvalidConfig, "unknown metric '" + std::string(s) + "'");
}

inline double distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric) {
  require_same_dim(a, b);
  double s = 0.0;
  if (metric == DistanceMetric::L1) {
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return s;
  }
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return metric == DistanceMetric::L2 ? std::sqrt(s) : s;
}

// --- probability-based measures -----------------------------------------

inline constexpr double kDistributionTolerance = 1e-9;

/// -ln p.
inline double hale_surprise(double p) {
  if (!(p > 0.0) || p > 1.0 + kDistributionTolerance)
    throw Error(ErrorKind::NonPositiveProbability, "probability " + io::format_double(p) + " outside (0, 1]");
  return p >= 1.0 ? 0.0 : -std::log(p);
}

inline void require_distribution(std::span<const double> dist) {
  if (dist.empty()) throw Error(ErrorKind::NotADistribution, "empty distribution");
  double total = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorKind::NotADistribution, "negative or non-finite mass");
    total += p;
  }
  if (std::fabs(total - 1.0) > kDistributionTolerance)
    throw Error(ErrorKind::NotADistribution, "mass sums to " + io::format_double(total));
}

/// Shannon entropy in nats, with 0 log 0 = 0.
inline double entropy(std::span<const double> dist) {
  require_distribution(dist);
  double h = 0.0;
  for (double p : dist)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

inline double hale_uncertainty_reduction(double h_prev, double h_curr) { return h_prev - h_curr; }

// --- embedding-based measures -------------------------------------------

inline double ely_surprise(std::span<const double> e_prev, std::span<const double> e_curr, DistanceMetric metric) {
  return distance(e_prev, e_curr, metric);
}

struct WeightedCandidate {
  std::span<const double> embedding;
  double probability = 0.0;
  double alpha = 1.0;
};

/// Expected distance from the current state to the candidate next states.
inline double ely_uncertainty(std::span<const double> e_t, std::span<const WeightedCandidate> candidates,
                              DistanceMetric metric) {
  std::vector<double> probs;
  probs.reserve(candidates.size());
  for (const auto& c : candidates) probs.push_back(c.probability);
  require_distribution(probs);
  double u = 0.0;
  for (const auto& c : candidates) u += c.probability * distance(e_t, c.embedding, metric);
  return u;
}

inline double alpha_ely_surprise(double alpha_t, std::span<const double> e_prev, std::span<const double> e_curr,
                                 DistanceMetric metric) {
  if (!(alpha_t >= 0.0)) throw Error(ErrorKind::NegativeAlpha, io::format_double(alpha_t));
  return alpha_t * ely_surprise(e_prev, e_curr, metric);
}

/// Like ely_uncertainty, with every candidate's distance scaled by its alpha.
inline double alpha_ely_uncertainty(std::span<const double> e_t, std::span<const WeightedCandidate> candidates,
                                    DistanceMetric metric) {
  std::vector<double> probs;
  probs.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (!(c.alpha >= 0.0)) throw Error(ErrorKind::NegativeAlpha, io::format_double(c.alpha));
    probs.push_back(c.probability);
  }
  require_distribution(probs);
  double u = 0.0;
  for (const auto& c : candidates) u += c.probability * c.alpha * distance(e_t, c.embedding, metric);
  return u;
}

// --- baselines ----------------------------------------------------------

inline double jaccard_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

/// 1 - Jaccard over token sets; two empty sentences count as unchanged.
inline double baseline_word_overlap(const Sentence& prev, const Sentence& curr) {
  return 1.0 - jaccard_similarity(prev.tokens, curr.tokens);
}

/// 1 - cosine, in [0, 2].
inline double baseline_embedding_change(std::span<const double> v_prev, std::span<const double> v_curr) {
  return 1.0 - cosine_similarity(v_prev, v_curr);
}

// --- series -------------------------------------------------------------

using Series = std::vector<std::optional<double>>;

/// Standardises present values to mean 0 and sample sd 1.
inline Series zscore(const Series& series) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : series)
    if (v) {
      sum += *v;
      ++n;
    }
  if (n < 2) throw Error(ErrorKind::DegenerateSeries, "fewer than 2 present values");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& v : series)
    if (v) ss += (*v - mean) * (*v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) throw Error(ErrorKind::DegenerateSeries, "constant series");
  Series out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i]) out[i] = (*series[i] - mean) / sd;
  return out;
}

enum class Measure { S_Hale, U_Hale, S_Ely, U_Ely, S_alphaEly, U_alphaEly, WordOverlap, EmbedChange, AlphaBaseline };

inline constexpr Measure kAllMeasures[] = {Measure::S_Hale,      Measure::U_Hale,      Measure::S_Ely,
                                           Measure::U_Ely,       Measure::S_alphaEly,  Measure::U_alphaEly,
                                           Measure::WordOverlap, Measure::EmbedChange, Measure::AlphaBaseline};

constexpr std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::S_Hale: return "S_Hale";
    case Measure::U_Hale: return "U_Hale";
    case Measure::S_Ely: return "S_Ely";
    case Measure::U_Ely: return "U_Ely";
    case Measure::S_alphaEly: return "S_alphaEly";
    case Measure::U_alphaEly: return "U_alphaEly";
    case Measure::WordOverlap: return "WordOverlap";
    case Measure::EmbedChange: return "EmbedChange";
    case Measure::AlphaBaseline: return "AlphaBaseline";
  }
  return "?";
}

inline Measure parse_measure(std::string_view s) {
  for (Measure m : kAllMeasures)
    if (to_string(m) == s) return m;
  throw Error(ErrorKind::InvalidConfig, "unknown measure '" + std::string(s) + "'");
}

/// Measures that read continuation trees.
constexpr bool needs_candidates(Measure m) {
  return m == Measure::S_Hale || m == Measure::U_Hale || m == Measure::U_Ely || m == Measure::U_alphaEly;
}

constexpr bool needs_sentiment(Measure m) {
  return m == Measure::S_alphaEly || m == Measure::U_alphaEly || m == Measure::AlphaBaseline;
}

struct SeriesConfig {
  DistanceMetric metric = DistanceMetric::L1;
  int rollout = 1;
  CandidateSource source = CandidateSource::corpus;
  double temperature = 1.0;

  bool operator==(const SeriesConfig&) const = default;
};

struct MeasureSeries {
  std::string story_id;
  Measure measure = Measure::S_Ely;
  Series values;  // one slot per sentence index; empty where undefined
  SeriesConfig config;
};

struct AnalysisConfig {
  std::vector<Measure> measures;
  SeriesConfig series;
  AlphaMode alpha_mode = AlphaMode::magnitude;
  double default_candidate_alpha = 1.0;
  bool similarity_as_change = true;  // baselines as 1 - similarity
};

/// Everything compute_series reads for one story. `trees` and `sentiment`
/// may be null when no requested measure needs them.
struct StoryInputs {
  const Story& story;
  const EmbeddingMatrix& embeddings;
  const StoryTrees* trees = nullptr;
  const SentimentSet* sentiment = nullptr;
};

namespace detail {

inline double story_alpha(const StoryInputs& in, std::size_t idx, AlphaMode mode) {
  if (!in.sentiment) throw Error(ErrorKind::MissingSentence, in.story.id + ": no sentiment scores");
  auto it = in.sentiment->find(in.story.id);
  if (it == in.sentiment->end()) throw Error(ErrorKind::MissingSentence, in.story.id + ": no sentiment scores");
  auto score = it->second.get(idx);
  if (!score) throw Error(ErrorKind::MissingSentence, in.story.id + "[" + std::to_string(idx) + "]: no sentiment");
  return alpha_weight(*score, mode);
}

inline double candidate_alpha(const StoryInputs& in, const CandidateNode& node, const AnalysisConfig& cfg) {
  if (node.sentiment) return alpha_weight(*node.sentiment, cfg.alpha_mode);
  if (node.origin && in.sentiment) {
    auto it = in.sentiment->find(node.origin->story_id);
    if (it != in.sentiment->end())
      if (auto s = it->second.get(node.origin->sentence_idx)) return alpha_weight(*s, cfg.alpha_mode);
  }
  return cfg.default_candidate_alpha;
}

inline const RolloutTree* tree_at(const StoryInputs& in, std::size_t idx) {
  if (!in.trees) return nullptr;
  auto it = in.trees->find(idx);
  return it == in.trees->end() ? nullptr : &it->second;
}

}  // namespace detail

/// Per-sentence series for each requested measure.
///
/// Backward measures (S_*, WordOverlap, EmbedChange) compare each
/// non-skipped sentence with the previous non-skipped one and are absent at
/// the first. Forward measures are defined where a tree exists at that
/// position; U_Hale also needs a tree at the previous active position, and
/// S_Hale needs one there to supply the alternatives. A story with no trees
/// at all raises MissingTree when any candidate-based measure is requested.
inline std::vector<MeasureSeries> compute_series(const StoryInputs& in, const AnalysisConfig& cfg) {
  std::vector<MeasureSeries> out;
  if (cfg.measures.empty()) return out;
  const auto& story = in.story;
  const auto active = story.active_indices();
  const auto& metric = cfg.series.metric;
  const double temp = cfg.series.temperature;
  const int depth = cfg.series.rollout;
  if (depth < 1 || depth > kMaxRolloutDepth) throw Error(ErrorKind::InvalidConfig, "rollout must be 1..3");

  for (Measure m : cfg.measures)
    if (needs_candidates(m) && (!in.trees || in.trees->empty()))
      throw Error(ErrorKind::MissingTree, story.id + ": " + std::string(to_string(m)) + " needs continuation candidates");

  for (std::size_t idx : active)
    if (!in.embeddings.contains(idx))
      throw Error(ErrorKind::MissingSentence, story.id + "[" + std::to_string(idx) + "]: no embedding");

  // Per-position leaf distributions, shared by U_Hale / U_Ely / U_alphaEly.
  std::map<std::size_t, ContinuationDistribution> dists;
  auto dist_at = [&](std::size_t idx) -> const ContinuationDistribution* {
    const auto* tree = detail::tree_at(in, idx);
    if (!tree) return nullptr;
    auto it = dists.find(idx);
    if (it == dists.end()) it = dists.emplace(idx, path_distribution(*tree, in.embeddings.at(idx), depth, temp)).first;
    return &it->second;
  };

  for (Measure m : cfg.measures) {
    MeasureSeries s{story.id, m, Series(story.sentences.size()), cfg.series};
    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t t = active[k];
      const bool has_prev = k > 0;
      const std::size_t prev = has_prev ? active[k - 1] : 0;
      const auto& e_t = in.embeddings.at(t);
      switch (m) {
        case Measure::S_Hale: {
          if (!has_prev) break;
          const auto* tree = detail::tree_at(in, prev);
          if (!tree) break;
          std::vector<Vector> alts;
          for (const auto* n : tree->at_depth(1)) alts.push_back(n->embedding);
          s.values[t] = hale_surprise(realized_probability(in.embeddings.at(prev), e_t, alts, temp));
          break;
        }
        case Measure::U_Hale: {
          if (!has_prev) break;
          const auto* d_prev = dist_at(prev);
          const auto* d_curr = dist_at(t);
          if (d_prev && d_curr)
            s.values[t] = hale_uncertainty_reduction(entropy(d_prev->probabilities), entropy(d_curr->probabilities));
          break;
        }
        case Measure::S_Ely:
          if (has_prev) s.values[t] = ely_surprise(in.embeddings.at(prev), e_t, metric);
          break;
        case Measure::S_alphaEly:
          if (has_prev) {
            const double a = detail::story_alpha(in, t, cfg.alpha_mode);
            s.values[t] = cfg.alpha_mode == AlphaMode::magnitude
                              ? alpha_ely_surprise(a, in.embeddings.at(prev), e_t, metric)
                              : a * ely_surprise(in.embeddings.at(prev), e_t, metric);
          }
          break;
        case Measure::U_Ely:
        case Measure::U_alphaEly: {
          const auto* d = dist_at(t);
          if (!d) break;
          const auto* tree = detail::tree_at(in, t);
          std::vector<WeightedCandidate> cands;
          cands.reserve(d->node_ids.size());
          for (std::size_t i = 0; i < d->node_ids.size(); ++i) {
            const auto* node = tree->find(d->node_ids[i]);
            const double a = m == Measure::U_alphaEly ? detail::candidate_alpha(in, *node, cfg) : 1.0;
            cands.push_back({node->embedding, d->probabilities[i], a});
          }
          if (m == Measure::U_Ely) {
            s.values[t] = ely_uncertainty(e_t, cands, metric);
          } else if (cfg.alpha_mode == AlphaMode::magnitude) {
            s.values[t] = alpha_ely_uncertainty(e_t, cands, metric);
          } else {
            double u = 0.0;
            for (const auto& c : cands) u += c.probability * c.alpha * distance(e_t, c.embedding, metric);
            s.values[t] = u;
          }
          break;
        }
        case Measure::WordOverlap:
          if (has_prev) {
            const double change = baseline_word_overlap(story.sentences[prev], story.sentences[t]);
            s.values[t] = cfg.similarity_as_change ? change : 1.0 - change;
          }
          break;
        case Measure::EmbedChange:
          if (has_prev) {
            const double change = baseline_embedding_change(in.embeddings.at(prev), e_t);
            s.values[t] = cfg.similarity_as_change ? change : 1.0 - change;
          }
          break;
        case Measure::AlphaBaseline:
          s.values[t] = detail::story_alpha(in, t, cfg.alpha_mode);
          break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace suspense
