#pragma once

// Krippendorff's alpha and annotator screening.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "suspense/annotation.hpp"
#include "suspense/error.hpp"

namespace suspense {

enum class AgreementLevel { nominal, ordinal, interval };

inline AgreementLevel parse_agreement_level(std::string_view s) {
  if (s == "nominal") return AgreementLevel::nominal;
  if (s == "ordinal") return AgreementLevel::ordinal;
  if (s == "interval") return AgreementLevel::interval;
  throw Error(ErrorKind::InvalidConfig, "unknown agreement level '" + std::string(s) + "'");
}

/// One coded unit: the category (0-based) each coder assigned to it.
using Unit = std::vector<std::size_t>;

namespace detail {

struct Coincidences {
  std::vector<std::vector<double>> o;  // o[c][k]
  std::vector<double> n_c;
  double n = 0.0;
};

inline Coincidences coincidences(const std::vector<Unit>& units, std::size_t categories) {
  Coincidences co{std::vector<std::vector<double>>(categories, std::vector<double>(categories, 0.0)),
                  std::vector<double>(categories, 0.0), 0.0};
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    const double w = 1.0 / static_cast<double>(u.size() - 1);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] >= categories) throw Error(ErrorKind::OutOfRange, "category outside scale");
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j) co.o[u[i]][u[j]] += w;
    }
  }
  for (std::size_t c = 0; c < categories; ++c)
    for (std::size_t k = 0; k < categories; ++k) co.n_c[c] += co.o[c][k];
  for (double x : co.n_c) co.n += x;
  return co;
}

/// Squared difference function delta^2(c, k) given category marginals.
inline std::vector<std::vector<double>> delta_squared(const std::vector<double>& n_c, AgreementLevel level) {
  const std::size_t K = n_c.size();
  std::vector<std::vector<double>> d(K, std::vector<double>(K, 0.0));
  for (std::size_t c = 0; c < K; ++c)
    for (std::size_t k = 0; k < K; ++k) {
      if (c == k) continue;
      switch (level) {
        case AgreementLevel::nominal: d[c][k] = 1.0; break;
        case AgreementLevel::interval: {
          const double diff = static_cast<double>(c) - static_cast<double>(k);
          d[c][k] = diff * diff;
          break;
        }
        case AgreementLevel::ordinal: {
          const std::size_t lo = std::min(c, k), hi = std::max(c, k);
          double s = 0.0;
          for (std::size_t g = lo; g <= hi; ++g) s += n_c[g];
          s -= 0.5 * (n_c[lo] + n_c[hi]);
          d[c][k] = s * s;
          break;
        }
      }
    }
  return d;
}

inline double expected_disagreement(const Coincidences& co, const std::vector<std::vector<double>>& d) {
  double de = 0.0;
  const std::size_t K = co.n_c.size();
  for (std::size_t c = 0; c < K; ++c)
    for (std::size_t k = 0; k < K; ++k) de += co.n_c[c] * co.n_c[k] * d[c][k];
  return de / (co.n * (co.n - 1.0));
}

inline double observed_disagreement(const Coincidences& co, const std::vector<std::vector<double>>& d) {
  double dobs = 0.0;
  const std::size_t K = co.n_c.size();
  for (std::size_t c = 0; c < K; ++c)
    for (std::size_t k = 0; k < K; ++k) dobs += co.o[c][k] * d[c][k];
  return dobs / co.n;
}

}  // namespace detail

/// alpha = 1 - D_o / D_e over the coincidence matrix of pairable values.
/// Units with fewer than two values are not pairable and are ignored.
inline double krippendorff_alpha(const std::vector<Unit>& units, AgreementLevel level = AgreementLevel::ordinal,
                                 std::size_t categories = kLabelCount) {
  const auto co = detail::coincidences(units, categories);
  if (co.n < 2.0) throw Error(ErrorKind::DegenerateData, "no pairable values");
  const auto d = detail::delta_squared(co.n_c, level);
  const double de = detail::expected_disagreement(co, d);
  if (!(de > 0.0)) throw Error(ErrorKind::DegenerateData, "a single value is used throughout");
  return 1.0 - detail::observed_disagreement(co, d) / de;
}

/// Units keyed by (story, sentence position) from annotation sets.
inline std::vector<Unit> units_from_annotations(const std::vector<AnnotationSet>& sets) {
  std::map<std::pair<std::string, std::size_t>, Unit> units;
  for (const auto& a : sets)
    for (std::size_t k = 0; k < a.labels.size(); ++k) units[{a.story_id, k}].push_back(ordinal(a.labels[k]));
  std::vector<Unit> out;
  out.reserve(units.size());
  for (auto& [key, u] : units) out.push_back(std::move(u));
  return out;
}

struct AnnotatorStats {
  std::optional<double> mean_alpha;  // empty when no co-annotated story exists
  std::optional<double> mean_rt_ms;
  std::size_t stories = 0;
};

/// Per-annotator agreement: for each story and co-annotator, alpha with the
/// pair's own observed disagreement against the corpus-wide expected
/// disagreement; averaged over all such pairs.
inline std::map<std::string, AnnotatorStats> annotator_agreement(const std::vector<AnnotationSet>& sets,
                                                                 AgreementLevel level = AgreementLevel::ordinal) {
  const auto corpus_co = detail::coincidences(units_from_annotations(sets), kLabelCount);
  if (corpus_co.n < 2.0) throw Error(ErrorKind::DegenerateData, "no pairable values");
  const auto d = detail::delta_squared(corpus_co.n_c, level);
  const double de = detail::expected_disagreement(corpus_co, d);
  if (!(de > 0.0)) throw Error(ErrorKind::DegenerateData, "a single value is used throughout");

  std::map<std::string, AnnotatorStats> stats;
  std::map<std::string, std::pair<double, std::size_t>> alpha_acc, rt_acc;
  for (const auto& a : sets) {
    ++stats[a.annotator_id].stories;
    if (a.mean_rt_ms) {
      rt_acc[a.annotator_id].first += *a.mean_rt_ms;
      ++rt_acc[a.annotator_id].second;
    }
  }
  for (const auto& [story, group] : group_by_story(sets))
    for (const auto* a : group)
      for (const auto* b : group) {
        if (a == b) continue;
        const std::size_t n = std::min(a->labels.size(), b->labels.size());
        if (n == 0) continue;
        double dobs = 0.0;
        for (std::size_t k = 0; k < n; ++k) dobs += d[ordinal(a->labels[k])][ordinal(b->labels[k])];
        dobs /= static_cast<double>(n);
        alpha_acc[a->annotator_id].first += 1.0 - dobs / de;
        ++alpha_acc[a->annotator_id].second;
      }
  for (auto& [id, s] : stats) {
    if (auto it = alpha_acc.find(id); it != alpha_acc.end())
      s.mean_alpha = it->second.first / static_cast<double>(it->second.second);
    if (auto it = rt_acc.find(id); it != rt_acc.end())
      s.mean_rt_ms = it->second.first / static_cast<double>(it->second.second);
  }
  return stats;
}

struct ScreeningThresholds {
  double min_alpha = 0.35;
  double min_rt_ms = 600.0;
};

/// Annotators whose mean agreement or mean reading time falls below threshold.
inline std::vector<std::string> screen_annotators(const std::map<std::string, AnnotatorStats>& stats,
                                                  const ScreeningThresholds& thresholds = {}) {
  std::vector<std::string> flagged;
  for (const auto& [id, s] : stats) {
    const bool low_alpha = s.mean_alpha && *s.mean_alpha < thresholds.min_alpha;
    const bool fast = s.mean_rt_ms && *s.mean_rt_ms < thresholds.min_rt_ms;
    if (low_alpha || fast) flagged.push_back(id);
  }
  return flagged;
}

}  // namespace suspense
