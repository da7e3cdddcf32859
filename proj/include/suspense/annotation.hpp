#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "suspense/correlation.hpp"
#include "suspense/error.hpp"
#include "suspense/io.hpp"
#include "suspense/measures.hpp"
#include "suspense/story.hpp"

namespace suspense {

enum class RelativeLabel { BigDecrease = 0, Decrease = 1, Same = 2, Increase = 3, BigIncrease = 4 };

inline constexpr std::size_t kLabelCount = 5;

constexpr std::string_view to_string(RelativeLabel l) {
  switch (l) {
    case RelativeLabel::BigDecrease: return "BigDecrease";
    case RelativeLabel::Decrease: return "Decrease";
    case RelativeLabel::Same: return "Same";
    case RelativeLabel::Increase: return "Increase";
    case RelativeLabel::BigIncrease: return "BigIncrease";
  }
  return "?";
}

inline RelativeLabel parse_label(std::string_view s) {
  std::string key;
  for (char c : s)
    if (c != ' ' && c != '_') key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "bigdecrease") return RelativeLabel::BigDecrease;
  if (key == "decrease") return RelativeLabel::Decrease;
  if (key == "same") return RelativeLabel::Same;
  if (key == "increase") return RelativeLabel::Increase;
  if (key == "bigincrease") return RelativeLabel::BigIncrease;
  throw Error(ErrorKind::MalformedLine, "unknown label '" + std::string(s) + "'");
}

constexpr std::size_t ordinal(RelativeLabel l) { return static_cast<std::size_t>(l); }

inline constexpr double kMinMappingGap = 0.05;

/// Numeric value of each relative judgement, indexed by ordinal.
struct JudgmentMapping {
  std::array<double, kLabelCount> values{-0.2, -0.1, 0.0, 0.1, 0.2};

  double operator()(RelativeLabel l) const { return values[ordinal(l)]; }

  /// Same is 0, decreases negative, increases positive, neighbours at least
  /// 0.05 apart.
  bool valid() const {
    constexpr double eps = 1e-12;
    if (values[2] != 0.0) return false;
    for (std::size_t i = 0; i + 1 < kLabelCount; ++i)
      if (values[i + 1] - values[i] < kMinMappingGap - eps) return false;
    return true;
  }

  void validate() const {
    if (!valid()) throw Error(ErrorKind::InvalidConfig, "judgement mapping violates ordering constraints");
  }

  bool operator==(const JudgmentMapping&) const = default;
};

inline JudgmentMapping default_mapping() { return {}; }

struct AnnotationSet {
  std::string story_id;
  std::string annotator_id;
  std::vector<RelativeLabel> labels;  // one per non-skipped sentence
  std::optional<double> mean_rt_ms;
};

inline std::vector<AnnotationSet> load_annotations(std::istream& in, const std::string& source = "<stream>") {
  std::vector<AnnotationSet> out;
  io::for_each_jsonl(in, source, [&](const io::json& obj, std::size_t line_no) {
    AnnotationSet a;
    a.story_id = obj.at("story_id").get<std::string>();
    a.annotator_id = obj.at("annotator_id").get<std::string>();
    for (const auto& l : obj.at("labels")) {
      try {
        a.labels.push_back(parse_label(l.get<std::string>()));
      } catch (const Error& e) {
        throw Error(ErrorKind::MalformedLine, io::where(source, line_no) + ": " + e.what());
      }
    }
    if (obj.contains("mean_rt_ms") && !obj["mean_rt_ms"].is_null()) a.mean_rt_ms = obj["mean_rt_ms"].get<double>();
    out.push_back(std::move(a));
  });
  return out;
}

inline std::vector<AnnotationSet> load_annotations(const std::string& path) {
  auto in = io::open_input(path);
  return load_annotations(in, path);
}

inline void write_annotations(std::ostream& out, const std::vector<AnnotationSet>& sets) {
  for (const auto& a : sets) {
    io::json obj;
    obj["story_id"] = a.story_id;
    obj["annotator_id"] = a.annotator_id;
    obj["labels"] = io::json::array();
    for (auto l : a.labels) obj["labels"].push_back(std::string(to_string(l)));
    obj["mean_rt_ms"] = a.mean_rt_ms ? io::json(*a.mean_rt_ms) : io::json(nullptr);
    out << obj.dump() << '\n';
  }
}

/// Cumulative sum of mapped judgements: J_t = j_1 + ... + j_t.
inline std::vector<double> to_absolute(std::span<const RelativeLabel> labels, const JudgmentMapping& mapping) {
  mapping.validate();
  std::vector<double> curve;
  curve.reserve(labels.size());
  double acc = 0.0;
  for (auto l : labels) {
    acc += mapping(l);
    curve.push_back(acc);
  }
  return curve;
}

/// Absolute curve placed on sentence indices; skipped sentences stay empty.
inline Series absolute_curve(const Story& story, const AnnotationSet& a, const JudgmentMapping& mapping) {
  const auto active = story.active_indices();
  if (a.labels.size() != active.size())
    throw Error(ErrorKind::LengthMismatch, story.id + "/" + a.annotator_id + ": " + std::to_string(a.labels.size()) +
                                               " labels for " + std::to_string(active.size()) + " sentences");
  const auto curve = to_absolute(a.labels, mapping);
  Series out(story.sentences.size());
  for (std::size_t k = 0; k < active.size(); ++k) out[active[k]] = curve[k];
  return out;
}

inline std::map<std::string, std::vector<const AnnotationSet*>> group_by_story(const std::vector<AnnotationSet>& sets) {
  std::map<std::string, std::vector<const AnnotationSet*>> out;
  for (const auto& a : sets) out[a.story_id].push_back(&a);
  return out;
}

// --- mapping fit --------------------------------------------------------

enum class FitTarget {
  cross_annotator,  // z-scored curves against the mean of the other annotators
  reference,        // raw curves against supplied reference curves
};

struct MappingFit {
  JudgmentMapping mapping;
  double loss = 0.0;     // mean L1 on all stories
  double cv_loss = 0.0;  // mean held-out L1 across folds
};

namespace detail {

inline constexpr double kGridStep = 0.05;
inline constexpr int kGridMaxSteps = 10;  // 0.5 / 0.05

inline std::vector<JudgmentMapping> mapping_grid() {
  std::vector<JudgmentMapping> grid;
  for (int dec = 1; dec < kGridMaxSteps; ++dec)
    for (int big_dec = dec + 1; big_dec <= kGridMaxSteps; ++big_dec)
      for (int inc = 1; inc < kGridMaxSteps; ++inc)
        for (int big_inc = inc + 1; big_inc <= kGridMaxSteps; ++big_inc) {
          JudgmentMapping m;
          m.values = {-big_dec * kGridStep, -dec * kGridStep, 0.0, inc * kGridStep, big_inc * kGridStep};
          grid.push_back(m);
        }
  // smallest magnitudes first so a strict-improvement scan keeps them on ties
  std::stable_sort(grid.begin(), grid.end(), [](const JudgmentMapping& a, const JudgmentMapping& b) {
    auto key = [](const JudgmentMapping& m) {
      return std::array<double, 5>{std::fabs(m.values[0]) + std::fabs(m.values[1]) + std::fabs(m.values[3]) +
                                       std::fabs(m.values[4]),
                                   std::fabs(m.values[1]), std::fabs(m.values[3]), std::fabs(m.values[0]),
                                   std::fabs(m.values[4])};
    };
    return key(a) < key(b);
  });
  return grid;
}

inline std::vector<double> standardise(std::vector<double> v) {
  if (v.empty()) return v;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  for (double& x : v) x = sd > 1e-12 ? (x - mean) / sd : x - mean;
  return v;
}

inline double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

}  // namespace detail

/// Grid search over valid mappings (step 0.05 within [-0.5, 0.5]) minimising
/// mean L1 between annotator curves and the fit target. Stories are dealt to
/// `folds` folds round-robin in id order; `cv_loss` is the held-out loss of
/// the mapping chosen on the remaining folds. Ties go to smaller magnitudes.
inline MappingFit fit_mapping(const std::vector<AnnotationSet>& annotations, std::size_t folds = 5,
                              FitTarget target = FitTarget::cross_annotator,
                              const std::map<std::string, std::vector<double>>* references = nullptr) {
  if (folds < 2) throw Error(ErrorKind::InvalidConfig, "need at least 2 folds");
  if (target == FitTarget::reference && !references)
    throw Error(ErrorKind::InvalidConfig, "reference fit needs reference curves");

  const auto by_story = group_by_story(annotations);
  std::vector<std::string> stories;
  for (const auto& [id, sets] : by_story) {
    if (target == FitTarget::cross_annotator && sets.size() < 2) continue;
    if (target == FitTarget::reference && !references->count(id)) continue;
    stories.push_back(id);
  }
  if (stories.size() < folds)
    throw Error(ErrorKind::InsufficientData,
                std::to_string(stories.size()) + " usable stories for " + std::to_string(folds) + " folds");

  const auto grid = detail::mapping_grid();
  // story_loss[g][s]: mean L1 of story s under grid mapping g
  std::vector<std::vector<double>> story_loss(grid.size(), std::vector<double>(stories.size(), 0.0));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t si = 0; si < stories.size(); ++si) {
      const auto& sets = by_story.at(stories[si]);
      std::vector<std::vector<double>> curves;
      for (const auto* a : sets) curves.push_back(to_absolute(a->labels, grid[g]));
      for (const auto& c : curves)
        if (c.size() != curves.front().size())
          throw Error(ErrorKind::LengthMismatch, stories[si] + ": annotators disagree on sentence count");
      double total = 0.0;
      if (target == FitTarget::reference) {
        const auto& ref = references->at(stories[si]);
        for (const auto& c : curves) {
          if (c.size() != ref.size()) throw Error(ErrorKind::LengthMismatch, stories[si] + ": reference length");
          total += detail::mean_abs_diff(c, ref);
        }
      } else {
        for (std::size_t a = 0; a < curves.size(); ++a) {
          std::vector<double> others(curves[a].size(), 0.0);
          for (std::size_t b = 0; b < curves.size(); ++b)
            if (b != a)
              for (std::size_t i = 0; i < others.size(); ++i) others[i] += curves[b][i];
          for (double& x : others) x /= static_cast<double>(curves.size() - 1);
          total += detail::mean_abs_diff(detail::standardise(curves[a]), detail::standardise(others));
        }
      }
      story_loss[g][si] = total / static_cast<double>(curves.size());
    }
  }

  auto best_on = [&](auto include) {
    std::size_t best = 0;
    double best_loss = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double l = 0.0;
      std::size_t n = 0;
      for (std::size_t si = 0; si < stories.size(); ++si)
        if (include(si)) {
          l += story_loss[g][si];
          ++n;
        }
      l /= static_cast<double>(n);
      if (g == 0 || l < best_loss - 1e-12) {
        best = g;
        best_loss = l;
      }
    }
    return std::pair{best, best_loss};
  };

  double cv = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    const auto [g, _] = best_on([&](std::size_t si) { return si % folds != f; });
    double held = 0.0;
    std::size_t n = 0;
    for (std::size_t si = f; si < stories.size(); si += folds) {
      held += story_loss[g][si];
      ++n;
    }
    cv += held / static_cast<double>(n);
  }
  const auto [g, loss] = best_on([](std::size_t) { return true; });
  return {grid[g], loss, cv / static_cast<double>(folds)};
}

// --- evaluation against human curves -------------------------------------

struct RankPair {
  double rho = 0.0;
  double tau = 0.0;
};

struct StoryScore {
  std::string story_id;
  RankPair mean;           // averaged over annotators (or annotator pairs)
  std::size_t used = 0;    // annotators or pairs that entered the mean
  std::size_t points = 0;  // aligned sentence positions
};

struct CorpusScore {
  std::vector<StoryScore> stories;
  RankPair mean;  // averaged over stories
  std::vector<std::string> warnings;
};

namespace detail {

inline std::optional<RankPair> rank_pair(const Series& a, const Series& b, std::size_t* points = nullptr) {
  const auto [x, y] = align_present(a, b);
  if (points) *points = x.size();
  try {
    return RankPair{spearman(x, y), kendall(x, y)};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DegenerateSeries) return std::nullopt;
    throw;
  }
}

inline Series zscore_or_raw(const Series& s) {
  try {
    return zscore(s);
  } catch (const Error&) {
    return s;
  }
}

}  // namespace detail

/// Mean over annotators of rho/tau between the z-scored model series and
/// each z-scored absolute human curve. Annotators whose curve cannot be
/// correlated (constant, too short) are left out; nullopt if none remain.
inline std::optional<StoryScore> evaluate_story(const Story& story, const Series& model,
                                                std::span<const AnnotationSet* const> annotations,
                                                const JudgmentMapping& mapping) {
  const auto zmodel = detail::zscore_or_raw(model);
  StoryScore score{story.id, {}, 0, 0};
  for (const auto* a : annotations) {
    const auto human = detail::zscore_or_raw(absolute_curve(story, *a, mapping));
    std::size_t points = 0;
    auto rp = detail::rank_pair(zmodel, human, &points);
    score.points = std::max(score.points, points);
    if (!rp) continue;
    score.mean.rho += rp->rho;
    score.mean.tau += rp->tau;
    ++score.used;
  }
  if (score.used == 0) return std::nullopt;
  score.mean.rho /= static_cast<double>(score.used);
  score.mean.tau /= static_cast<double>(score.used);
  return score;
}

/// Story-level means averaged again over stories. Stories without a model
/// series or without annotations are skipped with a warning.
inline CorpusScore evaluate_model(const Corpus& corpus, const std::map<std::string, Series>& series,
                                  const std::vector<AnnotationSet>& annotations, const JudgmentMapping& mapping) {
  CorpusScore out;
  const auto by_story = group_by_story(annotations);
  for (const auto& story : corpus.stories()) {
    auto s = series.find(story.id);
    auto a = by_story.find(story.id);
    if (s == series.end()) continue;
    if (a == by_story.end()) {
      out.warnings.push_back(story.id + ": no annotations, story excluded");
      continue;
    }
    auto score = evaluate_story(story, s->second, a->second, mapping);
    if (!score) {
      out.warnings.push_back(story.id + ": no correlatable annotator curve, story excluded");
      continue;
    }
    out.stories.push_back(*score);
  }
  if (out.stories.empty()) throw Error(ErrorKind::InsufficientData, "no story could be evaluated");
  for (const auto& s : out.stories) {
    out.mean.rho += s.mean.rho;
    out.mean.tau += s.mean.tau;
  }
  out.mean.rho /= static_cast<double>(out.stories.size());
  out.mean.tau /= static_cast<double>(out.stories.size());
  return out;
}

/// Mean pairwise correlation between annotators, averaged over stories.
inline CorpusScore human_upper_bound(const Corpus& corpus, const std::vector<AnnotationSet>& annotations,
                                     const JudgmentMapping& mapping) {
  CorpusScore out;
  const auto by_story = group_by_story(annotations);
  for (const auto& story : corpus.stories()) {
    auto it = by_story.find(story.id);
    if (it == by_story.end()) continue;
    const auto& sets = it->second;
    if (sets.size() < 2) {
      out.warnings.push_back(story.id + ": single annotator, story excluded");
      continue;
    }
    std::vector<Series> curves;
    for (const auto* a : sets) curves.push_back(detail::zscore_or_raw(absolute_curve(story, *a, mapping)));
    StoryScore score{story.id, {}, 0, 0};
    for (std::size_t i = 0; i < curves.size(); ++i)
      for (std::size_t j = i + 1; j < curves.size(); ++j) {
        std::size_t points = 0;
        auto rp = detail::rank_pair(curves[i], curves[j], &points);
        score.points = std::max(score.points, points);
        if (!rp) continue;
        score.mean.rho += rp->rho;
        score.mean.tau += rp->tau;
        ++score.used;
      }
    if (score.used == 0) {
      out.warnings.push_back(story.id + ": no correlatable annotator pair, story excluded");
      continue;
    }
    score.mean.rho /= static_cast<double>(score.used);
    score.mean.tau /= static_cast<double>(score.used);
    out.stories.push_back(score);
  }
  if (out.stories.empty()) throw Error(ErrorKind::InsufficientAnnotators, "no story has two correlatable annotators");
  for (const auto& s : out.stories) {
    out.mean.rho += s.mean.rho;
    out.mean.tau += s.mean.tau;
  }
  out.mean.rho /= static_cast<double>(out.stories.size());
  out.mean.tau /= static_cast<double>(out.stories.size());
  return out;
}

}  // namespace suspense
