#pragma once

// Batch commands behind the `suspense` executable. Each command reads its
// inputs, computes everything in memory, and only then writes its outputs.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "suspense/agreement.hpp"
#include "suspense/annotation.hpp"
#include "suspense/continuation.hpp"
#include "suspense/correlation.hpp"
#include "suspense/embedding.hpp"
#include "suspense/error.hpp"
#include "suspense/io.hpp"
#include "suspense/measure_io.hpp"
#include "suspense/measures.hpp"
#include "suspense/plot.hpp"
#include "suspense/story.hpp"
#include "suspense/turning_points.hpp"

namespace suspense::cli {

struct RunConfig {
  // inputs
  std::string stories;
  std::string embeddings;
  std::string continuations;
  std::string sentiment;
  std::string annotations;
  std::string tp_gold;
  std::string measure_file;  // measure CSV consumed by evaluate / turning-points / plot

  // analysis
  std::vector<std::string> measures{"S_Ely"};
  std::string metric = "L1";
  int rollout = 1;
  double temperature = 1.0;
  std::string alpha_mode = "magnitude";
  std::string source = "corpus";
  std::vector<std::size_t> branching;  // empty: default for the rollout
  double default_candidate_alpha = 1.0;
  bool similarity_as_change = true;

  // evaluation
  std::vector<double> mapping{-0.2, -0.1, 0.0, 0.1, 0.2};
  bool fit_mapping = false;
  std::size_t folds = 5;
  double ci_p = 0.05;

  // agreement
  std::string agreement_level = "ordinal";
  double min_alpha = 0.35;
  double min_rt_ms = 600.0;

  // turning points
  std::vector<double> tp_positions{0.10, 0.25, 0.50, 0.75, 0.90};
  std::vector<double> tp_windows{0.10, 0.10, 0.10, 0.10, 0.10};

  // mock embedder
  std::size_t dim = 64;
  double context_decay = 0.0;

  // plot
  std::string story;

  std::uint64_t seed = 0;
  std::string out = "out";
};

namespace detail {

inline void require_path(const std::string& path, const std::string& key) {
  if (path.empty()) throw Error(ErrorKind::InvalidConfig, "missing required input '" + key + "'");
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::Io, key + ": '" + path + "' does not exist");
}

/// Files are staged in memory and written together once a command succeeded.
class OutputSet {
 public:
  explicit OutputSet(std::string dir) : dir_(std::move(dir)) {}

  std::ostringstream& file(const std::string& name) { return files_[name]; }

  std::vector<std::string> commit() const {
    std::filesystem::create_directories(dir_);
    std::vector<std::string> written;
    for (const auto& [name, content] : files_) {
      const auto path = (std::filesystem::path(dir_) / name).string();
      std::ofstream f(path, std::ios::binary);
      if (!f) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
      f << content.str();
      written.push_back(path);
    }
    return written;
  }

 private:
  std::string dir_;
  std::map<std::string, std::ostringstream> files_;
};

inline AnalysisConfig analysis_config(const RunConfig& rc) {
  AnalysisConfig cfg;
  for (const auto& m : rc.measures) cfg.measures.push_back(parse_measure(m));
  cfg.series.metric = parse_metric(rc.metric);
  if (rc.rollout < 1 || rc.rollout > kMaxRolloutDepth) throw Error(ErrorKind::InvalidConfig, "rollout must be 1, 2 or 3");
  cfg.series.rollout = rc.rollout;
  cfg.series.source = parse_candidate_source(rc.source);
  if (!(rc.temperature > 0.0)) throw Error(ErrorKind::InvalidConfig, "temperature must be positive");
  cfg.series.temperature = rc.temperature;
  if (rc.alpha_mode == "magnitude")
    cfg.alpha_mode = AlphaMode::magnitude;
  else if (rc.alpha_mode == "signed")
    cfg.alpha_mode = AlphaMode::signed_score;
  else
    throw Error(ErrorKind::InvalidConfig, "alpha_mode must be magnitude or signed");
  cfg.default_candidate_alpha = rc.default_candidate_alpha;
  cfg.similarity_as_change = rc.similarity_as_change;
  return cfg;
}

inline JudgmentMapping mapping_from(const RunConfig& rc) {
  if (rc.mapping.size() != kLabelCount) throw Error(ErrorKind::InvalidConfig, "mapping needs 5 values");
  JudgmentMapping m;
  for (std::size_t i = 0; i < kLabelCount; ++i) m.values[i] = rc.mapping[i];
  m.validate();
  return m;
}

inline TPConfig tp_config_from(const RunConfig& rc) {
  if (rc.tp_positions.size() != kTurningPoints || rc.tp_windows.size() != kTurningPoints)
    throw Error(ErrorKind::InvalidConfig, "tp_positions and tp_windows need 5 values each");
  TPConfig c;
  for (std::size_t k = 0; k < kTurningPoints; ++k) {
    c.positions[k] = rc.tp_positions[k];
    c.half_widths[k] = rc.tp_windows[k];
  }
  c.validate();
  return c;
}

struct Summary {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Mean with a normal-approximation interval.
inline Summary mean_ci(const std::vector<double>& xs, double p) {
  Summary s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) {
    s.lo = s.hi = s.mean;
    return s;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  const double se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  const double hw = normal_critical_value(p) * se;
  s.lo = s.mean - hw;
  s.hi = s.mean + hw;
  return s;
}

/// Fisher interval, degenerate at |r| = 1 where the transform is unbounded.
inline std::optional<Interval> correlation_ci(double r, std::size_t n, double p) {
  if (n <= 3) return std::nullopt;
  if (r >= 1.0 || r <= -1.0) return Interval{r, r};
  return fisher_ci(r, n, p);
}

inline std::string opt(const std::optional<double>& v) { return io::format_optional(v); }

}  // namespace detail

// --- analyze --------------------------------------------------------------

struct AnalysisResult {
  std::vector<MeasureSeries> series;
};

inline AnalysisResult run_analysis(const RunConfig& rc) {
  detail::require_path(rc.stories, "stories");
  detail::require_path(rc.embeddings, "embeddings");
  const auto cfg = detail::analysis_config(rc);
  const auto corpus = load_stories(rc.stories);
  const auto embeddings = load_embeddings(rc.embeddings, &corpus);

  bool wants_candidates = false, wants_sentiment = false;
  for (Measure m : cfg.measures) {
    wants_candidates |= needs_candidates(m);
    wants_sentiment |= needs_sentiment(m);
  }
  SentimentSet sentiment;
  if (wants_sentiment) {
    detail::require_path(rc.sentiment, "sentiment");
    sentiment = load_sentiment(rc.sentiment);
  } else if (!rc.sentiment.empty()) {
    sentiment = load_sentiment(rc.sentiment);
  }
  TreeSet trees;
  const bool sample_corpus = wants_candidates && cfg.series.source == CandidateSource::corpus && rc.continuations.empty();
  if (wants_candidates && !sample_corpus) {
    if (rc.continuations.empty())
      throw Error(ErrorKind::MissingTree, "generated candidates requested but no continuations file given");
    detail::require_path(rc.continuations, "continuations");
    trees = load_continuations(rc.continuations);
  }
  const auto branching = rc.branching.empty() ? default_branching(cfg.series.rollout) : rc.branching;

  AnalysisResult result;
  for (const auto& story : corpus.stories()) {
    auto emb = embeddings.find(story.id);
    if (emb == embeddings.end()) throw Error(ErrorKind::MissingSentence, story.id + ": no embeddings");
    StoryTrees sampled;
    const StoryTrees* story_trees = nullptr;
    if (sample_corpus) {
      for (std::size_t idx : story.active_indices())
        sampled.emplace(idx, build_corpus_tree(story.id, idx, corpus, embeddings, branching, rc.seed));
      story_trees = &sampled;
    } else if (auto it = trees.find(story.id); it != trees.end()) {
      story_trees = &it->second;
    }
    StoryInputs in{story, emb->second, story_trees, &sentiment};
    auto series = compute_series(in, cfg);
    for (auto& s : series) result.series.push_back(std::move(s));
  }
  return result;
}

inline int cmd_analyze(const RunConfig& rc, std::ostream& log) {
  const auto result = run_analysis(rc);
  detail::OutputSet out(rc.out);
  write_measures_csv(out.file("measures.csv"), result.series);
  write_measures_jsonl(out.file("measures.jsonl"), result.series);
  for (const auto& p : out.commit()) log << "wrote " << p << '\n';
  return 0;
}

// --- mock-embed -------------------------------------------------------------

inline int cmd_mock_embed(const RunConfig& rc, std::ostream& log) {
  detail::require_path(rc.stories, "stories");
  const auto corpus = load_stories(rc.stories);
  EmbeddingSet set;
  for (const auto& story : corpus.stories()) {
    auto m = mock_embed(story, rc.dim, rc.seed);
    set.emplace(story.id, rc.context_decay > 0.0 ? contextualize(m, rc.context_decay) : std::move(m));
  }
  detail::OutputSet out(rc.out);
  write_embeddings(out.file("embeddings.jsonl"), set);
  for (const auto& p : out.commit()) log << "wrote " << p << '\n';
  return 0;
}

// --- evaluate ---------------------------------------------------------------

struct CorrelationRow {
  std::string story_id;  // "ALL" for aggregates
  std::string measure;
  int rollout = 0;
  std::string source;
  double tau = 0.0;
  double rho = 0.0;
  std::optional<double> tau_lo, tau_hi, rho_lo, rho_hi;
  std::size_t n = 0;  // annotators / pairs for story rows, stories for aggregates
};

struct EvaluationReport {
  std::vector<CorrelationRow> rows;
  std::vector<std::string> warnings;
  JudgmentMapping mapping;
  std::optional<MappingFit> fit;
};

inline EvaluationReport run_evaluation(const RunConfig& rc) {
  detail::require_path(rc.stories, "stories");
  detail::require_path(rc.annotations, "annotations");
  detail::require_path(rc.measure_file, "measure_file");
  const auto corpus = load_stories(rc.stories);
  const auto annotations = load_annotations(rc.annotations);
  const auto series = read_measures_csv(rc.measure_file);

  EvaluationReport report;
  report.mapping = detail::mapping_from(rc);
  if (rc.fit_mapping) {
    report.fit = fit_mapping(annotations, rc.folds, FitTarget::cross_annotator);
    report.mapping = report.fit->mapping;
  }

  std::set<std::string> annotated;
  for (const auto& a : annotations) annotated.insert(a.story_id);
  bool overlap = false;
  for (const auto& s : series)
    if (annotated.count(s.story_id) && corpus.find(s.story_id)) overlap = true;
  if (!overlap) throw Error(ErrorKind::InsufficientData, "no story has both model series and annotations");

  auto aggregate = [&](CorrelationRow row, const CorpusScore& score) {
    row.story_id = "ALL";
    row.rho = score.mean.rho;
    row.tau = score.mean.tau;
    row.n = score.stories.size();
    if (auto ci = detail::correlation_ci(row.rho, row.n, rc.ci_p)) {
      row.rho_lo = ci->lo;
      row.rho_hi = ci->hi;
    }
    if (auto ci = detail::correlation_ci(row.tau, row.n, rc.ci_p)) {
      row.tau_lo = ci->lo;
      row.tau_hi = ci->hi;
    }
    return row;
  };

  const auto human = human_upper_bound(corpus, annotations, report.mapping);
  report.rows.push_back(aggregate(CorrelationRow{"", "Human", 0, "", 0, 0, {}, {}, {}, {}, 0}, human));
  for (const auto& w : human.warnings) report.warnings.push_back(w);

  // group series by (measure, rollout, source)
  std::map<std::string, std::pair<const MeasureSeries*, std::map<std::string, Series>>> groups;
  std::vector<std::string> group_order;
  for (const auto& s : series) {
    const auto key = series_label(s);
    if (!groups.count(key)) group_order.push_back(key);
    auto& g = groups[key];
    if (!g.first) g.first = &s;
    g.second[s.story_id] = s.values;
  }
  for (const auto& key : group_order) {
    const auto& [proto, by_story] = groups.at(key);
    const auto score = evaluate_model(corpus, by_story, annotations, report.mapping);
    const std::string measure(to_string(proto->measure));
    const std::string source(needs_candidates(proto->measure) ? to_string(proto->config.source) : "");
    for (const auto& st : score.stories)
      report.rows.push_back(
          CorrelationRow{st.story_id, measure, proto->config.rollout, source, st.mean.tau, st.mean.rho, {}, {}, {}, {}, st.used});
    report.rows.push_back(aggregate(CorrelationRow{"", measure, proto->config.rollout, source, 0, 0, {}, {}, {}, {}, 0}, score));
    for (const auto& w : score.warnings) report.warnings.push_back(key + ": " + w);
  }
  return report;
}

inline int cmd_evaluate(const RunConfig& rc, std::ostream& log) {
  const auto report = run_evaluation(rc);
  detail::OutputSet out(rc.out);
  auto& csv = out.file("correlations.csv");
  csv << "#schema=suspense.correlations/1\n";
  csv << "story_id,measure,rollout,source,tau,rho,tau_ci_lo,tau_ci_hi,rho_ci_lo,rho_ci_hi,n\n";
  nlohmann::ordered_json doc;
  doc["schema"] = "suspense.correlations/1";
  doc["mapping"] = report.mapping.values;
  if (report.fit) {
    doc["mapping_fit"] = {{"loss", report.fit->loss}, {"cv_loss", report.fit->cv_loss}};
  }
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    csv << io::csv_join({r.story_id, r.measure, r.rollout ? std::to_string(r.rollout) : "", r.source,
                         io::format_double(r.tau), io::format_double(r.rho), detail::opt(r.tau_lo),
                         detail::opt(r.tau_hi), detail::opt(r.rho_lo), detail::opt(r.rho_hi), std::to_string(r.n)})
        << '\n';
    nlohmann::ordered_json row;
    row["story_id"] = r.story_id;
    row["measure"] = r.measure;
    row["rollout"] = r.rollout;
    row["source"] = r.source;
    row["tau"] = r.tau;
    row["rho"] = r.rho;
    auto put = [&](const char* k, const std::optional<double>& v) {
      row[k] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    put("tau_ci_lo", r.tau_lo);
    put("tau_ci_hi", r.tau_hi);
    put("rho_ci_lo", r.rho_lo);
    put("rho_ci_hi", r.rho_hi);
    row["n"] = r.n;
    doc["rows"].push_back(row);
  }
  doc["warnings"] = report.warnings;
  out.file("correlations.json") << doc.dump(2) << '\n';
  for (const auto& w : report.warnings) log << "warning: " << w << '\n';
  for (const auto& p : out.commit()) log << "wrote " << p << '\n';
  return 0;
}

// --- turning-points -------------------------------------------------------

struct TPRow {
  std::string synopsis_id;  // "ALL" for aggregates
  std::string measure;
  double d = 0.0;
  std::vector<double> errors;                // per turning point, percentage points
  std::vector<std::size_t> predicted;        // empty on aggregate rows
  std::optional<double> ci_lo, ci_hi;
};

inline std::vector<TPRow> run_turning_points(const RunConfig& rc, std::vector<std::string>* warnings = nullptr) {
  detail::require_path(rc.measure_file, "measure_file");
  detail::require_path(rc.tp_gold, "tp_gold");
  const auto tp_cfg = detail::tp_config_from(rc);
  const auto series = read_measures_csv(rc.measure_file);
  std::map<std::string, TPGold> gold;
  for (auto& g : load_tp_gold(rc.tp_gold)) gold.emplace(g.synopsis_id, std::move(g));

  std::vector<TPRow> rows;
  std::vector<std::string> order;
  std::map<std::string, std::size_t> lengths;

  std::vector<TPRow> per_series;
  for (const auto& s : series) {
    auto g = gold.find(s.story_id);
    if (g == gold.end()) {
      if (warnings) warnings->push_back(s.story_id + ": no gold turning points");
      continue;
    }
    const std::size_t n = s.values.size();
    for (auto idx : g->second.indices)
      if (idx >= n) throw Error(ErrorKind::OutOfRange, s.story_id + ": gold index beyond synopsis length");
    lengths[s.story_id] = n;
    const auto pred = predict_tps(s.values, tp_cfg);
    TPRow row{s.story_id, series_label(s), tp_distance(pred, g->second.indices, n),
              tp_errors(pred, g->second.indices, n), std::vector<std::size_t>(pred.begin(), pred.end()), {}, {}};
    per_series.push_back(std::move(row));
  }
  if (per_series.empty()) throw Error(ErrorKind::InsufficientData, "no synopsis has both a series and gold turning points");

  for (const auto& [id, n] : lengths) {
    const auto pred = theory_baseline(n, tp_cfg.positions);
    per_series.push_back(TPRow{id, "Theory", tp_distance(pred, gold.at(id).indices, n),
                               tp_errors(pred, gold.at(id).indices, n), pred, {}, {}});
  }

  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < per_series.size(); ++i) {
    if (!members.count(per_series[i].measure)) order.push_back(per_series[i].measure);
    members[per_series[i].measure].push_back(i);
  }
  for (const auto& m : order) {
    std::vector<double> ds;
    std::vector<double> err_sum(kTurningPoints, 0.0);
    for (std::size_t i : members[m]) {
      rows.push_back(per_series[i]);
      ds.push_back(per_series[i].d);
      for (std::size_t k = 0; k < kTurningPoints; ++k) err_sum[k] += per_series[i].errors[k];
    }
    for (double& e : err_sum) e /= static_cast<double>(ds.size());
    const auto summary = detail::mean_ci(ds, rc.ci_p);
    rows.push_back(TPRow{"ALL", m, summary.mean, err_sum, {}, summary.lo, summary.hi});
  }
  return rows;
}

inline int cmd_turning_points(const RunConfig& rc, std::ostream& log) {
  std::vector<std::string> warnings;
  const auto rows = run_turning_points(rc, &warnings);
  detail::OutputSet out(rc.out);
  auto& csv = out.file("tp_report.csv");
  csv << "#schema=suspense.turning_points/1\n";
  csv << "synopsis_id,measure,D,err_tp1,err_tp2,err_tp3,err_tp4,err_tp5,pred_tp1,pred_tp2,pred_tp3,pred_tp4,pred_tp5,"
         "ci_lo,ci_hi\n";
  for (const auto& r : rows) {
    std::vector<std::string> f{r.synopsis_id, r.measure, io::format_double(r.d)};
    for (double e : r.errors) f.push_back(io::format_double(e));
    for (std::size_t k = 0; k < kTurningPoints; ++k)
      f.push_back(k < r.predicted.size() ? std::to_string(r.predicted[k]) : "");
    f.push_back(detail::opt(r.ci_lo));
    f.push_back(detail::opt(r.ci_hi));
    csv << io::csv_join(f) << '\n';
  }
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  for (const auto& p : out.commit()) log << "wrote " << p << '\n';
  return 0;
}

// --- agreement ------------------------------------------------------------

struct AgreementReport {
  double alpha = 0.0;
  std::map<std::string, AnnotatorStats> annotators;
  std::vector<std::string> flagged;
};

inline AgreementReport run_agreement(const RunConfig& rc) {
  detail::require_path(rc.annotations, "annotations");
  const auto level = parse_agreement_level(rc.agreement_level);
  const auto sets = load_annotations(rc.annotations);
  AgreementReport r;
  r.alpha = krippendorff_alpha(units_from_annotations(sets), level);
  r.annotators = annotator_agreement(sets, level);
  r.flagged = screen_annotators(r.annotators, {rc.min_alpha, rc.min_rt_ms});
  return r;
}

inline int cmd_agreement(const RunConfig& rc, std::ostream& log) {
  const auto r = run_agreement(rc);
  nlohmann::ordered_json doc;
  doc["schema"] = "suspense.agreement/1";
  doc["level"] = rc.agreement_level;
  doc["alpha"] = r.alpha;
  doc["thresholds"] = {{"min_alpha", rc.min_alpha}, {"min_rt_ms", rc.min_rt_ms}};
  doc["annotators"] = nlohmann::ordered_json::array();
  for (const auto& [id, s] : r.annotators) {
    nlohmann::ordered_json a;
    a["annotator_id"] = id;
    a["mean_alpha"] = s.mean_alpha ? nlohmann::ordered_json(*s.mean_alpha) : nlohmann::ordered_json(nullptr);
    a["mean_rt_ms"] = s.mean_rt_ms ? nlohmann::ordered_json(*s.mean_rt_ms) : nlohmann::ordered_json(nullptr);
    a["stories"] = s.stories;
    doc["annotators"].push_back(a);
  }
  doc["flagged"] = r.flagged;
  detail::OutputSet out(rc.out);
  out.file("agreement.json") << doc.dump(2) << '\n';
  log << "krippendorff alpha (" << rc.agreement_level << "): " << io::format_double(r.alpha) << '\n';
  for (const auto& p : out.commit()) log << "wrote " << p << '\n';
  return 0;
}

// --- plot -----------------------------------------------------------------

inline int cmd_plot(const RunConfig& rc, std::ostream& log) {
  detail::require_path(rc.measure_file, "measure_file");
  if (rc.story.empty()) throw Error(ErrorKind::InvalidConfig, "plot needs --story");
  std::vector<PlotCurve> curves;
  for (const auto& s : read_measures_csv(rc.measure_file))
    if (s.story_id == rc.story) curves.push_back({series_label(s), s.values});
  if (curves.empty()) throw Error(ErrorKind::InsufficientData, "story '" + rc.story + "' not in " + rc.measure_file);
  std::string fname;
  for (char c : rc.story) fname += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  detail::OutputSet out(rc.out);
  write_svg(out.file(fname + ".svg"), rc.story, curves);
  for (const auto& p : out.commit()) log << "wrote " << p << '\n';
  return 0;
}

/// Runs `fn` and maps failures to exit codes: 2 for input and validation
/// errors, 1 for anything unexpected.
template <typename Fn>
int guarded(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace suspense::cli
