#pragma once

// Measure series files: CSV (story_id, sentence_idx, measure, value, metric,
// rollout, source) preceded by a schema line, and a JSONL mirror.

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "suspense/error.hpp"
#include "suspense/io.hpp"
#include "suspense/measures.hpp"

namespace suspense {

inline constexpr std::string_view kMeasureSchema = "suspense.measures/1";
inline constexpr std::string_view kMeasureHeader = "story_id,sentence_idx,measure,value,metric,rollout,source";

inline void write_measures_csv(std::ostream& out, const std::vector<MeasureSeries>& all) {
  out << "#schema=" << kMeasureSchema << '\n' << kMeasureHeader << '\n';
  for (const auto& s : all)
    for (std::size_t i = 0; i < s.values.size(); ++i)
      out << io::csv_join({s.story_id, std::to_string(i), std::string(to_string(s.measure)),
                           io::format_optional(s.values[i]), std::string(to_string(s.config.metric)),
                           std::to_string(s.config.rollout), std::string(to_string(s.config.source))})
          << '\n';
}

inline void write_measures_jsonl(std::ostream& out, const std::vector<MeasureSeries>& all) {
  for (const auto& s : all)
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      // ordered_json keeps the column order of the CSV
      nlohmann::ordered_json obj;
      obj["schema"] = kMeasureSchema;
      obj["story_id"] = s.story_id;
      obj["sentence_idx"] = i;
      obj["measure"] = to_string(s.measure);
      obj["value"] = s.values[i] ? nlohmann::ordered_json(*s.values[i]) : nlohmann::ordered_json(nullptr);
      obj["metric"] = to_string(s.config.metric);
      obj["rollout"] = s.config.rollout;
      obj["source"] = to_string(s.config.source);
      out << obj.dump() << '\n';
    }
}

/// Reads a measure CSV back into series, in order of first appearance.
inline std::vector<MeasureSeries> read_measures_csv(std::istream& in, const std::string& source = "<stream>") {
  using Key = std::tuple<std::string, Measure, DistanceMetric, int, CandidateSource>;
  std::vector<MeasureSeries> out;
  std::map<Key, std::size_t> slot;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kMeasureHeader) throw Error(ErrorKind::MalformedLine, io::where(source, line_no) + ": bad header");
      header_seen = true;
      continue;
    }
    const auto f = io::csv_split(line);
    if (f.size() != 7) throw Error(ErrorKind::MalformedLine, io::where(source, line_no) + ": expected 7 fields");
    try {
      const auto idx = static_cast<std::size_t>(std::stoul(f[1]));
      SeriesConfig cfg{parse_metric(f[4]), std::stoi(f[5]), parse_candidate_source(f[6]), 1.0};
      const Key key{f[0], parse_measure(f[2]), cfg.metric, cfg.rollout, cfg.source};
      auto it = slot.find(key);
      if (it == slot.end()) {
        it = slot.emplace(key, out.size()).first;
        out.push_back(MeasureSeries{f[0], std::get<1>(key), {}, cfg});
      }
      auto& s = out[it->second];
      if (s.values.size() <= idx) s.values.resize(idx + 1);
      s.values[idx] = io::parse_optional_double(f[3]);
    } catch (const Error& e) {
      throw Error(ErrorKind::MalformedLine, io::where(source, line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::MalformedLine, io::where(source, line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<MeasureSeries> read_measures_csv(const std::string& path) {
  auto in = io::open_input(path);
  return read_measures_csv(in, path);
}

/// Label used in reports: measure plus rollout and candidate source where relevant.
inline std::string series_label(const MeasureSeries& s) {
  std::string label(to_string(s.measure));
  if (needs_candidates(s.measure))
    label += std::string("-") + (s.config.source == CandidateSource::corpus ? "Cor" : "Gen") + "-r" +
             std::to_string(s.config.rollout);
  return label;
}

}  // namespace suspense
