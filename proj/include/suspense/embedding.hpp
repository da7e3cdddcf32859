#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>

#include "suspense/error.hpp"
#include "suspense/io.hpp"
#include "suspense/story.hpp"
#include "suspense/vector_math.hpp"

namespace suspense {

struct EmbeddingMatrix {
  std::string story_id;
  std::size_t dim = 0;
  std::map<std::size_t, Vector> vectors;  // keyed by sentence index

  bool contains(std::size_t idx) const { return vectors.count(idx) != 0; }

  const Vector& at(std::size_t idx) const {
    auto it = vectors.find(idx);
    if (it == vectors.end())
      throw Error(ErrorKind::MissingSentence, story_id + "[" + std::to_string(idx) + "]");
    return it->second;
  }

  bool operator==(const EmbeddingMatrix&) const = default;
};

using EmbeddingSet = std::map<std::string, EmbeddingMatrix>;

struct SentimentScores {
  std::string story_id;
  std::map<std::size_t, double> scores;

  std::optional<double> get(std::size_t idx) const {
    auto it = scores.find(idx);
    if (it == scores.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const SentimentScores&) const = default;
};

using SentimentSet = std::map<std::string, SentimentScores>;

struct AlphaSeries {
  std::string story_id;
  std::map<std::size_t, double> alphas;
};

enum class AlphaMode { magnitude, signed_score };

inline constexpr double kPositiveSentimentWeight = 1.0;
inline constexpr double kNegativeSentimentWeight = 2.0;

/// Importance weight from a sentiment score in [-1, 1]. Negative sentiment
/// counts double. In magnitude mode the result is |score| times the
/// sign-dependent multiplier; signed mode keeps the sign of the score.
inline double alpha_weight(double score, AlphaMode mode = AlphaMode::magnitude) {
  if (!std::isfinite(score) || std::fabs(score) > 1.0)
    throw Error(ErrorKind::OutOfRange, "sentiment score " + io::format_double(score) + " outside [-1, 1]");
  const double mult = score >= 0.0 ? kPositiveSentimentWeight : kNegativeSentimentWeight;
  return (mode == AlphaMode::magnitude ? std::fabs(score) : score) * mult;
}

inline AlphaSeries make_alpha_series(const SentimentScores& sentiment, AlphaMode mode = AlphaMode::magnitude) {
  AlphaSeries out{sentiment.story_id, {}};
  for (const auto& [idx, score] : sentiment.scores) out.alphas[idx] = alpha_weight(score, mode);
  return out;
}

// --- loading -------------------------------------------------------------

namespace detail {

inline Vector parse_vector(const io::json& arr, const std::string& where) {
  if (!arr.is_array()) throw Error(ErrorKind::MalformedLine, where + ": \"vector\" is not an array");
  Vector v;
  v.reserve(arr.size());
  for (const auto& x : arr) {
    if (x.is_null()) throw Error(ErrorKind::NonFiniteComponent, where);
    if (!x.is_number()) throw Error(ErrorKind::MalformedLine, where + ": non-numeric component");
    const double d = x.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorKind::NonFiniteComponent, where);
    v.push_back(d);
  }
  return v;
}

// nlohmann::json rejects NaN/Infinity literals; accept them so they surface
// as NonFiniteComponent instead of a generic parse failure.
inline std::string neutralise_nonfinite_literals(std::string line) {
  for (std::string_view lit : {"-Infinity", "Infinity", "NaN"}) {
    std::size_t pos = 0;
    while ((pos = line.find(lit, pos)) != std::string::npos) {
      std::size_t before = pos;
      while (before > 0 && line[before - 1] == ' ') --before;
      const bool value_start = before > 0 && (line[before - 1] == '[' || line[before - 1] == ',');
      const std::size_t end = pos + lit.size();
      const bool value_end = end == line.size() || line[end] == ',' || line[end] == ']' || line[end] == ' ';
      if (value_start && value_end) {
        line.replace(pos, lit.size(), "null");
        pos += 4;
      } else {
        pos = end;
      }
    }
  }
  return line;
}

inline void for_each_record(std::istream& in, const std::string& source,
                            const std::function<void(const io::json&, std::size_t)>& fn) {
  std::stringstream cleaned;
  std::string line;
  while (std::getline(in, line)) cleaned << neutralise_nonfinite_literals(std::move(line)) << '\n';
  io::for_each_jsonl(cleaned, source, fn);
}

}  // namespace detail

/// Every non-skipped sentence of every story in `corpus` that has embeddings
/// must have a vector.
inline void check_complete(const EmbeddingSet& set, const Corpus& corpus) {
  for (const auto& story : corpus.stories()) {
    auto it = set.find(story.id);
    if (it == set.end()) continue;
    for (std::size_t idx : story.active_indices())
      if (!it->second.contains(idx))
        throw Error(ErrorKind::MissingSentence, story.id + "[" + std::to_string(idx) + "]");
  }
}

inline EmbeddingSet load_embeddings(std::istream& in, const std::string& source = "<stream>",
                                    const Corpus* corpus = nullptr) {
  EmbeddingSet set;
  std::optional<std::size_t> file_dim;
  detail::for_each_record(in, source, [&](const io::json& obj, std::size_t line_no) {
    const auto where = io::where(source, line_no);
    const auto story_id = obj.at("story_id").get<std::string>();
    const auto idx = obj.at("sentence_idx").get<std::size_t>();
    auto vec = detail::parse_vector(obj.at("vector"), where);
    if (vec.empty()) throw Error(ErrorKind::MalformedLine, where + ": empty vector");
    if (!file_dim) file_dim = vec.size();
    if (vec.size() != *file_dim)
      throw Error(ErrorKind::DimMismatch, where + ": " + story_id + "[" + std::to_string(idx) + "] has dim " +
                                              std::to_string(vec.size()) + ", expected " + std::to_string(*file_dim));
    auto& m = set[story_id];
    m.story_id = story_id;
    m.dim = *file_dim;
    if (!m.vectors.emplace(idx, std::move(vec)).second)
      throw Error(ErrorKind::MalformedLine, where + ": duplicate vector for " + story_id + "[" + std::to_string(idx) + "]");
  });
  if (corpus) check_complete(set, *corpus);
  return set;
}

inline EmbeddingSet load_embeddings(const std::string& path, const Corpus* corpus = nullptr) {
  auto in = io::open_input(path);
  return load_embeddings(in, path, corpus);
}

inline void write_embeddings(std::ostream& out, const EmbeddingSet& set) {
  for (const auto& [id, m] : set)
    for (const auto& [idx, v] : m.vectors) {
      io::json obj;
      obj["story_id"] = id;
      obj["sentence_idx"] = idx;
      obj["vector"] = v;
      out << obj.dump() << '\n';
    }
}

inline SentimentSet load_sentiment(std::istream& in, const std::string& source = "<stream>") {
  SentimentSet set;
  io::for_each_jsonl(in, source, [&](const io::json& obj, std::size_t line_no) {
    const auto story_id = obj.at("story_id").get<std::string>();
    const auto idx = obj.at("sentence_idx").get<std::size_t>();
    const double score = obj.at("score").get<double>();
    if (!std::isfinite(score) || std::fabs(score) > 1.0)
      throw Error(ErrorKind::OutOfRange, io::where(source, line_no) + ": score outside [-1, 1]");
    auto& s = set[story_id];
    s.story_id = story_id;
    s.scores[idx] = score;
  });
  return set;
}

inline SentimentSet load_sentiment(const std::string& path) {
  auto in = io::open_input(path);
  return load_sentiment(in, path);
}

inline void write_sentiment(std::ostream& out, const SentimentSet& set) {
  for (const auto& [id, s] : set)
    for (const auto& [idx, score] : s.scores) {
      io::json obj;
      obj["story_id"] = id;
      obj["sentence_idx"] = idx;
      obj["score"] = score;
      out << obj.dump() << '\n';
    }
}

// --- deterministic test embedder ----------------------------------------

/// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Unit vector that is a pure function of (tokens, dim, seed): each token
/// owns a pseudo-random direction, the sentence vector is their normalised sum.
inline Vector mock_sentence_vector(const std::vector<std::string>& tokens, std::size_t dim, std::uint64_t seed) {
  Vector v(dim, 0.0);
  auto add_direction = [&](std::string_view key) {
    std::mt19937_64 gen(mix_seed(fnv1a(key), seed));
    for (std::size_t i = 0; i < dim; ++i) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0, 1)
      v[i] += 2.0 * u - 1.0;
    }
  };
  for (const auto& t : tokens) add_direction(t);
  if (tokens.empty()) add_direction("");
  if (l2_norm(v) == 0.0) v[0] = 1.0;
  normalize_in_place(v);
  return v;
}

inline EmbeddingMatrix mock_embed(const Story& story, std::size_t dim, std::uint64_t seed) {
  if (dim < 2) throw Error(ErrorKind::InvalidConfig, "mock_embed needs dim >= 2");
  EmbeddingMatrix m{story.id, dim, {}};
  for (const auto& s : story.sentences)
    if (!s.skipped) m.vectors.emplace(s.index, mock_sentence_vector(s.tokens, dim, seed));
  return m;
}

/// Left-context states from per-sentence vectors: the running sum
/// acc_t = decay * acc_{t-1} + x_t over non-skipped sentences, normalised.
/// decay = 0 returns the input vectors unchanged (they are unit length).
inline EmbeddingMatrix contextualize(const EmbeddingMatrix& m, double decay) {
  if (!(decay >= 0.0 && decay < 1.0)) throw Error(ErrorKind::InvalidConfig, "context decay must lie in [0, 1)");
  if (decay == 0.0) return m;
  EmbeddingMatrix out{m.story_id, m.dim, {}};
  Vector acc(m.dim, 0.0);
  for (const auto& [idx, x] : m.vectors) {
    for (std::size_t i = 0; i < m.dim; ++i) acc[i] = decay * acc[i] + x[i];
    Vector e = acc;
    normalize_in_place(e);
    out.vectors.emplace(idx, std::move(e));
  }
  return out;
}

}  // namespace suspense
