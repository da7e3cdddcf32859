#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "suspense/error.hpp"
#include "suspense/io.hpp"

namespace suspense {

struct Sentence {
  std::size_t index = 0;
  std::string text;   // as read from the corpus
  std::string clean;  // after symbol-run collapse and trimming
  std::vector<std::string> tokens;
  bool skipped = false;

  bool operator==(const Sentence&) const = default;
};

struct Story {
  std::string id;
  std::vector<Sentence> sentences;

  /// Indices of sentences that carry measure values, in story order.
  std::vector<std::size_t> active_indices() const {
    std::vector<std::size_t> out;
    for (const auto& s : sentences)
      if (!s.skipped) out.push_back(s.index);
    return out;
  }

  std::size_t active_count() const {
    return static_cast<std::size_t>(
        std::count_if(sentences.begin(), sentences.end(), [](const Sentence& s) { return !s.skipped; }));
  }

  bool operator==(const Story&) const = default;
};

enum class Split { train, dev, test };

/// Stories in file order with an id index; immutable once loaded.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(Split split) : split_(split) {}

  void add(Story story) {
    if (index_.count(story.id)) throw Error(ErrorKind::DuplicateStoryId, story.id);
    index_.emplace(story.id, stories_.size());
    stories_.push_back(std::move(story));
  }

  const std::vector<Story>& stories() const { return stories_; }
  std::size_t size() const { return stories_.size(); }
  bool empty() const { return stories_.empty(); }
  Split split() const { return split_; }

  const Story* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &stories_[it->second];
  }

  bool operator==(const Corpus& other) const { return split_ == other.split_ && stories_ == other.stories_; }

 private:
  Split split_ = Split::test;
  std::vector<Story> stories_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline bool is_ascii_alnum(unsigned char c) { return c < 0x80 && std::isalnum(c); }
inline bool is_ascii_space(unsigned char c) { return c < 0x80 && std::isspace(c); }
inline bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace detail

/// Collapses any run of three or more identical non-alphanumeric characters
/// to a single character, then trims surrounding whitespace. Bytes outside
/// ASCII are treated as word characters so UTF-8 sequences are never split.
inline std::string clean_sentence(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t j = i + 1;
    while (j < text.size() && text[j] == text[i]) ++j;
    const std::size_t run = j - i;
    if (run >= 3 && c < 0x80 && !std::isalnum(c))
      out += text[i];
    else
      out.append(text.substr(i, run));
    i = j;
  }
  std::size_t b = 0, e = out.size();
  while (b < e && detail::is_ascii_space(static_cast<unsigned char>(out[b]))) ++b;
  while (e > b && detail::is_ascii_space(static_cast<unsigned char>(out[e - 1]))) --e;
  return out.substr(b, e - b);
}

/// Lowercased whitespace tokens with leading/trailing ASCII punctuation removed.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !detail::is_ascii_space(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && detail::is_ascii_punct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && detail::is_ascii_punct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) {
      std::string tok(text.substr(b, e - b));
      for (auto& ch : tok) {
        const auto u = static_cast<unsigned char>(ch);
        if (u < 0x80) ch = static_cast<char>(std::tolower(u));
      }
      tokens.push_back(std::move(tok));
    }
    i = j;
  }
  return tokens;
}

inline constexpr std::size_t kMinSentenceTokens = 3;

/// True when fewer than three non-punctuation tokens remain.
inline bool should_skip(std::string_view cleaned) { return tokenize(cleaned).size() < kMinSentenceTokens; }

inline Story make_story(std::string id, const std::vector<std::string>& texts) {
  Story story;
  story.id = std::move(id);
  story.sentences.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Sentence s;
    s.index = i;
    s.text = texts[i];
    s.clean = clean_sentence(texts[i]);
    s.tokens = tokenize(s.clean);
    s.skipped = s.tokens.size() < kMinSentenceTokens;
    story.sentences.push_back(std::move(s));
  }
  return story;
}

inline Corpus load_stories(std::istream& in, const std::string& source = "<stream>", Split split = Split::test) {
  Corpus corpus(split);
  io::for_each_jsonl(in, source, [&](const io::json& obj, std::size_t line_no) {
    if (!obj.contains("id") || !obj["id"].is_string())
      throw Error(ErrorKind::MalformedLine, io::where(source, line_no) + ": missing string \"id\"");
    if (!obj.contains("sentences") || !obj["sentences"].is_array())
      throw Error(ErrorKind::MalformedLine, io::where(source, line_no) + ": missing array \"sentences\"");
    std::vector<std::string> texts;
    for (const auto& s : obj["sentences"]) {
      if (!s.is_string())
        throw Error(ErrorKind::MalformedLine, io::where(source, line_no) + ": sentence is not a string");
      texts.push_back(s.get<std::string>());
    }
    auto id = obj["id"].get<std::string>();
    if (corpus.find(id))
      throw Error(ErrorKind::DuplicateStoryId, io::where(source, line_no) + ": " + id);
    corpus.add(make_story(std::move(id), texts));
  });
  return corpus;
}

inline Corpus load_stories(const std::string& path, Split split = Split::test) {
  auto in = io::open_input(path);
  return load_stories(in, path, split);
}

inline void write_stories(std::ostream& out, const Corpus& corpus) {
  for (const auto& story : corpus.stories()) {
    io::json obj;
    obj["id"] = story.id;
    obj["sentences"] = io::json::array();
    for (const auto& s : story.sentences) obj["sentences"].push_back(s.text);
    out << obj.dump() << '\n';
  }
}

}  // namespace suspense
