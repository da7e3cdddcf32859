#pragma once

// Engineered fixtures for end-to-end checks.

#include <array>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "suspense/suspense.hpp"

namespace synthetic {

inline const std::vector<std::string>& everyday_vocabulary() {
  static const std::vector<std::string> words{"the",    "village", "morning", "baker", "walked", "bread",
                                              "market", "quiet",   "street",  "old",   "friend", "smiled",
                                              "sun",    "warm"};
  return words;
}

struct TwistCorpus {
  suspense::Corpus corpus;
  std::vector<std::size_t> twist_index;  // per story, in corpus order
};

inline constexpr std::size_t kFrameWords = 4;

/// Stories of calm sentences built on one shared four-word frame plus two
/// varying words, each story with a single sentence made of words no other
/// sentence uses.
inline TwistCorpus make_twist_corpus(std::size_t stories, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto pick = [&](std::size_t bound) { return static_cast<std::size_t>(gen() % bound); };
  const auto& vocab = everyday_vocabulary();
  TwistCorpus out;
  for (std::size_t s = 0; s < stories; ++s) {
    const std::size_t len = 18 + pick(9);
    const std::size_t twist = 6 + pick(len - 10);
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < len; ++i) {
      std::string text;
      for (std::size_t w = 0; w < 6; ++w) {
        if (w) text += ' ';
        if (i == twist)
          text += "dragon" + std::to_string(s) + "x" + std::to_string(w);
        else if (w < kFrameWords)
          text += vocab[w];
        else
          text += vocab[kFrameWords + pick(vocab.size() - kFrameWords)];
      }
      text += '.';
      if (i == twist) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
      texts.push_back(text);
    }
    out.corpus.add(suspense::make_story("story-" + std::to_string(s), texts));
    out.twist_index.push_back(twist);
  }
  return out;
}

inline constexpr std::size_t kTwistDim = 64;
inline constexpr std::uint64_t kTwistSeed = 7;
inline constexpr double kTwistContextDecay = 0.5;

inline suspense::EmbeddingSet embed_corpus(const suspense::Corpus& corpus, std::size_t dim = kTwistDim,
                                           std::uint64_t seed = kTwistSeed, double decay = kTwistContextDecay) {
  suspense::EmbeddingSet set;
  for (const auto& story : corpus.stories())
    set.emplace(story.id, suspense::contextualize(suspense::mock_embed(story, dim, seed), decay));
  return set;
}

inline std::size_t argmax(const suspense::Series& s) {
  std::size_t best = 0;
  bool found = false;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] && (!found || *s[i] > *s[best])) {
      best = i;
      found = true;
    }
  return best;
}

/// Series of length n with small deterministic ripples and a peak at each
/// theory position round(p * (n - 1)).
inline suspense::Series planted_peaks(std::size_t n, const std::array<double, 5>& positions, double offset = 0.0) {
  suspense::Series s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = 0.1 * static_cast<double>((i * 7) % 5) / 5.0;
  for (double p : positions) {
    const auto idx = static_cast<std::size_t>(std::floor((p + offset) * static_cast<double>(n - 1) + 0.5));
    s[idx] = 10.0;
  }
  return s;
}

}  // namespace synthetic
