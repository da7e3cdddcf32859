#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "suspense/embedding.hpp"
#include "suspense/error.hpp"
#include "suspense/io.hpp"
#include "suspense/story.hpp"
#include "suspense/vector_math.hpp"

namespace suspense {

enum class CandidateSource { corpus, generated };

constexpr std::string_view to_string(CandidateSource s) { return s == CandidateSource::corpus ? "corpus" : "generated"; }

inline CandidateSource parse_candidate_source(std::string_view s) {
  if (s == "corpus") return CandidateSource::corpus;
  if (s == "generated") return CandidateSource::generated;
  throw Error(ErrorKind::InvalidConfig, "unknown candidate source '" + std::string(s) + "'");
}

struct SentenceRef {
  std::string story_id;
  std::size_t sentence_idx = 0;
  bool operator==(const SentenceRef&) const = default;
};

struct CandidateNode {
  int node_id = 0;
  std::optional<int> parent_id;  // empty for children of the context sentence
  int depth = 1;
  Vector embedding;
  CandidateSource source = CandidateSource::generated;
  std::optional<std::string> text;
  std::optional<double> sentiment;
  std::optional<SentenceRef> origin;  // set for corpus-sampled sentences

  bool operator==(const CandidateNode&) const = default;
};

inline constexpr int kMaxRolloutDepth = 3;

/// Branching used when a tree is built here: (100), (50, 50), (25, 25, 25).
inline std::vector<std::size_t> default_branching(int max_depth) {
  switch (max_depth) {
    case 1: return {100};
    case 2: return {50, 50};
    case 3: return {25, 25, 25};
    default: throw Error(ErrorKind::InvalidConfig, "rollout depth must be 1, 2 or 3");
  }
}

/// Candidate futures of the sentence at `position`. Nodes are kept sorted by id.
class RolloutTree {
 public:
  RolloutTree() = default;
  RolloutTree(std::string story_id, std::size_t position) : story_id_(std::move(story_id)), position_(position) {}

  void add(CandidateNode node) {
    if (node.depth < 1 || node.depth > kMaxRolloutDepth)
      throw Error(ErrorKind::MalformedLine, "node " + std::to_string(node.node_id) + ": depth out of range");
    if (by_id_.count(node.node_id))
      throw Error(ErrorKind::MalformedLine, "duplicate node id " + std::to_string(node.node_id));
    auto& siblings = children_[node.parent_id];
    siblings.insert(std::lower_bound(siblings.begin(), siblings.end(), node.node_id), node.node_id);
    if (nodes_.empty() || nodes_.back().node_id < node.node_id) {
      by_id_[node.node_id] = nodes_.size();
      nodes_.push_back(std::move(node));
    } else {
      auto pos = std::lower_bound(nodes_.begin(), nodes_.end(), node.node_id,
                                  [](const CandidateNode& n, int id) { return n.node_id < id; });
      nodes_.insert(pos, std::move(node));
      reindex();
    }
  }

  /// Parent links resolve and depths increase by one along every edge.
  void validate() const {
    for (const auto& n : nodes_) {
      if (!n.parent_id) {
        if (n.depth != 1)
          throw Error(ErrorKind::MalformedLine, "root child " + std::to_string(n.node_id) + " must have depth 1");
        continue;
      }
      const auto* p = find(*n.parent_id);
      if (!p) throw Error(ErrorKind::MalformedLine, "node " + std::to_string(n.node_id) + ": unknown parent");
      if (n.depth != p->depth + 1)
        throw Error(ErrorKind::MalformedLine, "node " + std::to_string(n.node_id) + ": depth != parent depth + 1");
    }
  }

  const std::string& story_id() const { return story_id_; }
  std::size_t position() const { return position_; }
  const std::vector<CandidateNode>& nodes() const { return nodes_; }

  const CandidateNode* find(int id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &nodes_[it->second];
  }

  std::vector<const CandidateNode*> children(std::optional<int> parent) const {
    std::vector<const CandidateNode*> out;
    auto it = children_.find(parent);
    if (it == children_.end()) return out;
    out.reserve(it->second.size());
    for (int id : it->second) out.push_back(find(id));
    return out;
  }

  std::vector<const CandidateNode*> at_depth(int depth) const {
    std::vector<const CandidateNode*> out;
    for (const auto& n : nodes_)
      if (n.depth == depth) out.push_back(&n);
    return out;
  }

  int max_depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
  }

  /// Largest sibling count per depth.
  std::vector<std::size_t> branching() const {
    std::vector<std::size_t> out(static_cast<std::size_t>(max_depth()), 0);
    std::map<std::pair<int, std::optional<int>>, std::size_t> counts;
    for (const auto& n : nodes_) ++counts[{n.depth, n.parent_id}];
    for (const auto& [key, c] : counts) {
      auto& slot = out[static_cast<std::size_t>(key.first - 1)];
      slot = std::max(slot, c);
    }
    return out;
  }

  bool operator==(const RolloutTree& o) const {
    return story_id_ == o.story_id_ && position_ == o.position_ && nodes_ == o.nodes_;
  }

 private:
  void reindex() {
    by_id_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) by_id_[nodes_[i].node_id] = i;
  }

  std::string story_id_;
  std::size_t position_ = 0;
  std::vector<CandidateNode> nodes_;
  std::unordered_map<int, std::size_t> by_id_;
  std::map<std::optional<int>, std::vector<int>> children_;
};

using StoryTrees = std::map<std::size_t, RolloutTree>;      // by context position
using TreeSet = std::map<std::string, StoryTrees>;          // by story id

struct ContinuationDistribution {
  std::size_t position = 0;
  int depth = 1;
  std::vector<int> node_ids;
  std::vector<double> probabilities;
};

// --- probabilities -------------------------------------------------------

/// Softmax of logits / temperature, shifted by the maximum for stability.
inline std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0) {
  if (logits.empty()) throw Error(ErrorKind::EmptyCandidateSet, "softmax over nothing");
  if (!(temperature > 0.0)) throw Error(ErrorKind::InvalidConfig, "temperature must be positive");
  const double hi = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp((logits[i] - hi) / temperature);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

/// p_i proportional to exp(cos(context, c_i) / temperature).
inline std::vector<double> conditional_probabilities(std::span<const double> context,
                                                     std::span<const Vector> candidates, double temperature = 1.0) {
  if (candidates.empty()) throw Error(ErrorKind::EmptyCandidateSet, "no candidates");
  std::vector<double> logits;
  logits.reserve(candidates.size());
  for (const auto& c : candidates) logits.push_back(cosine_similarity(context, c));
  return softmax(logits, temperature);
}

/// Probability of the realised next sentence within {actual} and the alternatives.
inline double realized_probability(std::span<const double> prev_context, const Vector& actual_next,
                                   std::span<const Vector> alternatives, double temperature = 1.0) {
  std::vector<Vector> pool;
  pool.reserve(alternatives.size() + 1);
  pool.push_back(actual_next);
  pool.insert(pool.end(), alternatives.begin(), alternatives.end());
  return conditional_probabilities(prev_context, pool, temperature).front();
}

/// Leaf distribution at `depth`: each leaf gets the product of the
/// conditionals along its path (children scored against their parent's
/// embedding, depth-1 nodes against `root_context`), renormalised.
inline ContinuationDistribution path_distribution(const RolloutTree& tree, std::span<const double> root_context,
                                                  int depth, double temperature = 1.0) {
  const auto leaves = tree.at_depth(depth);
  if (depth < 1 || leaves.empty())
    throw Error(ErrorKind::EmptyDepth, tree.story_id() + " position " + std::to_string(tree.position()) +
                                           ": no nodes at depth " + std::to_string(depth));

  std::unordered_map<int, double> mass;
  auto expand = [&](auto&& self, std::optional<int> parent, std::span<const double> context, double parent_mass,
                    int level) -> void {
    if (level > depth) return;
    const auto kids = tree.children(parent);
    if (kids.empty()) return;
    std::vector<Vector> embs;
    embs.reserve(kids.size());
    for (const auto* k : kids) embs.push_back(k->embedding);
    const auto cond = conditional_probabilities(context, embs, temperature);
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const double m = parent_mass * cond[i];
      mass[kids[i]->node_id] = m;
      self(self, kids[i]->node_id, kids[i]->embedding, m, level + 1);
    }
  };
  expand(expand, std::nullopt, root_context, 1.0, 1);

  ContinuationDistribution dist;
  dist.position = tree.position();
  dist.depth = depth;
  double total = 0.0;
  for (const auto* leaf : leaves) {
    dist.node_ids.push_back(leaf->node_id);
    const double m = mass.count(leaf->node_id) ? mass[leaf->node_id] : 0.0;
    dist.probabilities.push_back(m);
    total += m;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::EmptyDepth, "depth " + std::to_string(depth) + " carries no mass");
  for (double& p : dist.probabilities) p /= total;
  return dist;
}

// --- corpus sampling -----------------------------------------------------

namespace detail {

/// Unbiased integer in [0, bound) from raw engine output (portable, unlike
/// std::uniform_int_distribution whose algorithm is implementation-defined).
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do x = gen();
  while (x >= limit);
  return x % bound;
}

}  // namespace detail

/// Non-skipped sentences with stored embeddings, in corpus order.
inline std::vector<SentenceRef> candidate_pool(const Corpus& corpus, const EmbeddingSet& embeddings,
                                               const std::string& exclude_story) {
  std::vector<SentenceRef> pool;
  for (const auto& story : corpus.stories()) {
    if (story.id == exclude_story) continue;
    auto it = embeddings.find(story.id);
    if (it == embeddings.end()) continue;
    for (std::size_t idx : story.active_indices())
      if (it->second.contains(idx)) pool.push_back({story.id, idx});
  }
  return pool;
}

inline std::vector<SentenceRef> sample_without_replacement(const std::vector<SentenceRef>& pool, std::size_t n,
                                                           std::uint64_t seed) {
  if (n > pool.size())
    throw Error(ErrorKind::InsufficientCorpus,
                "need " + std::to_string(n) + " sentences, corpus offers " + std::to_string(pool.size()));
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(detail::bounded(gen, order.size() - i));
    std::swap(order[i], order[j]);
  }
  std::vector<SentenceRef> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[order[i]]);
  return out;
}

inline CandidateNode corpus_node(const SentenceRef& ref, const Corpus& corpus, const EmbeddingSet& embeddings) {
  CandidateNode node;
  node.embedding = embeddings.at(ref.story_id).at(ref.sentence_idx);
  node.source = CandidateSource::corpus;
  if (const auto* s = corpus.find(ref.story_id)) node.text = s->sentences.at(ref.sentence_idx).text;
  node.origin = ref;
  return node;
}

/// `n` distinct sentences drawn uniformly from stories other than
/// `exclude_story`; the same seed always yields the same sample.
inline std::vector<CandidateNode> sample_corpus_candidates(const Corpus& corpus, const EmbeddingSet& embeddings,
                                                           std::size_t n, std::uint64_t seed,
                                                           const std::string& exclude_story) {
  const auto picks = sample_without_replacement(candidate_pool(corpus, embeddings, exclude_story), n, seed);
  std::vector<CandidateNode> out;
  out.reserve(picks.size());
  int id = 0;
  for (const auto& ref : picks) {
    auto node = corpus_node(ref, corpus, embeddings);
    node.node_id = id++;
    out.push_back(std::move(node));
  }
  return out;
}

inline std::uint64_t position_seed(std::uint64_t seed, const std::string& story_id, std::size_t position) {
  return mix_seed(mix_seed(seed, fnv1a(story_id)), static_cast<std::uint64_t>(position));
}

/// Complete tree of corpus-sampled sentences; every internal node draws its
/// own children. Node ids are assigned breadth-first from 0.
inline RolloutTree build_corpus_tree(const std::string& story_id, std::size_t position, const Corpus& corpus,
                                     const EmbeddingSet& embeddings, const std::vector<std::size_t>& branching,
                                     std::uint64_t seed) {
  if (branching.empty() || branching.size() > static_cast<std::size_t>(kMaxRolloutDepth))
    throw Error(ErrorKind::InvalidConfig, "branching must list 1 to 3 depths");
  const auto pool = candidate_pool(corpus, embeddings, story_id);
  const std::uint64_t base = position_seed(seed, story_id, position);

  RolloutTree tree(story_id, position);
  std::vector<std::optional<int>> frontier{std::nullopt};
  int next_id = 0;
  for (std::size_t level = 0; level < branching.size(); ++level) {
    std::vector<std::optional<int>> next_frontier;
    for (const auto& parent : frontier) {
      const auto picks =
          sample_without_replacement(pool, branching[level], mix_seed(base, static_cast<std::uint64_t>(parent.value_or(-1) + 1)));
      for (const auto& ref : picks) {
        auto node = corpus_node(ref, corpus, embeddings);
        node.node_id = next_id++;
        node.parent_id = parent;
        node.depth = static_cast<int>(level) + 1;
        next_frontier.push_back(node.node_id);
        tree.add(std::move(node));
      }
    }
    frontier = std::move(next_frontier);
  }
  return tree;
}

// --- file format ---------------------------------------------------------

inline TreeSet load_continuations(std::istream& in, const std::string& source = "<stream>") {
  TreeSet set;
  std::optional<std::size_t> dim;
  detail::for_each_record(in, source, [&](const io::json& obj, std::size_t line_no) {
    const auto where = io::where(source, line_no);
    const auto story_id = obj.at("story_id").get<std::string>();
    const auto position = obj.at("position").get<std::size_t>();
    CandidateNode node;
    node.node_id = obj.at("node_id").get<int>();
    if (obj.contains("parent_id") && !obj["parent_id"].is_null()) node.parent_id = obj["parent_id"].get<int>();
    node.depth = obj.at("depth").get<int>();
    node.source = parse_candidate_source(obj.at("source").get<std::string>());
    node.embedding = detail::parse_vector(obj.at("vector"), where);
    if (node.embedding.empty()) throw Error(ErrorKind::MalformedLine, where + ": empty vector");
    if (!dim) dim = node.embedding.size();
    if (node.embedding.size() != *dim) throw Error(ErrorKind::DimMismatch, where);
    if (obj.contains("text") && !obj["text"].is_null()) node.text = obj["text"].get<std::string>();
    if (obj.contains("sentiment") && !obj["sentiment"].is_null()) {
      const double s = obj["sentiment"].get<double>();
      if (std::fabs(s) > 1.0) throw Error(ErrorKind::OutOfRange, where + ": sentiment outside [-1, 1]");
      node.sentiment = s;
    }
    if (obj.contains("origin_story_id") && obj.contains("origin_sentence_idx"))
      node.origin = SentenceRef{obj["origin_story_id"].get<std::string>(), obj["origin_sentence_idx"].get<std::size_t>()};
    auto& story_trees = set[story_id];
    auto [it, inserted] = story_trees.try_emplace(position, story_id, position);
    try {
      it->second.add(std::move(node));
    } catch (const Error& e) {
      throw Error(ErrorKind::MalformedLine, where + ": " + e.what());
    }
  });
  for (const auto& [id, trees] : set)
    for (const auto& [pos, tree] : trees) {
      try {
        tree.validate();
      } catch (const Error& e) {
        throw Error(ErrorKind::MalformedLine, source + ": " + id + " position " + std::to_string(pos) + ": " + e.what());
      }
    }
  return set;
}

inline TreeSet load_continuations(const std::string& path) {
  auto in = io::open_input(path);
  return load_continuations(in, path);
}

inline void write_continuations(std::ostream& out, const TreeSet& set) {
  for (const auto& [id, trees] : set)
    for (const auto& [pos, tree] : trees)
      for (const auto& n : tree.nodes()) {
        io::json obj;
        obj["story_id"] = id;
        obj["position"] = pos;
        obj["node_id"] = n.node_id;
        obj["parent_id"] = n.parent_id ? io::json(*n.parent_id) : io::json(nullptr);
        obj["depth"] = n.depth;
        obj["source"] = std::string(to_string(n.source));
        obj["vector"] = n.embedding;
        obj["text"] = n.text ? io::json(*n.text) : io::json(nullptr);
        if (n.sentiment) obj["sentiment"] = *n.sentiment;
        if (n.origin) {
          obj["origin_story_id"] = n.origin->story_id;
          obj["origin_sentence_idx"] = n.origin->sentence_idx;
        }
        out << obj.dump() << '\n';
      }
}

}  // namespace suspense
