#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "vec2vec/graph.hpp"
#include "vec2vec/rng.hpp"

namespace vec2vec {

struct WalkConfig {
  std::size_t walks_per_node = 10;  // r
  std::size_t walk_length = 40;     // l
  std::size_t window = 5;           // c
  std::uint64_t seed = 1;

  void validate() const {
    if (walks_per_node < 1) throw std::invalid_argument("walks_per_node must be >= 1");
    if (walk_length < 1) throw std::invalid_argument("walk_length must be >= 1");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
  }
};

struct ContextPair {
  std::uint32_t center;
  std::uint32_t context;
};

struct WalkCorpus {
  std::size_t node_count = 0;
  std::vector<std::vector<std::uint32_t>> walks;

  std::size_t token_count() const {
    std::size_t t = 0;
    for (const auto& w : walks) t += w.size();
    return t;
  }

  // One walk per line, space-separated node indices.
  void dump(std::ostream& out) const {
    for (const auto& w : walks) {
      for (std::size_t i = 0; i < w.size(); ++i) out << (i ? " " : "") << w[i];
      out << '\n';
    }
  }
};

/// Walk transition probabilities for one node, aligned with its neighbor
/// list: P(neighbor) = weight / sum of the node's edge weights.
inline std::vector<double> transition_distribution(const SimilarityGraph& g, std::size_t node) {
  const auto& nbrs = g.neighbors(node);
  if (nbrs.empty()) throw std::runtime_error("isolated node " + std::to_string(node));
  double total = 0.0;
  for (const auto& [v, w] : nbrs) total += w;
  std::vector<double> p(nbrs.size());
  for (std::size_t i = 0; i < nbrs.size(); ++i) p[i] = nbrs[i].second / total;
  return p;
}

namespace detail {

// Per-node cumulative edge weights for O(log deg) transition sampling.
struct WalkSampler {
  const SimilarityGraph& g;
  std::vector<std::vector<double>> cumulative;

  explicit WalkSampler(const SimilarityGraph& graph) : g(graph) {
    cumulative.resize(g.node_count());
    for (std::size_t u = 0; u < g.node_count(); ++u) {
      double acc = 0.0;
      cumulative[u].reserve(g.degree(u));
      for (const auto& [v, w] : g.neighbors(u)) {
        acc += w;
        cumulative[u].push_back(acc);
      }
    }
  }

  std::uint32_t step(std::size_t from, Rng& rng) const {
    const auto& cum = cumulative[from];
    if (cum.empty()) throw std::runtime_error("isolated node " + std::to_string(from));
    double u = rng.uniform() * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::size_t idx = std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
    return g.neighbors(from)[idx].first;
  }
};

inline std::vector<std::uint32_t> generate_walk_with(const WalkSampler& sampler,
                                                     std::size_t start, std::size_t length,
                                                     Rng& rng) {
  std::vector<std::uint32_t> walk;
  walk.reserve(length);
  walk.push_back(static_cast<std::uint32_t>(start));
  for (std::size_t t = 1; t < length; ++t) walk.push_back(sampler.step(walk.back(), rng));
  return walk;
}

}  // namespace detail

inline std::vector<std::uint32_t> generate_walk(const SimilarityGraph& g, std::size_t start,
                                                std::size_t length, Rng& rng) {
  if (length < 1) throw std::invalid_argument("generate_walk: length must be >= 1");
  detail::WalkSampler sampler(g);
  return detail::generate_walk_with(sampler, start, length, rng);
}

/// Generate walks_per_node walks starting at every node, repetition-major
/// then node-index order. Each walk draws from its own seed substream, so
/// the corpus is identical for any worker count.
inline WalkCorpus generate_corpus(const SimilarityGraph& g, const WalkConfig& cfg,
                                  std::size_t threads = 1) {
  cfg.validate();
  const std::size_t n = g.node_count();
  detail::WalkSampler sampler(g);

  WalkCorpus corpus;
  corpus.node_count = n;
  corpus.walks.resize(cfg.walks_per_node * n);
  detail::parallel_rows(corpus.walks.size(), threads, [&](std::size_t w) {
    std::size_t rep = w / n;
    std::size_t node = w % n;
    Rng rng(Rng::mix(cfg.seed, rep, node));
    corpus.walks[w] = detail::generate_walk_with(sampler, node, cfg.walk_length, rng);
  });
  return corpus;
}

/// Stream (center, context) pairs: for each position j, every position m != j
/// with |m - j| <= window, clipped to the walk boundary.
template <typename Fn>
inline void for_each_context_pair(const WalkCorpus& corpus, std::size_t window, Fn&& fn) {
  for (const auto& walk : corpus.walks) {
    const std::size_t len = walk.size();
    for (std::size_t j = 0; j < len; ++j) {
      std::size_t lo = j >= window ? j - window : 0;
      std::size_t hi = std::min(len - 1, j + window);
      for (std::size_t m = lo; m <= hi; ++m) {
        if (m == j) continue;
        fn(ContextPair{walk[j], walk[m]});
      }
    }
  }
}

inline std::vector<ContextPair> extract_context_pairs(const WalkCorpus& corpus,
                                                      std::size_t window) {
  if (window < 1) throw std::invalid_argument("extract_context_pairs: window must be >= 1");
  std::vector<ContextPair> pairs;
  for_each_context_pair(corpus, window, [&](ContextPair p) { pairs.push_back(p); });
  return pairs;
}

inline std::size_t context_pair_count(const WalkCorpus& corpus, std::size_t window) {
  std::size_t count = 0;
  for (const auto& walk : corpus.walks) {
    const std::size_t len = walk.size();
    for (std::size_t j = 0; j < len; ++j) {
      std::size_t lo = j >= window ? j - window : 0;
      std::size_t hi = len == 0 ? 0 : std::min(len - 1, j + window);
      count += hi - lo;  // window size minus the center itself
    }
  }
  return count;
}

}  // namespace vec2vec
