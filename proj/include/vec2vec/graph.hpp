#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iostream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "vec2vec/matrix.hpp"

namespace vec2vec {

// Edge weights are clamped below at this value so the walk transition
// distribution stays a valid probability distribution even when a selected
// neighbor has non-positive cosine similarity.
inline constexpr double kMinEdgeWeight = 1e-12;

/// How neighbors are selected when building the similarity graph.
struct NeighborRule {
  enum class Kind { topk, epsilon };
  Kind kind = Kind::topk;
  std::size_t topk = 5;
  double epsilon = 0.0;

  static NeighborRule top_k(std::size_t k) {
    NeighborRule r;
    r.kind = Kind::topk;
    r.topk = k;
    return r;
  }
  static NeighborRule eps(double e) {
    NeighborRule r;
    r.kind = Kind::epsilon;
    r.epsilon = e;
    return r;
  }
};

/// Weighted undirected neighborhood graph over matrix rows.
/// Symmetric adjacency, no self loops, strictly positive weights.
struct SimilarityGraph {
  using Neighbor = std::pair<std::uint32_t, double>;
  std::vector<std::vector<Neighbor>> adjacency;

  std::size_t node_count() const { return adjacency.size(); }
  std::size_t degree(std::size_t u) const { return adjacency[u].size(); }
  const std::vector<Neighbor>& neighbors(std::size_t u) const { return adjacency[u]; }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (const auto& a : adjacency) total += a.size();
    return total / 2;
  }

  // Debug dump: one line "u v weight" per edge with u < v.
  void dump(std::ostream& out) const {
    for (std::size_t u = 0; u < adjacency.size(); ++u)
      for (const auto& [v, w] : adjacency[u])
        if (u < v) out << u << ' ' << v << ' ' << detail::format_double(w) << '\n';
  }
};

namespace detail {

inline std::vector<double> row_norms_checked(const DenseMatrix& m) {
  std::vector<double> norms(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    norms[i] = norm(m.row(i));
    if (norms[i] == 0.0) throw std::domain_error("zero-norm row " + std::to_string(i));
  }
  return norms;
}

// Exact top-k by (similarity desc, index asc) for one query row, given
// precomputed norms. Excludes the query row itself.
inline std::vector<std::pair<std::size_t, double>> topk_for_row(
    const DenseMatrix& m, const std::vector<double>& norms, std::size_t query, std::size_t k) {
  const std::size_t n = m.rows();
  std::vector<std::pair<std::size_t, double>> sims;
  sims.reserve(n - 1);
  const auto q = m.row(query);
  const double qn = norms[query];
  for (std::size_t j = 0; j < n; ++j) {
    if (j == query) continue;
    sims.emplace_back(j, dot(q, m.row(j)) / (qn * norms[j]));
  }
  auto better = [](const auto& a, const auto& b) {
    return a.second > b.second || (a.second == b.second && a.first < b.first);
  };
  if (k < sims.size()) {
    std::nth_element(sims.begin(), sims.begin() + k, sims.end(), better);
    sims.resize(k);
  }
  std::sort(sims.begin(), sims.end(), better);
  return sims;
}

inline SimilarityGraph adjacency_from_edges(std::size_t n,
                                            std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const auto& a, const auto& b) {
                            return std::get<0>(a) == std::get<0>(b) &&
                                   std::get<1>(a) == std::get<1>(b);
                          }),
              edges.end());
  SimilarityGraph g;
  g.adjacency.resize(n);
  for (const auto& [u, v, w] : edges) {
    g.adjacency[u].emplace_back(v, w);
    g.adjacency[v].emplace_back(u, w);
  }
  for (auto& a : g.adjacency)
    std::sort(a.begin(), a.end());
  return g;
}

template <typename Fn>
inline void parallel_rows(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Exact k-nearest-neighbor query by cosine similarity, descending, ties by
/// lower index. Excludes the query row. Precomputes norms and uses selection
/// rather than a full sort; must agree with brute force exactly.
inline std::vector<std::pair<std::size_t, double>> knn_search(const DenseMatrix& m,
                                                              std::size_t query_row,
                                                              std::size_t k) {
  if (m.rows() < 2) throw std::invalid_argument("knn_search: need at least 2 rows");
  if (k > m.rows() - 1) throw std::invalid_argument("knn_search: k exceeds n-1");
  auto norms = detail::row_norms_checked(m);
  return detail::topk_for_row(m, norms, query_row, k);
}

/// Symmetric-union topk graph: edge (i,j) iff j is in i's topk or i is in
/// j's topk. Weights are cosine similarities clamped below at kMinEdgeWeight.
inline SimilarityGraph build_topk_graph(const DenseMatrix& m, std::size_t topk,
                                        std::size_t threads = 1) {
  const std::size_t n = m.rows();
  if (n < 2) throw std::invalid_argument("build_topk_graph: need at least 2 rows");
  if (topk < 1) throw std::invalid_argument("build_topk_graph: topk must be >= 1");
  if (topk >= n) {
    std::cerr << "warning: topk " << topk << " >= n, clamped to " << (n - 1) << '\n';
    topk = n - 1;
  }
  auto norms = detail::row_norms_checked(m);

  std::vector<std::vector<std::pair<std::size_t, double>>> per_row(n);
  detail::parallel_rows(n, threads, [&](std::size_t i) {
    per_row[i] = detail::topk_for_row(m, norms, i, topk);
  });

  // Serialized merge into the symmetric edge set.
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  edges.reserve(n * topk);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, s] : per_row[i]) {
      auto u = static_cast<std::uint32_t>(std::min(i, j));
      auto v = static_cast<std::uint32_t>(std::max(i, j));
      edges.emplace_back(u, v, std::max(s, kMinEdgeWeight));
    }
  return detail::adjacency_from_edges(n, edges);
}

/// Epsilon graph: edge (i,j) iff cosine(x_i, x_j) > epsilon. Isolated nodes
/// are an error.
inline SimilarityGraph build_epsilon_graph(const DenseMatrix& m, double epsilon,
                                           std::size_t threads = 1) {
  const std::size_t n = m.rows();
  if (n < 2) throw std::invalid_argument("build_epsilon_graph: need at least 2 rows");
  auto norms = detail::row_norms_checked(m);

  std::vector<std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>> shards(n);
  detail::parallel_rows(n, threads, [&](std::size_t i) {
    const auto xi = m.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = dot(xi, m.row(j)) / (norms[i] * norms[j]);
      if (s > epsilon)
        shards[i].emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                               std::max(s, kMinEdgeWeight));
    }
  });
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  for (auto& s : shards) edges.insert(edges.end(), s.begin(), s.end());
  auto g = detail::adjacency_from_edges(n, edges);

  std::string isolated;
  for (std::size_t i = 0; i < n; ++i)
    if (g.degree(i) == 0) isolated += (isolated.empty() ? "" : ", ") + std::to_string(i);
  if (!isolated.empty())
    throw std::runtime_error("build_epsilon_graph: isolated nodes at epsilon=" +
                             detail::format_double(epsilon) + ": " + isolated);
  return g;
}

inline SimilarityGraph build_graph(const DenseMatrix& m, const NeighborRule& rule,
                                   std::size_t threads = 1) {
  return rule.kind == NeighborRule::Kind::topk ? build_topk_graph(m, rule.topk, threads)
                                               : build_epsilon_graph(m, rule.epsilon, threads);
}

/// Transpose trick for n >> D: run `inner` on M^T to get Z in R^{D x d},
/// return M * Z of shape n x d.
inline DenseMatrix transpose_reduce(const DenseMatrix& m,
                                    const std::function<DenseMatrix(const DenseMatrix&)>& inner) {
  DenseMatrix z = inner(transpose(m));
  if (z.rows() != m.cols())
    throw std::invalid_argument("transpose_reduce: inner produced " + std::to_string(z.rows()) +
                                " rows, expected " + std::to_string(m.cols()));
  return matmul(m, z);
}

}  // namespace vec2vec
