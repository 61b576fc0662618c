#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "vec2vec/graph.hpp"
#include "vec2vec/rng.hpp"

using namespace vec2vec;

namespace {

DenseMatrix random_matrix(std::size_t n, std::size_t d, Rng& rng) {
  DenseMatrix m(n, d);
  for (auto& v : m.data()) v = rng.normal();
  return m;
}

// Independent brute-force kNN oracle: all pairwise cosines via the scalar
// cosine_similarity, full stable sort by (similarity desc, index asc).
std::vector<std::pair<std::size_t, double>> brute_force_knn(const DenseMatrix& m,
                                                            std::size_t query, std::size_t k) {
  std::vector<std::pair<std::size_t, double>> all;
  for (std::size_t j = 0; j < m.rows(); ++j) {
    if (j == query) continue;
    all.emplace_back(j, cosine_similarity(m.row(query), m.row(j)));
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.second > b.second || (a.second == b.second && a.first < b.first);
  });
  all.resize(std::min(k, all.size()));
  return all;
}

double edge_weight(const SimilarityGraph& g, std::size_t u, std::size_t v) {
  for (const auto& [w, s] : g.neighbors(u))
    if (w == v) return s;
  return -2.0;  // sentinel: absent
}

std::set<std::pair<std::size_t, std::size_t>> edge_set(const SimilarityGraph& g) {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 0; u < g.node_count(); ++u)
    for (const auto& [v, w] : g.neighbors(u))
      edges.insert({std::min<std::size_t>(u, v), std::max<std::size_t>(u, v)});
  return edges;
}

}  // namespace

TEST_CASE("topk graph on {e1, e2, e1+e2} with topk=1") {
  DenseMatrix m(3, 2, {1, 0, 0, 1, 1, 1});
  auto g = build_topk_graph(m, 1);
  auto edges = edge_set(g);
  CHECK(edges == std::set<std::pair<std::size_t, std::size_t>>{{0, 2}, {1, 2}});
  CHECK(edge_weight(g, 0, 2) == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(edge_weight(g, 1, 2) == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("topk graph on duplicate rows") {
  DenseMatrix m(2, 2, {3, 4, 3, 4});
  auto g = build_topk_graph(m, 1);
  CHECK(g.edge_count() == 1);
  CHECK(edge_weight(g, 0, 1) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("topk = n-1 yields the complete graph") {
  Rng rng(5);
  auto m = random_matrix(8, 4, rng);
  auto g = build_topk_graph(m, 7);
  CHECK(g.edge_count() == 8 * 7 / 2);
}

TEST_CASE("topk >= n is clamped") {
  Rng rng(6);
  auto m = random_matrix(4, 3, rng);
  auto g = build_topk_graph(m, 10);
  CHECK(g.edge_count() == 4 * 3 / 2);
}

TEST_CASE("zero-norm row is a hard error naming the row") {
  DenseMatrix m(3, 2, {1, 0, 0, 0, 1, 1});
  CHECK_THROWS_WITH(build_topk_graph(m, 1), Catch::Matchers::ContainsSubstring("row 1"));
}

TEST_CASE("epsilon graph on {e1, e2, e1+e2}") {
  DenseMatrix m(3, 2, {1, 0, 0, 1, 1, 1});
  auto g = build_epsilon_graph(m, 0.5);
  CHECK(edge_set(g) == std::set<std::pair<std::size_t, std::size_t>>{{0, 2}, {1, 2}});
}

TEST_CASE("epsilon below the similarity range yields the complete graph") {
  Rng rng(8);
  auto m = random_matrix(6, 5, rng);
  auto g = build_epsilon_graph(m, -1.0);
  CHECK(g.edge_count() == 6 * 5 / 2);
}

TEST_CASE("epsilon graph reports isolated nodes") {
  DenseMatrix m(2, 2, {1, 0, 0, 1});
  CHECK_THROWS_WITH(build_epsilon_graph(m, 0.5),
                    Catch::Matchers::ContainsSubstring("isolated"));
}

TEST_CASE("knn_search on {e1, e2, e1+e2}") {
  DenseMatrix m(3, 2, {1, 0, 0, 1, 1, 1});
  auto nn = knn_search(m, 0, 2);
  REQUIRE(nn.size() == 2);
  CHECK(nn[0].first == 2);
  CHECK(nn[0].second == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(nn[1].first == 1);
  CHECK(nn[1].second == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("knn_search on a duplicate pair") {
  DenseMatrix m(2, 3, {1, 2, 3, 1, 2, 3});
  auto nn = knn_search(m, 0, 1);
  REQUIRE(nn.size() == 1);
  CHECK(nn[0].first == 1);
  CHECK(nn[0].second == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("knn_search agrees with the brute-force oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 50 + rng.uniform_below(150);
    auto m = random_matrix(n, 3 + rng.uniform_below(13), rng);
    for (int q = 0; q < 5; ++q) {
      std::size_t query = rng.uniform_below(n);
      auto fast = knn_search(m, query, 10);
      auto slow = brute_force_knn(m, query, 10);
      REQUIRE(fast.size() == slow.size());
      for (std::size_t i = 0; i < fast.size(); ++i) {
        CHECK(fast[i].first == slow[i].first);
        CHECK(fast[i].second == Catch::Approx(slow[i].second).margin(1e-12));
      }
    }
  }
}

TEST_CASE("graph symmetry and positive weights on random matrices") {
  Rng rng(99);
  for (int trial = 0; trial < 15; ++trial) {
    std::size_t n = 4 + rng.uniform_below(40);
    auto m = random_matrix(n, 2 + rng.uniform_below(8), rng);
    std::size_t k = 1 + rng.uniform_below(4);
    auto g = build_topk_graph(m, k);

    std::size_t kk = std::min(k, n - 1);
    for (std::size_t u = 0; u < n; ++u) {
      CHECK(g.degree(u) >= kk);  // symmetric union only adds edges
      for (const auto& [v, w] : g.neighbors(u)) {
        CHECK(w > 0.0);
        CHECK(v != u);
        CHECK(edge_weight(g, v, u) == w);
      }
    }
  }
}

TEST_CASE("parallel graph build matches serial") {
  Rng rng(31);
  auto m = random_matrix(80, 6, rng);
  auto serial = build_topk_graph(m, 4, 1);
  auto parallel = build_topk_graph(m, 4, 4);
  REQUIRE(serial.adjacency.size() == parallel.adjacency.size());
  for (std::size_t u = 0; u < serial.node_count(); ++u)
    CHECK(serial.adjacency[u] == parallel.adjacency[u]);
}

TEST_CASE("graph dump emits u < v lines") {
  DenseMatrix m(3, 2, {1, 0, 0, 1, 1, 1});
  auto g = build_topk_graph(m, 1);
  std::ostringstream out;
  g.dump(out);
  auto text = out.str();
  CHECK(text.find("0 2 ") != std::string::npos);
  CHECK(text.find("1 2 ") != std::string::npos);
}

TEST_CASE("transpose_reduce contracts") {
  DenseMatrix eye(2, 2, {1, 0, 0, 1});
  auto inner_identity = [](const DenseMatrix& mt) {
    return DenseMatrix(2, 2, {1, 0, 0, 1});
  };
  auto z1 = transpose_reduce(eye, inner_identity);
  CHECK(z1(0, 0) == 1);
  CHECK(z1(0, 1) == 0);
  CHECK(z1(1, 1) == 1);

  DenseMatrix m(2, 2, {1, 2, 3, 4});
  auto z2 = transpose_reduce(m, [](const DenseMatrix&) { return DenseMatrix(2, 1, {1, 1}); });
  CHECK(z2(0, 0) == 3);
  CHECK(z2(1, 0) == 7);

  Rng rng(3);
  auto big = random_matrix(100, 5, rng);
  auto z3 = transpose_reduce(big, [](const DenseMatrix& mt) {
    return DenseMatrix(mt.rows(), 3, 1.0);
  });
  CHECK(z3.rows() == 100);
  CHECK(z3.cols() == 3);

  CHECK_THROWS_AS(
      transpose_reduce(m, [](const DenseMatrix&) { return DenseMatrix(3, 1, 1.0); }),
      std::invalid_argument);
}
