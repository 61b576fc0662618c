#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "vec2vec/eval.hpp"
#include "vec2vec/rng.hpp"
#include "vec2vec/synth.hpp"

using namespace vec2vec;

namespace {

// Independent ARI oracle: enumerate all unordered pairs and count the four
// agreement categories directly.
double brute_force_ari(const std::vector<int>& a, const std::vector<int>& b) {
  double together_both = 0, together_a = 0, together_b = 0, total = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      bool sa = a[i] == a[j];
      bool sb = b[i] == b[j];
      together_both += sa && sb;
      together_a += sa;
      together_b += sb;
      ++total;
    }
  double expected = together_a * together_b / total;
  double max_index = 0.5 * (together_a + together_b);
  if (max_index == expected) return 1.0;
  return (together_both - expected) / (max_index - expected);
}

// Brute-force symmetric eigensolve (cyclic Jacobi) used as the PCA oracle.
void jacobi_eigensolve(std::vector<std::vector<double>> a, std::vector<double>& eigvals,
                       std::vector<std::vector<double>>& eigvecs) {
  const std::size_t n = a.size();
  eigvecs.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) eigvecs[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-18) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = eigvecs[k][p], vkq = eigvecs[k][q];
          eigvecs[k][p] = c * vkp - s * vkq;
          eigvecs[k][q] = s * vkp + c * vkq;
        }
      }
  }
  eigvals.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigvals[i] = a[i][i];
}

std::vector<int> random_partition(std::size_t n, std::size_t groups, Rng& rng) {
  std::vector<int> p(n);
  for (auto& x : p) x = static_cast<int>(rng.uniform_below(groups));
  return p;
}

}  // namespace

TEST_CASE("ARI on identical and permuted partitions") {
  std::vector<int> a{0, 0, 1, 1, 2};
  CHECK(adjusted_rand_index(a, a) == Catch::Approx(1.0).margin(1e-12));

  std::vector<int> x{0, 0, 1, 1}, y{1, 1, 0, 0};
  CHECK(adjusted_rand_index(x, y) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("ARI crossing partitions gives -0.5") {
  std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
  CHECK(adjusted_rand_index(a, b) == Catch::Approx(-0.5).margin(1e-12));
  CHECK(brute_force_ari(a, b) == Catch::Approx(-0.5).margin(1e-12));
}

TEST_CASE("ARI matches the brute-force pair-counting oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + rng.uniform_below(11);
    auto a = random_partition(n, 1 + rng.uniform_below(4), rng);
    auto b = random_partition(n, 1 + rng.uniform_below(4), rng);
    CHECK(adjusted_rand_index(a, b) == Catch::Approx(brute_force_ari(a, b)).margin(1e-12));
  }
}

TEST_CASE("ARI symmetry and label-permutation invariance") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 4 + rng.uniform_below(20);
    auto a = random_partition(n, 3, rng);
    auto b = random_partition(n, 3, rng);
    CHECK(adjusted_rand_index(a, b) == Catch::Approx(adjusted_rand_index(b, a)).margin(1e-14));
    auto relabeled = a;
    for (auto& x : relabeled) x = (x + 7) * 3;  // injective relabeling
    CHECK(adjusted_rand_index(relabeled, b) ==
          Catch::Approx(adjusted_rand_index(a, b)).margin(1e-14));
  }
  std::vector<int> a{0, 1}, short_b{0};
  CHECK_THROWS_AS(adjusted_rand_index(a, short_b), std::invalid_argument);
}

TEST_CASE("kmeans basics") {
  DenseMatrix two(2, 2, {0, 0, 10, 10});
  auto r = kmeans(two, 2, 1);
  CHECK(r.labels[0] != r.labels[1]);
  CHECK(r.inertia == Catch::Approx(0.0).margin(1e-12));

  auto m = make_blobs(90, 10, 3, 10.0, 4);
  auto r1 = kmeans(m, 3, 42);
  auto r2 = kmeans(m, 3, 42);
  CHECK(r1.labels == r2.labels);
  CHECK(adjusted_rand_index(r1.labels, m.labels()) >= 0.95);

  CHECK_THROWS_AS(kmeans(two, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(kmeans(two, 3, 1), std::invalid_argument);
}

TEST_CASE("PCA on collinear data explains all variance with one component") {
  auto m = make_line(40, 3, 0.0, 9);
  auto fit = pca_fit(m, 1);
  CHECK(fit.eigenvalues[0] == Catch::Approx(fit.total_variance).epsilon(1e-8));
}

TEST_CASE("PCA at full rank reconstructs the data") {
  Rng rng(12);
  DenseMatrix m(20, 4);
  for (auto& v : m.data()) v = rng.normal();
  auto fit = pca_fit(m, 4);

  // reconstruct: Xc ~= projection * components
  auto recon = matmul(fit.projection, fit.components);
  std::vector<double> means(4, 0.0);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 4; ++c) means[c] += m(r, c) / 20.0;
  double err = 0.0;
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      err = std::max(err, std::abs(recon(r, c) - (m(r, c) - means[c])));
  CHECK(err < 1e-8);
}

TEST_CASE("PCA matches a dense Jacobi eigensolve up to sign") {
  Rng rng(13);
  DenseMatrix m(30, 10);
  for (auto& v : m.data()) v = rng.normal() * (1.0 + (v != 0));
  for (std::size_t r = 0; r < 30; ++r) m(r, 0) += 3.0 * m(r, 1);  // induce correlation
  auto fit = pca_fit(m, 3);

  // covariance matrix of the centered data
  std::vector<double> means(10, 0.0);
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t c = 0; c < 10; ++c) means[c] += m(r, c) / 30.0;
  std::vector<std::vector<double>> cov(10, std::vector<double>(10, 0.0));
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t a = 0; a < 10; ++a)
      for (std::size_t b = 0; b < 10; ++b)
        cov[a][b] += (m(r, a) - means[a]) * (m(r, b) - means[b]) / 29.0;

  std::vector<double> eigvals;
  std::vector<std::vector<double>> eigvecs;
  jacobi_eigensolve(cov, eigvals, eigvecs);
  std::vector<std::size_t> order(10);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return eigvals[a] > eigvals[b]; });

  for (std::size_t comp = 0; comp < 3; ++comp) {
    CHECK(fit.eigenvalues[comp] == Catch::Approx(eigvals[order[comp]]).epsilon(1e-6));
    double dotp = 0.0;
    for (std::size_t c = 0; c < 10; ++c) dotp += fit.components(comp, c) * eigvecs[c][order[comp]];
    CHECK(std::abs(dotp) == Catch::Approx(1.0).margin(1e-6));  // same direction up to sign
  }
}

TEST_CASE("PCA components are orthonormal") {
  Rng rng(14);
  DenseMatrix m(40, 8);
  for (auto& v : m.data()) v = rng.normal();
  auto fit = pca_fit(m, 5);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 5; ++b) {
      double g = dot(fit.components.row(a), fit.components.row(b));
      CHECK(g == Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-8));
    }
}

TEST_CASE("knn CV is perfect on separated blobs") {
  auto m = make_blobs(80, 10, 2, 30.0, 21);
  auto res = knn_cv_accuracy(m, m.labels(), 4);
  CHECK(res.mean_accuracy == 1.0);
  CHECK(res.fold_accuracies.size() == 4);
}

TEST_CASE("knn CV on shuffled labels sits near chance") {
  Rng rng(22);
  DenseMatrix m(400, 6);
  for (auto& v : m.data()) v = rng.normal();
  std::vector<int> labels(400);
  for (std::size_t i = 0; i < 400; ++i) labels[i] = static_cast<int>(i % 2);
  // shuffle so labels carry no geometry
  for (std::size_t i = 399; i > 0; --i)
    std::swap(labels[i], labels[rng.uniform_below(i + 1)]);
  auto res = knn_cv_accuracy(m, labels, 4);
  CHECK(res.mean_accuracy == Catch::Approx(0.5).margin(0.07));
}

TEST_CASE("single-element k grid reduces to plain kNN CV") {
  auto m = make_blobs(40, 8, 2, 20.0, 3);
  auto res = knn_cv_accuracy(m, m.labels(), 4, {1});
  for (auto k : res.fold_best_k) CHECK(k == 1);
  CHECK(res.mean_accuracy == 1.0);
}

TEST_CASE("knn CV rejects classes smaller than the fold count") {
  DenseMatrix m(5, 2, 1.0);
  std::vector<int> labels{0, 0, 0, 0, 1};
  CHECK_THROWS_AS(knn_cv_accuracy(m, labels, 4), std::invalid_argument);
}

TEST_CASE("knn CV accuracy is invariant under rotation of the embedding") {
  auto m = make_blobs(60, 2, 2, 6.0, 33);
  auto base = knn_cv_accuracy(m, m.labels(), 4, {3});
  double angle = 1.1;
  DenseMatrix rot(60, 2);
  for (std::size_t r = 0; r < 60; ++r) {
    rot(r, 0) = std::cos(angle) * m(r, 0) - std::sin(angle) * m(r, 1);
    rot(r, 1) = std::sin(angle) * m(r, 0) + std::cos(angle) * m(r, 1);
  }
  auto rotated = knn_cv_accuracy(rot, m.labels(), 4, {3});
  CHECK(rotated.fold_accuracies == base.fold_accuracies);
}

TEST_CASE("neighborhood preservation identities") {
  auto m = make_blobs(50, 8, 2, 8.0, 41);
  CHECK(neighborhood_preservation(m, m, 5) == 1.0);

  DenseMatrix scaled = m;
  for (auto& v : scaled.data()) v *= 3.0;
  CHECK(neighborhood_preservation(m, scaled, 5) == 1.0);
}

TEST_CASE("neighborhood preservation of a random permutation is near topk/(n-1)") {
  Rng rng(51);
  const std::size_t n = 300;
  DenseMatrix m(n, 10);
  for (auto& v : m.data()) v = rng.normal();
  DenseMatrix perm(n, 10);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_below(i + 1)]);
  for (std::size_t r = 0; r < n; ++r)
    std::copy(m.row(order[r]).begin(), m.row(order[r]).end(), perm.row(r).begin());
  double rate = neighborhood_preservation(m, perm, 10);
  CHECK(rate == Catch::Approx(10.0 / (n - 1.0)).margin(0.03));
}

TEST_CASE("spearman correlation basics") {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y{2, 4, 6, 8, 10};
  CHECK(spearman_correlation(x, y) == Catch::Approx(1.0).margin(1e-12));
  std::vector<double> yr{10, 8, 6, 4, 2};
  CHECK(spearman_correlation(x, yr) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("EvalReport serializes both formats") {
  EvalReport rep;
  rep.method = "pca";
  rep.dataset = "blobs";
  rep.dims = 2;
  rep.folds = 4;
  rep.fold_accuracies = {1.0, 0.5};
  rep.mean_accuracy = 0.75;
  rep.ari = 0.5;
  std::ostringstream kv, rec;
  rep.write_keyvalue(kv);
  rep.write_record(rec);
  CHECK(kv.str().find("mean_accuracy = 0.75") != std::string::npos);
  CHECK(rec.str().find("ari\t0.5") != std::string::npos);
  CHECK(rec.str().find("time_train_seconds\t") != std::string::npos);
}
