#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vec2vec/graph.hpp"
#include "vec2vec/matrix.hpp"
#include "vec2vec/rng.hpp"

namespace vec2vec {

/// Adjusted Rand Index from the pair-counting contingency table.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ARI: partition length mismatch");
  if (a.size() < 2) throw std::invalid_argument("ARI: need at least 2 elements");
  const double n = static_cast<double>(a.size());

  std::map<std::pair<int, int>, double> cont;
  std::map<int, double> row_sums, col_sums;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cont[{a[i], b[i]}] += 1.0;
    row_sums[a[i]] += 1.0;
    col_sums[b[i]] += 1.0;
  }
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [k, v] : cont) index += comb2(v);
  for (const auto& [k, v] : row_sums) sum_a += comb2(v);
  for (const auto& [k, v] : col_sums) sum_b += comb2(v);
  double expected = sum_a * sum_b / comb2(n);
  double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (max_index - expected);
}

// ---------------------------------------------------------------------------
// k-means (Lloyd's algorithm, k-means++ style seeding, best of restarts)

namespace detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline std::vector<std::size_t> kmeanspp_seed(const DenseMatrix& z, std::size_t k, Rng& rng) {
  const std::size_t n = z.rows();
  std::vector<std::size_t> centers;
  centers.push_back(rng.uniform_below(n));
  std::vector<double> d2(n, std::numeric_limits<double>::max());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(z.row(i), z.row(centers.back())));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= u) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_below(n);
    }
    centers.push_back(pick);
  }
  return centers;
}

}  // namespace detail

struct KMeansResult {
  std::vector<int> labels;
  double inertia = 0.0;
};

inline KMeansResult kmeans(const DenseMatrix& z, std::size_t n_clusters, std::uint64_t seed,
                           std::size_t restarts = 10) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  if (n_clusters < 1) throw std::invalid_argument("kmeans: n_clusters must be >= 1");
  if (n_clusters > n) throw std::invalid_argument("kmeans: n_clusters exceeds n");

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::max();
  for (std::size_t restart = 0; restart < restarts; ++restart) {
    Rng rng(Rng::mix(seed, 0x4a3a, restart));
    auto seeds = detail::kmeanspp_seed(z, n_clusters, rng);
    DenseMatrix centers(n_clusters, d);
    for (std::size_t c = 0; c < n_clusters; ++c)
      std::copy(z.row(seeds[c]).begin(), z.row(seeds[c]).end(), centers.row(c).begin());

    std::vector<int> labels(n, -1);
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        int arg = 0;
        double bestd = std::numeric_limits<double>::max();
        for (std::size_t c = 0; c < n_clusters; ++c) {
          double dd = detail::sq_dist(z.row(i), centers.row(c));
          if (dd < bestd) {
            bestd = dd;
            arg = static_cast<int>(c);
          }
        }
        if (labels[i] != arg) {
          labels[i] = arg;
          changed = true;
        }
      }
      if (!changed && iter > 0) break;

      DenseMatrix sums(n_clusters, d, 0.0);
      std::vector<std::size_t> counts(n_clusters, 0);
      for (std::size_t i = 0; i < n; ++i) {
        auto srow = sums.row(labels[i]);
        auto zr = z.row(i);
        for (std::size_t c = 0; c < d; ++c) srow[c] += zr[c];
        ++counts[labels[i]];
      }
      for (std::size_t c = 0; c < n_clusters; ++c) {
        if (counts[c] == 0) {
          // Re-seed an empty cluster to the point farthest from its center.
          std::size_t far = 0;
          double fard = -1.0;
          for (std::size_t i = 0; i < n; ++i) {
            double dd = detail::sq_dist(z.row(i), centers.row(labels[i]));
            if (dd > fard) {
              fard = dd;
              far = i;
            }
          }
          std::copy(z.row(far).begin(), z.row(far).end(), centers.row(c).begin());
        } else {
          auto crow = centers.row(c);
          auto srow = sums.row(c);
          for (std::size_t cc = 0; cc < d; ++cc) crow[cc] = srow[cc] / counts[c];
        }
      }
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += detail::sq_dist(z.row(i), centers.row(labels[i]));
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.labels = labels;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// PCA baseline: power iteration with deflation on the covariance operator
// (applied as Xc^T (Xc v) / (n - 1), never materializing the D x D matrix).

struct PcaResult {
  DenseMatrix projection;   // n x d
  DenseMatrix components;   // d x D, orthonormal rows
  std::vector<double> eigenvalues;
  double total_variance = 0.0;
};

inline PcaResult pca_fit(const DenseMatrix& m, std::size_t d) {
  const std::size_t n = m.rows();
  const std::size_t dim = m.cols();
  if (d < 1 || d > std::min(n, dim))
    throw std::invalid_argument("pca: need 1 <= d <= min(n, D)");

  DenseMatrix xc = m;
  for (std::size_t c = 0; c < dim; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += xc(r, c);
    mean /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) xc(r, c) -= mean;
  }

  PcaResult res;
  res.components = DenseMatrix(d, dim);
  res.eigenvalues.resize(d);
  for (std::size_t r = 0; r < n; ++r) res.total_variance += dot(xc.row(r), xc.row(r));
  res.total_variance /= static_cast<double>(n - 1);

  std::vector<double> v(dim), cv(dim), tmp(n);
  Rng rng(Rng::mix(0x9ca, 0));
  for (std::size_t comp = 0; comp < d; ++comp) {
    for (double& x : v) x = rng.uniform() - 0.5;
    double eig = 0.0;
    for (int iter = 0; iter < 1000; ++iter) {
      // orthogonalize against previously extracted components
      for (std::size_t p = 0; p < comp; ++p) {
        double proj = dot(std::span<const double>(v), res.components.row(p));
        auto pr = res.components.row(p);
        for (std::size_t c = 0; c < dim; ++c) v[c] -= proj * pr[c];
      }
      double vn = norm(v);
      if (vn == 0.0) {
        v[comp % dim] = 1.0;
        vn = 1.0;
      }
      for (double& x : v) x /= vn;

      for (std::size_t r = 0; r < n; ++r) tmp[r] = dot(xc.row(r), std::span<const double>(v));
      std::fill(cv.begin(), cv.end(), 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        auto xr = xc.row(r);
        double t = tmp[r];
        for (std::size_t c = 0; c < dim; ++c) cv[c] += t * xr[c];
      }
      for (double& x : cv) x /= static_cast<double>(n - 1);

      double new_eig = dot(std::span<const double>(v), std::span<const double>(cv));
      bool converged = iter > 2 && std::abs(new_eig - eig) <= 1e-12 * std::max(1.0, std::abs(new_eig));
      eig = new_eig;
      v = cv;
      if (converged) break;
    }
    // final orthonormalization of the converged direction
    for (std::size_t p = 0; p < comp; ++p) {
      double proj = dot(std::span<const double>(v), res.components.row(p));
      auto pr = res.components.row(p);
      for (std::size_t c = 0; c < dim; ++c) v[c] -= proj * pr[c];
    }
    double vn = norm(v);
    if (vn == 0.0) vn = 1.0;
    for (std::size_t c = 0; c < dim; ++c) res.components(comp, c) = v[c] / vn;
    res.eigenvalues[comp] = std::max(eig, 0.0);
  }

  res.projection = matmul(xc, transpose(res.components));
  if (m.has_labels()) res.projection.set_labels(m.labels());
  return res;
}

inline DenseMatrix pca_baseline(const DenseMatrix& m, std::size_t d) {
  return pca_fit(m, d).projection;
}

// ---------------------------------------------------------------------------
// Cross-validated kNN classification

namespace detail {

/// Stratified fold assignment: round-robin within each label group, in
/// index order. Throws if any class is smaller than the fold count.
inline std::vector<std::size_t> stratified_folds(const std::vector<int>& labels,
                                                 std::size_t folds) {
  std::map<int, std::size_t> counters;
  std::map<int, std::size_t> class_sizes;
  for (int l : labels) ++class_sizes[l];
  for (const auto& [label, size] : class_sizes)
    if (size < folds)
      throw std::invalid_argument("stratified_folds: class " + std::to_string(label) + " has " +
                                  std::to_string(size) + " members, fewer than " +
                                  std::to_string(folds) + " folds");
  std::vector<std::size_t> fold(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) fold[i] = counters[labels[i]]++ % folds;
  return fold;
}

/// Majority-vote kNN with Euclidean distance; ties in the vote broken by
/// the smallest label, ties in distance by lower training index.
inline int knn_classify(const DenseMatrix& z, const std::vector<std::size_t>& train_idx,
                        const std::vector<int>& labels, std::size_t query, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(train_idx.size());
  for (std::size_t t : train_idx) dist.emplace_back(sq_dist(z.row(query), z.row(t)), t);
  std::size_t kk = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
  std::map<int, std::size_t> votes;
  for (std::size_t i = 0; i < kk; ++i) ++votes[labels[dist[i].second]];
  int best_label = 0;
  std::size_t best_count = 0;
  for (const auto& [label, count] : votes)
    if (count > best_count) {  // map order gives smallest label on ties
      best_count = count;
      best_label = label;
    }
  return best_label;
}

inline double knn_accuracy(const DenseMatrix& z, const std::vector<std::size_t>& train_idx,
                           const std::vector<std::size_t>& test_idx,
                           const std::vector<int>& labels, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t q : test_idx)
    if (knn_classify(z, train_idx, labels, q, k) == labels[q]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(test_idx.size());
}

}  // namespace detail

struct KnnCvResult {
  std::vector<double> fold_accuracies;
  std::vector<std::size_t> fold_best_k;
  double mean_accuracy = 0.0;
  double two_std = 0.0;  // the reported 95% interval half-width
};

/// Stratified k-fold CV; inside each training fold the best k from k_grid
/// is chosen by an inner stratified 3-fold grid search.
inline KnnCvResult knn_cv_accuracy(const DenseMatrix& z, const std::vector<int>& labels,
                                   std::size_t folds = 4,
                                   std::vector<std::size_t> k_grid = {1, 3, 5, 7, 9, 11}) {
  if (labels.size() != z.rows()) throw std::invalid_argument("knn_cv: label/row mismatch");
  if (z.rows() < folds) throw std::invalid_argument("knn_cv: fewer rows than folds");
  if (k_grid.empty()) throw std::invalid_argument("knn_cv: empty k grid");
  std::sort(k_grid.begin(), k_grid.end());

  auto fold_of = detail::stratified_folds(labels, folds);
  KnnCvResult res;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      (fold_of[i] == f ? test_idx : train_idx).push_back(i);

    std::size_t best_k = k_grid.front();
    if (k_grid.size() > 1) {
      // inner grid search on the training fold only
      std::vector<int> inner_labels;
      inner_labels.reserve(train_idx.size());
      for (std::size_t i : train_idx) inner_labels.push_back(labels[i]);
      std::size_t inner_folds = 3;
      auto inner_fold = detail::stratified_folds(inner_labels, inner_folds);
      double best_acc = -1.0;
      for (std::size_t k : k_grid) {
        double acc = 0.0;
        for (std::size_t g = 0; g < inner_folds; ++g) {
          std::vector<std::size_t> itr, ite;
          for (std::size_t i = 0; i < train_idx.size(); ++i)
            (inner_fold[i] == g ? ite : itr).push_back(train_idx[i]);
          acc += detail::knn_accuracy(z, itr, ite, labels, k);
        }
        acc /= static_cast<double>(inner_folds);
        if (acc > best_acc) {  // ties keep the smaller k (grid is sorted)
          best_acc = acc;
          best_k = k;
        }
      }
    }
    res.fold_best_k.push_back(best_k);
    res.fold_accuracies.push_back(detail::knn_accuracy(z, train_idx, test_idx, labels, best_k));
  }

  double mean = std::accumulate(res.fold_accuracies.begin(), res.fold_accuracies.end(), 0.0) /
                static_cast<double>(folds);
  double var = 0.0;
  for (double a : res.fold_accuracies) var += (a - mean) * (a - mean);
  var /= static_cast<double>(folds);
  res.mean_accuracy = mean;
  res.two_std = 2.0 * std::sqrt(var);
  return res;
}

// ---------------------------------------------------------------------------

/// Mean fraction of each row's topk cosine neighbors in M retained among
/// its topk cosine neighbors in Z.
inline double neighborhood_preservation(const DenseMatrix& m, const DenseMatrix& z,
                                        std::size_t topk) {
  if (m.rows() != z.rows()) throw std::invalid_argument("neighborhood_preservation: row mismatch");
  const std::size_t n = m.rows();
  if (topk > n - 1) throw std::invalid_argument("neighborhood_preservation: topk exceeds n-1");
  auto mnorms = detail::row_norms_checked(m);
  auto znorms = detail::row_norms_checked(z);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto a = detail::topk_for_row(m, mnorms, i, topk);
    auto b = detail::topk_for_row(z, znorms, i, topk);
    std::vector<std::size_t> sa, sb;
    for (const auto& [j, s] : a) sa.push_back(j);
    for (const auto& [j, s] : b) sb.push_back(j);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::vector<std::size_t> inter;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
    total += static_cast<double>(inter.size()) / static_cast<double>(topk);
  }
  return total / static_cast<double>(n);
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("spearman: need two equal-length series of size >= 2");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  auto rx = ranks(xs);
  auto ry = ranks(ys);
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    double dx = rx[i] - mx;
    double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------

struct EvalReport {
  std::string method;
  std::string dataset;
  std::size_t dims = 0;
  std::size_t folds = 0;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  double two_std = 0.0;
  double ari = 0.0;
  double neighborhood_preservation_rate = 0.0;
  double time_graph_seconds = 0.0;
  double time_walk_seconds = 0.0;
  double time_train_seconds = 0.0;
  double time_embed_seconds = 0.0;
  double time_eval_seconds = 0.0;

  std::vector<std::pair<std::string, std::string>> entries() const {
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("method", method);
    e.emplace_back("dataset", dataset);
    e.emplace_back("dims", std::to_string(dims));
    e.emplace_back("folds", std::to_string(folds));
    for (std::size_t i = 0; i < fold_accuracies.size(); ++i)
      e.emplace_back("fold_" + std::to_string(i) + "_accuracy",
                     detail::format_double(fold_accuracies[i]));
    e.emplace_back("mean_accuracy", detail::format_double(mean_accuracy));
    e.emplace_back("accuracy_two_std", detail::format_double(two_std));
    e.emplace_back("ari", detail::format_double(ari));
    e.emplace_back("neighborhood_preservation", detail::format_double(neighborhood_preservation_rate));
    e.emplace_back("time_graph_seconds", detail::format_double(time_graph_seconds));
    e.emplace_back("time_walk_seconds", detail::format_double(time_walk_seconds));
    e.emplace_back("time_train_seconds", detail::format_double(time_train_seconds));
    e.emplace_back("time_embed_seconds", detail::format_double(time_embed_seconds));
    e.emplace_back("time_eval_seconds", detail::format_double(time_eval_seconds));
    return e;
  }

  // Flat key-value form
  void write_keyvalue(std::ostream& out) const {
    for (const auto& [k, v] : entries()) out << k << " = " << v << '\n';
  }

  // Machine-readable record: "metric<TAB>value"
  void write_record(std::ostream& out) const {
    for (const auto& [k, v] : entries()) out << k << '\t' << v << '\n';
  }
};

}  // namespace vec2vec
