#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vec2vec/matrix.hpp"
#include "vec2vec/rng.hpp"

namespace vec2vec {

/// Gaussian blobs: cluster centers sit on scaled coordinate axes so every
/// pair of centers is exactly `separation` apart; unit-variance isotropic
/// noise. Labels are assigned round-robin (balanced classes).
inline DenseMatrix make_blobs(std::size_t n, std::size_t dims, std::size_t clusters,
                              double separation, std::uint64_t seed) {
  if (clusters < 1 || clusters > dims)
    throw std::invalid_argument("make_blobs: need 1 <= clusters <= dims");
  if (n < clusters) throw std::invalid_argument("make_blobs: need n >= clusters");

  double scale = separation / std::sqrt(2.0);
  DenseMatrix m(n, dims);
  std::vector<int> labels(n);
  Rng rng(Rng::mix(seed, 0xb10b));
  for (std::size_t i = 0; i < n; ++i) {
    int label = static_cast<int>(i % clusters);
    labels[i] = label;
    auto row = m.row(i);
    for (std::size_t c = 0; c < dims; ++c) row[c] = rng.normal();
    row[static_cast<std::size_t>(label)] += scale;
  }
  m.set_labels(std::move(labels));
  return m;
}

/// Points along a fixed line through the origin with optional isotropic noise.
inline DenseMatrix make_line(std::size_t n, std::size_t dims, double noise, std::uint64_t seed) {
  if (dims < 1 || n < 2) throw std::invalid_argument("make_line: need dims >= 1 and n >= 2");
  std::vector<double> dir(dims);
  for (std::size_t c = 0; c < dims; ++c) dir[c] = 1.0 + static_cast<double>(c);
  double dn = norm(dir);
  for (double& v : dir) v /= dn;

  DenseMatrix m(n, dims);
  Rng rng(Rng::mix(seed, 0x11e));
  for (std::size_t i = 0; i < n; ++i) {
    double t = rng.uniform() * 10.0 + 0.5;
    auto row = m.row(i);
    for (std::size_t c = 0; c < dims; ++c) row[c] = t * dir[c] + noise * rng.normal();
  }
  return m;
}

/// Write a matrix as CSV; if labels are present they become column 0.
inline void save_csv(const DenseMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (m.has_labels()) out << m.labels()[r] << ',';
    for (std::size_t c = 0; c < m.cols(); ++c)
      out << (c ? "," : "") << detail::format_double(m(r, c));
    out << '\n';
  }
}

}  // namespace vec2vec
