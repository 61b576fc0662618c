#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vec2vec {

/// Dense row-major matrix of doubles. Immutable by convention once shared
/// across workers; all mutation happens before that.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw std::invalid_argument("DenseMatrix: data length != rows * cols");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_.data() + r * cols_, cols_);
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data_.data() + r * cols_, cols_);
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const {
    if (!labels_) throw std::logic_error("DenseMatrix: no labels present");
    return *labels_;
  }
  void set_labels(std::vector<int> labels) {
    if (labels.size() != rows_)
      throw std::invalid_argument("DenseMatrix: label count != row count");
    labels_ = std::move(labels);
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
  std::optional<std::vector<int>> labels_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Cosine similarity of two equal-length vectors. Throws on zero norm.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: length mismatch");
  double na = norm(a);
  double nb = norm(b);
  if (na == 0.0) throw std::domain_error("cosine_similarity: zero-norm vector (first argument)");
  if (nb == 0.0) throw std::domain_error("cosine_similarity: zero-norm vector (second argument)");
  return dot(a, b) / (na * nb);
}

/// Cosine similarity between two rows of M; errors name the offending row.
inline double row_cosine(const DenseMatrix& m, std::size_t i, std::size_t j) {
  double ni = norm(m.row(i));
  double nj = norm(m.row(j));
  if (ni == 0.0) throw std::domain_error("zero-norm row " + std::to_string(i));
  if (nj == 0.0) throw std::domain_error("zero-norm row " + std::to_string(j));
  return dot(m.row(i), m.row(j)) / (ni * nj);
}

inline DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimension mismatch (" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
  DenseMatrix c(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      const auto brow = b.row(k);
      auto crow = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

namespace detail {

inline double parse_field(const std::string& field, std::size_t line_no) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r')) --last;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw std::runtime_error("CSV: unparseable field '" + field + "' at line " +
                             std::to_string(line_no));
  if (!std::isfinite(value))
    throw std::runtime_error("CSV: non-finite value at line " + std::to_string(line_no));
  return value;
}

inline void split_csv_line(const std::string& line, std::vector<std::string>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// 17 significant digits round-trips an IEEE double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Load a CSV of numeric fields. Optional header line; optional label column
/// split out into row labels.
inline DenseMatrix load_csv(const std::string& path, bool has_header = false,
                            std::optional<std::size_t> label_column = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;
  std::vector<std::string> fields;
  bool skipped_header = !has_header;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    detail::split_csv_line(line, fields);
    if (cols == 0) {
      cols = fields.size();
      if (label_column && *label_column >= cols)
        throw std::runtime_error("CSV: label column " + std::to_string(*label_column) +
                                 " out of range (row has " + std::to_string(cols) + " fields)");
    } else if (fields.size() != cols) {
      throw std::runtime_error("CSV: ragged row at line " + std::to_string(line_no) +
                               " (expected " + std::to_string(cols) + " fields, got " +
                               std::to_string(fields.size()) + ")");
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = detail::parse_field(fields[c], line_no);
      if (label_column && c == *label_column)
        labels.push_back(static_cast<int>(std::llround(v)));
      else
        values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error("CSV: empty file: " + path);

  std::size_t data_cols = cols - (label_column ? 1 : 0);
  DenseMatrix m(rows, data_cols, std::move(values));
  if (label_column) m.set_labels(std::move(labels));
  return m;
}

/// Text embedding format: header "n d", then one line per row:
/// "row_index v1 ... vd" printed to 17 significant digits.
inline void save_embedding(const DenseMatrix& z, std::ostream& out) {
  out << z.rows() << ' ' << z.cols() << '\n';
  for (std::size_t r = 0; r < z.rows(); ++r) {
    out << r;
    for (std::size_t c = 0; c < z.cols(); ++c) out << ' ' << detail::format_double(z(r, c));
    out << '\n';
  }
}

inline void save_embedding(const DenseMatrix& z, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  save_embedding(z, out);
}

inline DenseMatrix load_embedding(std::istream& in) {
  std::size_t n = 0, d = 0;
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("embedding: missing header");
  {
    std::istringstream hs(header);
    if (!(hs >> n >> d) || n == 0 || d == 0)
      throw std::runtime_error("embedding: malformed header '" + header + "'");
  }
  DenseMatrix z(n, d);
  std::string line;
  std::size_t seen = 0;
  std::vector<std::string> fields;
  while (seen < n && std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t idx = 0;
    if (!(ls >> idx) || idx >= n)
      throw std::runtime_error("embedding: bad row index in line '" + line + "'");
    for (std::size_t c = 0; c < d; ++c) {
      std::string tok;
      if (!(ls >> tok))
        throw std::runtime_error("embedding: short row " + std::to_string(idx));
      z(idx, c) = detail::parse_field(tok, seen + 2);
    }
    ++seen;
  }
  if (seen != n)
    throw std::runtime_error("embedding: header promises " + std::to_string(n) +
                             " rows, found " + std::to_string(seen));
  return z;
}

inline DenseMatrix load_embedding(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return load_embedding(in);
}

}  // namespace vec2vec
