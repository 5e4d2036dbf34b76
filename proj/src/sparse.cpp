#include "homogmem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "homogmem/error.hpp"

namespace homogmem {

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::span<const Triplet> entries) {
  SparseMatrix a;
  a.n_ = n;
  std::vector<std::size_t> counts(n + 1, 0);
  for (const auto& t : entries) {
    require(t.row < n && t.col < n, Errc::invalid_argument, "triplet index out of range");
    ++counts[t.row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) counts[i + 1] += counts[i];

  std::vector<std::size_t> cols(entries.size());
  std::vector<double> vals(entries.size());
  std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
  for (const auto& t : entries) {
    const std::size_t k = fill[t.row]++;
    cols[k] = t.col;
    vals[k] = t.value;
  }

  a.row_offsets_.assign(n + 1, 0);
  a.col_indices_.reserve(entries.size());
  a.values_.reserve(entries.size());
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = counts[i];
    const std::size_t end = counts[i + 1];
    order.resize(end - begin);
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = begin + k;
    // stable so that duplicate summation order is deterministic
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t p, std::size_t q) { return cols[p] < cols[q]; });
    for (std::size_t k : order) {
      if (!a.col_indices_.empty() && a.col_indices_.size() > a.row_offsets_[i] &&
          a.col_indices_.back() == cols[k]) {
        a.values_.back() += vals[k];
      } else {
        a.col_indices_.push_back(cols[k]);
        a.values_.push_back(vals[k]);
      }
    }
    a.row_offsets_[i + 1] = a.col_indices_.size();
  }
  return a;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, t);
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  require(i < n_ && j < n_, Errc::invalid_argument, "matrix index out of range");
  const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  require(x.size() == n_ && y.size() == n_, Errc::invalid_argument,
          "matrix-vector dimension mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      s += values_[k] * x[col_indices_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

double SparseMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
  const auto ay = (*this) * y;
  return dot(x, ay);
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
  return d;
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> s(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s[i] += values_[k];
  return s;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::asymmetry() const {
  const double scale = max_abs();
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      worst = std::max(worst, std::abs(values_[k] - at(col_indices_[k], i)));
  return worst / scale;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      t.push_back({i, col_indices_[k], values_[k]});
  return t;
}

SparseMatrix linear_combination(double alpha, const SparseMatrix& a, double beta,
                                const SparseMatrix& b) {
  require(a.size() == b.size(), Errc::invalid_argument, "matrix dimension mismatch");
  auto ta = a.triplets();
  for (auto& t : ta) t.value *= alpha;
  for (auto t : b.triplets()) {
    t.value *= beta;
    ta.push_back(t);
  }
  return SparseMatrix::from_triplets(a.size(), ta);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.size() << ' ' << a.size() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (const auto& t : a.triplets()) out << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value << '\n';
}

double dot(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), Errc::invalid_argument, "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace homogmem
