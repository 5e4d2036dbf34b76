#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace homogmem {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Square sparse matrix in compressed-row layout. Column indices are sorted
/// within each row and duplicates are summed on construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(std::size_t n, std::span<const Triplet> entries);
  static SparseMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Entry (i, j); zero when not stored.
  double at(std::size_t i, std::size_t j) const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;
  std::vector<double> operator*(const std::vector<double>& x) const {
    return (*this) * std::span<const double>(x);
  }

  /// x^T A y
  double bilinear(std::span<const double> x, std::span<const double> y) const;

  std::vector<double> diagonal() const;
  std::vector<double> row_sums() const;
  double max_abs() const;

  /// Largest |A_ij - A_ji| relative to max|A|.
  double asymmetry() const;
  bool is_symmetric(double rel_tol = 1e-12) const { return asymmetry() <= rel_tol; }

  std::vector<Triplet> triplets() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

/// alpha * A + beta * B over the union of both sparsity patterns.
SparseMatrix linear_combination(double alpha, const SparseMatrix& a, double beta,
                                const SparseMatrix& b);

/// Matrix Market coordinate (real general) export.
void write_matrix_market(std::ostream& out, const SparseMatrix& a);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

}  // namespace homogmem
