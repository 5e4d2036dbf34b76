#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "homogmem/sparse.hpp"

namespace homogmem {

struct SolveOptions {
  double tol = 1e-10;             ///< relative residual ||Ax - b|| / ||b||
  std::size_t max_iterations = 0; ///< 0 means 10 N
};

struct SolveReport {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Symmetric operator y = A x used by the matrix-free conjugate gradient.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Jacobi-preconditioned conjugate gradient on a matrix-free operator.
/// `x` holds the initial guess on entry and the solution on exit.
SolveReport conjugate_gradient(const LinearOperator& a, std::span<const double> inv_diag,
                               std::span<const double> b, std::span<double> x,
                               const SolveOptions& opts = {});

/// Solves A x = b for symmetric positive definite A. A bordered zero-mean
/// system (last row/column the constraint, zero corner) is recognised and
/// routed through solve_bordered.
std::vector<double> solve_spd(const SparseMatrix& a, std::span<const double> b,
                              const SolveOptions& opts = {}, SolveReport* report = nullptr,
                              std::span<const double> x0 = {});

struct BorderedSolution {
  std::vector<double> x;
  double multiplier = 0.0;
  SolveReport report;  ///< residual of the full bordered system
};

/// Saddle system [A c; c^T 0][x; mu] = [b; g] with A symmetric positive
/// semidefinite and either nonsingular or with null space span{1}.
BorderedSolution solve_bordered(const SparseMatrix& a, std::span<const double> c,
                                std::span<const double> b, double g,
                                const SolveOptions& opts = {},
                                std::span<const double> x0 = {});

/// Sparse Cholesky factorisation of an SPD matrix (fill-reducing ordering).
class SparseCholesky {
 public:
  /// Empty factorization; solve() throws until a matrix is assigned.
  SparseCholesky();
  explicit SparseCholesky(const SparseMatrix& a);
  ~SparseCholesky();
  SparseCholesky(SparseCholesky&&) noexcept;
  SparseCholesky& operator=(SparseCholesky&&) noexcept;

  std::size_t size() const noexcept { return n_; }
  void solve(std::span<const double> b, std::span<double> x) const;
  std::vector<double> solve(std::span<const double> b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t n_ = 0;
};

struct EigenPairs {
  std::vector<double> values;               ///< ascending
  std::vector<std::vector<double>> vectors; ///< M-orthonormal
  std::vector<double> residuals;            ///< ||K phi - lambda M phi|| / (lambda ||M phi||)
  std::size_t iterations = 0;

  std::size_t count() const noexcept { return values.size(); }
};

struct EigenOptions {
  double tol = 1e-9;
  std::size_t block_size = 0;  ///< 0 picks a size from m
  std::size_t max_iterations = 500;
  std::uint64_t seed = 20240917;
  /// Each eigenvector is signed so that reference . phi >= 0; defaults to M 1.
  std::vector<double> sign_reference;
};

/// The m algebraically smallest eigenpairs of K phi = lambda M phi for
/// symmetric positive definite K and M, by shift-invert block Krylov
/// iteration at shift 0 with Rayleigh-Ritz extraction and thick restarts.
EigenPairs smallest_eigenpairs(const SparseMatrix& k, const SparseMatrix& m, std::size_t count,
                               const EigenOptions& opts = {});

}  // namespace homogmem
