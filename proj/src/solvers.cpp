#include "homogmem/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "homogmem/error.hpp"

namespace homogmem {
namespace {

std::vector<double> inverse_diagonal(std::span<const double> d) {
  std::vector<double> inv(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) inv[i] = d[i] > 0.0 ? 1.0 / d[i] : 1.0;
  return inv;
}

LinearOperator as_operator(const SparseMatrix& a) {
  return [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
}

}  // namespace

SolveReport conjugate_gradient(const LinearOperator& a, std::span<const double> inv_diag,
                               std::span<const double> b, std::span<double> x,
                               const SolveOptions& opts) {
  const std::size_t n = b.size();
  require(x.size() == n && inv_diag.size() == n, Errc::invalid_argument, "cg: size mismatch");
  require(opts.tol > 0.0, Errc::invalid_argument, "cg: tolerance must be positive");
  const std::size_t cap = opts.max_iterations ? opts.max_iterations : std::max<std::size_t>(10 * n, 10);

  SolveReport rep;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return rep;
  }
  std::vector<double> r(n), z(n), p(n), q(n);
  a(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rnorm = norm2(r);
  rep.relative_residual = rnorm / bnorm;
  if (rep.relative_residual <= opts.tol) return rep;

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  while (rep.iterations < cap) {
    a(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw ConvergenceError("cg: operator is not positive definite", rep.relative_residual);
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++rep.iterations;
    rnorm = norm2(r);
    rep.relative_residual = rnorm / bnorm;
    if (rep.relative_residual <= opts.tol) {
      // guard against drift of the recursive residual
      a(x, q);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
      rep.relative_residual = norm2(r) / bnorm;
      if (rep.relative_residual <= opts.tol) return rep;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw ConvergenceError("cg: iteration cap of " + std::to_string(cap) +
                             " reached, relative residual " + std::to_string(rep.relative_residual),
                         rep.relative_residual);
}

std::vector<double> solve_spd(const SparseMatrix& a, std::span<const double> b,
                              const SolveOptions& opts, SolveReport* report,
                              std::span<const double> x0) {
  const std::size_t n = a.size();
  require(b.size() == n, Errc::invalid_argument, "solve_spd: rhs size mismatch");
  require(x0.empty() || x0.size() == n, Errc::invalid_argument, "solve_spd: guess size mismatch");

  if (n > 1 && a.at(n - 1, n - 1) == 0.0) {
    std::vector<Triplet> inner;
    std::vector<double> c(n - 1, 0.0);
    for (const auto& t : a.triplets()) {
      if (t.row < n - 1 && t.col < n - 1) inner.push_back(t);
      else if (t.row == n - 1 && t.col < n - 1) c[t.col] = t.value;
    }
    const auto sol = solve_bordered(SparseMatrix::from_triplets(n - 1, inner), c,
                                    b.first(n - 1), b[n - 1], opts,
                                    x0.empty() ? x0 : x0.first(n - 1));
    if (report) *report = sol.report;
    std::vector<double> x = sol.x;
    x.push_back(sol.multiplier);
    return x;
  }

  std::vector<double> x(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), x.begin());
  const auto inv = inverse_diagonal(a.diagonal());
  const auto rep = conjugate_gradient(as_operator(a), inv, b, x, opts);
  if (report) *report = rep;
  return x;
}

BorderedSolution solve_bordered(const SparseMatrix& a, std::span<const double> c,
                                std::span<const double> b, double g, const SolveOptions& opts,
                                std::span<const double> x0) {
  const std::size_t n = a.size();
  require(c.size() == n && b.size() == n, Errc::invalid_argument, "solve_bordered: size mismatch");
  require(x0.empty() || x0.size() == n, Errc::invalid_argument, "solve_bordered: guess size mismatch");
  const double csum = std::accumulate(c.begin(), c.end(), 0.0);
  const double cc = dot(c, c);
  require(cc > 0.0, Errc::invalid_argument, "solve_bordered: empty constraint row");

  BorderedSolution sol;
  sol.x.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), sol.x.begin());

  const std::vector<double> ones(n, 1.0);
  const double null_defect = norm2(a * ones) / (a.max_abs() * std::sqrt(double(n)));
  const auto diag = a.diagonal();

  if (null_defect < 1e-12 && csum != 0.0) {
    // Constants span the null space: the multiplier follows from 1^T b, and the
    // rank-one term s c c^T makes the operator definite without changing the solution.
    sol.multiplier = std::accumulate(b.begin(), b.end(), 0.0) / csum;
    const double s = std::accumulate(diag.begin(), diag.end(), 0.0) / (double(n) * cc);
    std::vector<double> rhs(n), inv(n);
    for (std::size_t i = 0; i < n; ++i) {
      rhs[i] = b[i] - c[i] * sol.multiplier + s * c[i] * g;
      const double d = diag[i] + s * c[i] * c[i];
      inv[i] = d > 0.0 ? 1.0 / d : 1.0;
    }
    LinearOperator op = [&](std::span<const double> x, std::span<double> y) {
      a.multiply(x, y);
      const double cx = s * dot(c, x);
      for (std::size_t i = 0; i < n; ++i) y[i] += cx * c[i];
    };
    sol.report = conjugate_gradient(op, inv, rhs, sol.x, opts);
  } else {
    // Nonsingular A: Schur complement on the scalar multiplier.
    const auto inv = inverse_diagonal(diag);
    std::vector<double> xb(sol.x), xc(n, 0.0);
    const auto r1 = conjugate_gradient(as_operator(a), inv, b, xb, opts);
    const auto r2 = conjugate_gradient(as_operator(a), inv, c, xc, opts);
    const double schur = dot(c, xc);
    require(schur != 0.0, Errc::invalid_argument, "solve_bordered: singular Schur complement");
    sol.multiplier = (dot(c, xb) - g) / schur;
    for (std::size_t i = 0; i < n; ++i) sol.x[i] = xb[i] - sol.multiplier * xc[i];
    sol.report.iterations = r1.iterations + r2.iterations;
  }

  // residual of the full bordered system
  std::vector<double> r(n);
  a.multiply(sol.x, r);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ri = b[i] - r[i] - c[i] * sol.multiplier;
    acc += ri * ri;
  }
  const double rg = g - dot(c, sol.x);
  const double rhs_norm = std::sqrt(dot(b, b) + g * g);
  sol.report.relative_residual = rhs_norm > 0.0 ? std::sqrt(acc + rg * rg) / rhs_norm : 0.0;
  if (sol.report.relative_residual > std::max(opts.tol, 1e-13) * 10.0)
    throw ConvergenceError("solve_bordered: residual " + std::to_string(sol.report.relative_residual) +
                               " above tolerance",
                           sol.report.relative_residual);
  return sol;
}

struct SparseCholesky::Impl {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

SparseCholesky::SparseCholesky(const SparseMatrix& a) : impl_(std::make_unique<Impl>()), n_(a.size()) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.nnz());
  for (const auto& e : a.triplets())
    t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
  Eigen::SparseMatrix<double> m(static_cast<int>(n_), static_cast<int>(n_));
  m.setFromTriplets(t.begin(), t.end());
  impl_->llt.compute(m);
  if (impl_->llt.info() != Eigen::Success)
    fail(Errc::convergence, "sparse Cholesky failed: matrix is not positive definite");
}

SparseCholesky::SparseCholesky() = default;
SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

void SparseCholesky::solve(std::span<const double> b, std::span<double> x) const {
  require(impl_ != nullptr, Errc::invalid_argument, "cholesky: no matrix factorized");
  require(b.size() == n_ && x.size() == n_, Errc::invalid_argument, "cholesky: size mismatch");
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(n_));
  Eigen::Map<Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(n_));
  xv = impl_->llt.solve(bv);
}

std::vector<double> SparseCholesky::solve(std::span<const double> b) const {
  std::vector<double> x(n_);
  solve(b, x);
  return x;
}

}  // namespace homogmem
