#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "homogmem/error.hpp"
#include "homogmem/solvers.hpp"

namespace homogmem {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// M-orthonormal basis V with cached M V and the projection T = V^T K V.
class KrylovBasis {
 public:
  KrylovBasis(const SparseMatrix& k, const SparseMatrix& m, Index cap, std::mt19937_64& rng)
      : k_(k), m_(m), n_(static_cast<Index>(k.size())), v_(n_, cap), mv_(n_, cap), t_(cap, cap), rng_(rng) {}

  Index dim() const { return dim_; }
  Index capacity() const { return v_.cols(); }
  auto basis() const { return v_.leftCols(dim_); }
  auto mbasis() const { return mv_.leftCols(dim_); }
  auto projection() const { return t_.topLeftCorner(dim_, dim_); }

  /// Appends w after M-orthogonalisation; falls back to random directions when w is dependent.
  void append(VectorXd w) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double before = std::sqrt(std::max(w.dot(apply(m_, w)), 0.0));
      for (int pass = 0; pass < 2; ++pass) {
        if (dim_ == 0) break;
        const VectorXd h = mv_.leftCols(dim_).transpose() * w;
        w.noalias() -= v_.leftCols(dim_) * h;
      }
      const VectorXd mw = apply(m_, w);
      const double norm = std::sqrt(std::max(w.dot(mw), 0.0));
      if (before > 0.0 && norm > 1e-10 * before) {
        v_.col(dim_) = w / norm;
        mv_.col(dim_) = mw / norm;
        const VectorXd kv = apply(k_, v_.col(dim_));
        const VectorXd row = v_.leftCols(dim_ + 1).transpose() * kv;
        t_.block(0, dim_, dim_ + 1, 1) = row;
        t_.block(dim_, 0, 1, dim_ + 1) = row.transpose();
        ++dim_;
        return;
      }
      w = random_vector();
    }
    fail(Errc::convergence, "eigensolver: cannot extend the search space");
  }

  /// Replaces the basis with V Y (Y orthonormal columns) and T with diag(theta).
  void compress(const MatrixXd& y, const VectorXd& theta) {
    const Index keep = y.cols();
    MatrixXd v = v_.leftCols(dim_) * y;
    MatrixXd mv = mv_.leftCols(dim_) * y;
    v_.leftCols(keep) = v;
    mv_.leftCols(keep) = mv;
    t_.topLeftCorner(keep, keep) = theta.asDiagonal();
    dim_ = keep;
  }

  VectorXd random_vector() {
    std::normal_distribution<double> normal;
    VectorXd r(n_);
    for (Index i = 0; i < n_; ++i) r[i] = normal(rng_);
    return r;
  }

  static VectorXd apply(const SparseMatrix& a, const VectorXd& x) {
    VectorXd y(x.size());
    a.multiply(std::span<const double>(x.data(), x.size()), std::span<double>(y.data(), y.size()));
    return y;
  }

 private:
  const SparseMatrix& k_;
  const SparseMatrix& m_;
  Index n_;
  MatrixXd v_, mv_, t_;
  Index dim_ = 0;
  std::mt19937_64& rng_;
};

}  // namespace

EigenPairs smallest_eigenpairs(const SparseMatrix& k, const SparseMatrix& m, std::size_t count,
                               const EigenOptions& opts) {
  const std::size_t n = k.size();
  require(m.size() == n, Errc::invalid_argument, "eigensolver: K and M sizes differ");
  require(count <= n, Errc::invalid_argument,
          "eigensolver: requested " + std::to_string(count) + " eigenpairs of a pencil of size " +
              std::to_string(n));
  require(opts.sign_reference.empty() || opts.sign_reference.size() == n, Errc::invalid_argument,
          "eigensolver: sign reference size mismatch");
  EigenPairs out;
  if (count == 0) return out;

  const SparseCholesky kinv(k);
  std::mt19937_64 rng(opts.seed);

  const Index want = static_cast<Index>(count);
  const Index nn = static_cast<Index>(n);
  const Index p = std::min<Index>(nn, opts.block_size ? static_cast<Index>(opts.block_size)
                                                      : std::clamp<Index>(want / 4, 4, 24));
  const Index cap = std::min<Index>(nn, std::max(2 * want + 2 * p, want + 4 * p));
  KrylovBasis basis(k, m, cap, rng);

  auto shift_invert = [&](const VectorXd& x) {
    const VectorXd mx = KrylovBasis::apply(m, x);
    VectorXd y(nn);
    kinv.solve(std::span<const double>(mx.data(), n), std::span<double>(y.data(), n));
    return y;
  };

  std::vector<VectorXd> source;
  for (Index j = 0; j < p; ++j) source.push_back(basis.random_vector());

  VectorXd theta;
  MatrixXd y;
  std::vector<double> residuals;
  double worst = INFINITY;
  bool done = false;
  for (std::size_t iter = 1; iter <= opts.max_iterations; ++iter) {
    const Index room = std::min<Index>(static_cast<Index>(source.size()), cap - basis.dim());
    const Index first_new = basis.dim();
    for (Index j = 0; j < room; ++j) basis.append(shift_invert(source[j]));
    out.iterations = iter;
    if (basis.dim() < want) {
      source.clear();
      for (Index j = first_new; j < basis.dim(); ++j) source.push_back(basis.basis().col(j));
      continue;
    }

    MatrixXd t = basis.projection();
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (t + t.transpose()));
    theta = eig.eigenvalues();
    y = eig.eigenvectors();

    // residuals of the wanted Ritz pairs, in order, up to the first failure
    residuals.assign(count, INFINITY);
    Index converged = 0;
    const bool exhausted = basis.dim() == nn;
    for (Index j = 0; j < want; ++j) {
      const VectorXd x = basis.basis() * y.col(j);
      const VectorXd mx = basis.mbasis() * y.col(j);
      const VectorXd r = KrylovBasis::apply(k, x) - theta[j] * mx;
      residuals[j] = r.norm() / (std::abs(theta[j]) * mx.norm());
      if (residuals[j] > opts.tol && !exhausted) break;
      ++converged;
    }
    worst = residuals[std::min(converged, want - 1)];
    if (converged == want) {
      done = true;
      break;
    }

    source.clear();
    if (basis.dim() + p > cap) {
      const Index keep = std::min<Index>(basis.dim(), std::min(cap - p, want + p));
      basis.compress(y.leftCols(keep), theta.head(keep));
      for (Index j = converged; j < std::min(converged + p, keep); ++j)
        source.push_back(basis.basis().col(j));
    } else {
      for (Index j = first_new; j < basis.dim(); ++j) source.push_back(basis.basis().col(j));
    }
  }
  if (!done)
    throw ConvergenceError("eigensolver: no convergence after " + std::to_string(out.iterations) +
                               " iterations, residual " + std::to_string(worst),
                           worst);

  const std::vector<double> ref =
      opts.sign_reference.empty() ? m * std::vector<double>(n, 1.0) : opts.sign_reference;
  out.values.resize(count);
  out.vectors.resize(count);
  out.residuals = residuals;
  for (Index j = 0; j < want; ++j) {
    out.values[j] = theta[j];
    VectorXd x = basis.basis() * y.col(j);
    double s = 0.0, ref_norm = 0.0;
    for (Index i = 0; i < nn; ++i) {
      s += ref[i] * x[i];
      ref_norm += ref[i] * ref[i];
    }
    // modes orthogonal to the reference (up to round-off) use their largest entry instead
    if (std::abs(s) <= 1e-9 * std::sqrt(ref_norm) * x.norm()) {
      Index imax = 0;
      x.cwiseAbs().maxCoeff(&imax);
      s = x[imax];
    }
    if (s < 0.0) x = -x;
    out.vectors[j].assign(x.data(), x.data() + nn);
  }
  return out;
}

}  // namespace homogmem
