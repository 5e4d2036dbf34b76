#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "homogmem/mesh.hpp"
#include "homogmem/solvers.hpp"

namespace homogmem {

struct KernelTerm {
  double a = 0.0;       ///< amplitude, 1/time
  double lambda = 0.0;  ///< decay rate, 1/time
};

/// One eigenpair's contribution before filtering.
struct SpectralTerm {
  double lambda = 0.0;
  double projection = 0.0;  ///< (1, phi_k) with the Y2 mass matrix
  double a = 0.0;
};

/// chi(t) ~ sum_k a_k exp(-lambda_k t) plus the delta weight r.
struct KernelApproximation {
  std::vector<KernelTerm> terms;    ///< kept terms, ascending lambda
  std::vector<SpectralTerm> raw;    ///< all m computed terms
  double r = 0.0;                   ///< remainder used by the macro solver
  double r_raw = 0.0;               ///< (|Y2| - sum (1,phi)^2) / (1 - |Y2|) before clamping
  double y2_measure = 0.0;          ///< discrete mesh measure of Y2
  double y2_measure_analytic = 0.0; ///< pi a b
  double epsilon = 0.0;
  double rho = 0.0;                 ///< chi_m(0) - chi_{m(eps)}(0)
  bool rho_folded = false;
  double max_residual = 0.0;        ///< largest eigenpair residual

  std::size_t raw_count() const noexcept { return raw.size(); }
  std::size_t kept_count() const noexcept { return terms.size(); }
  bool r_clamped() const noexcept { return r_raw < 0.0; }
  /// |Y2| / (1 - |Y2|), the m = 0 remainder.
  double r0() const noexcept { return y2_measure / (1.0 - y2_measure); }
  /// sum of kept a_k
  double chi0() const;
  /// sum of kept a_k / lambda_k
  double integral() const;
};

/// Kernel from given eigenvalues and projections (1, phi_k) on a Y2 of measure `y2_measure`.
KernelApproximation build_kernel_from_spectrum(std::span<const double> lambda,
                                               std::span<const double> projection,
                                               double y2_measure);

/// Dirichlet eigenproblem -d2 Laplace(phi) = lambda phi on the inclusion mesh
/// (all triangles Y2, boundary tagged `inclusion`), first m pairs.
KernelApproximation build_kernel(const TriMesh& y2, const CellGeometry& geom, std::size_t m,
                                 const EigenOptions& opts = {});

/// Drops terms with a_k < eps. r is untouched unless fold_rho, which adds the
/// dropped sum of a_k / lambda_k to it.
KernelApproximation filter(const KernelApproximation& kernel, double eps, bool fold_rho = false);

/// Keeps the first m raw terms, recomputes r for that m and refilters with
/// the kernel's epsilon.
KernelApproximation truncate(const KernelApproximation& kernel, std::size_t m);

double eval_kernel(const KernelApproximation& kernel, double t);

void write_kernel_json(const KernelApproximation& kernel, const std::filesystem::path& path);
KernelApproximation read_kernel_json(const std::filesystem::path& path);

/// (t, chi(t)) at t = 0 and `count` log-spaced points in [t_min, t_max].
void write_kernel_samples(const KernelApproximation& kernel, const std::filesystem::path& path,
                          double t_min = 1e-5, double t_max = 1.0, std::size_t count = 200);

}  // namespace homogmem
