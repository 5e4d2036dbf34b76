#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "homogmem/fem.hpp"
#include "homogmem/kernel.hpp"
#include "homogmem/mesh.hpp"
#include "homogmem/solvers.hpp"

namespace homogmem {

using ScalarField = std::function<double(double, double)>;

/// Homogenized problem on Omega with homogeneous Dirichlet data on the
/// `outer` boundary.
struct MacroProblem {
  TriMesh mesh;
  Tensor2 d = Tensor2::isotropic(1.0);
  std::vector<KernelTerm> terms;
  double r = 0.0;
  ScalarField u0;
  double tau = 1e-4;
  double sigma = 1.0;
  double t_end = 0.0;

  void set_kernel(const KernelApproximation& kernel) {
    terms = kernel.terms;
    r = kernel.r;
  }
  /// Number of steps to reach t_end.
  std::size_t steps() const;
  /// Energy stability for every tau needs sigma >= 1/2.
  bool unconditionally_stable() const { return sigma >= 0.5; }
  void validate() const;
};

/// Unknowns on the free dofs: concentration y and one auxiliary field per kernel term.
struct MacroState {
  std::vector<double> y;
  std::vector<std::vector<double>> w;
  std::size_t n = 0;
  double t = 0.0;
};

/// Matrices and the factorized step operator for one problem; step() is the
/// elimination of the auxiliary unknowns from the coupled two-level scheme.
class MacroSolver {
 public:
  explicit MacroSolver(const MacroProblem& problem);

  const MacroProblem& problem() const noexcept { return problem_; }
  const DofMap& dofs() const noexcept { return dofs_; }
  const SparseMatrix& mass() const noexcept { return mass_; }
  const SparseMatrix& stiffness() const noexcept { return stiffness_; }

  /// y0 = L2 projection of u0 onto the discrete space, w = 0.
  MacroState initial_state() const;
  /// State built from given dof values of y, w = 0.
  MacroState state_from(std::vector<double> y) const;
  void step(MacroState& state) const;

  /// y^T K y + sum_k a_k w_k^T M w_k
  double energy(const MacroState& state) const;
  /// sqrt(y^T M y)
  double l2_norm(const MacroState& state) const;
  /// Nodal values on every mesh vertex (zero on the boundary).
  std::vector<double> nodal(const MacroState& state) const;

 private:
  MacroProblem problem_;
  DofMap dofs_;
  SparseMatrix mass_, stiffness_;
  double lead_ = 1.0;  ///< 1 + r + sigma tau alpha
  std::vector<double> beta_;  ///< a_k / (1 + sigma lambda_k tau)
  SparseCholesky step_matrix_;
};

struct EnergyRecord {
  std::size_t n;
  double t;
  double energy;
  double l2_norm;
};

struct Snapshot {
  std::size_t n;
  double t;
  std::vector<double> values;  ///< nodal, one per mesh vertex
};

struct RunResult {
  std::vector<EnergyRecord> series;
  std::vector<Snapshot> snapshots;
  bool stability_warning = false;
  std::size_t steps = 0;
};

/// Initial projection, then steps to t_end. Snapshots are taken at the step
/// nearest each requested time.
RunResult run(const MacroProblem& problem, std::span<const double> snapshot_times = {});

/// Independent reference: the semi-discrete Volterra form
/// (1+r) M u' + M (chi * u') + K u = 0 with the same sigma-weighting and
/// the convolution integrated exactly against piecewise-linear u in time.
/// Returns the dof vector at every level 0..N. Limited to 1e5 levels.
std::vector<std::vector<double>> volterra_reference(const MacroProblem& problem);

}  // namespace homogmem
