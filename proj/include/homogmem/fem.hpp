#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "homogmem/mesh.hpp"
#include "homogmem/sparse.hpp"

namespace homogmem {

/// 2x2 diffusion tensor, row-major.
struct Tensor2 {
  double xx = 1.0, xy = 0.0, yx = 0.0, yy = 1.0;

  static Tensor2 isotropic(double d) { return {d, 0.0, 0.0, d}; }

  std::array<double, 2> apply(std::array<double, 2> g) const {
    return {xx * g[0] + xy * g[1], yx * g[0] + yy * g[1]};
  }
  double asymmetry() const;
  /// Eigenvalues of the symmetric part, ascending.
  std::array<double, 2> eigenvalues() const;
  bool positive_definite() const { return eigenvalues()[0] > 0.0; }
};

/// Per-region coefficient; unset regions default to the identity tensor.
class Diffusivity {
 public:
  Diffusivity() { values_.fill(Tensor2::isotropic(1.0)); }
  static Diffusivity uniform(double d) { return uniform(Tensor2::isotropic(d)); }
  static Diffusivity uniform(const Tensor2& t) {
    Diffusivity c;
    c.values_.fill(t);
    return c;
  }
  Diffusivity& set(Region r, const Tensor2& t) {
    values_[static_cast<std::size_t>(r)] = t;
    return *this;
  }
  const Tensor2& operator[](Region r) const { return values_[static_cast<std::size_t>(r)]; }

 private:
  std::array<Tensor2, 3> values_;
};

/// Constant gradients of the three P1 basis functions of triangle t.
std::array<std::array<double, 2>, 3> basis_gradients(const TriMesh& mesh, std::size_t t);

/// Gradient of the P1 field with nodal values `u` on triangle t.
std::array<double, 2> field_gradient(const TriMesh& mesh, std::size_t t, std::span<const double> u);

SparseMatrix assemble_stiffness(const TriMesh& mesh, const Diffusivity& coeff,
                                RegionMask mask = kAllRegions);

/// Exact P1 mass matrix; throws invalid-argument when no triangle matches `mask`.
SparseMatrix assemble_mass(const TriMesh& mesh, RegionMask mask = kAllRegions);

/// b_j = -sum_T area(T) d (grad phi_j)_i over Y1 triangles, direction i in {1, 2}.
std::vector<double> assemble_corrector_rhs(const TriMesh& mesh, int direction, double d,
                                           RegionMask mask = mask_of(Region::y1));

/// Integrals of the basis functions, i.e. row sums of the mass matrix.
std::vector<double> assemble_basis_integrals(const TriMesh& mesh, RegionMask mask = kAllRegions);

/// Load vector of a boundary flux g on edges carrying `tag` (two-point Gauss).
std::vector<double> assemble_boundary_flux(const TriMesh& mesh, BoundaryTag tag,
                                           const std::function<double(Point)>& g);

/// (f, phi_j) with the edge-midpoint rule, exact for quadratics.
std::vector<double> assemble_projection_rhs(const TriMesh& mesh,
                                            const std::function<double(double, double)>& f,
                                            RegionMask mask = kAllRegions);

struct ConstraintSpec {
  std::vector<BoundaryTag> dirichlet;  ///< homogeneous Dirichlet on these tags
  bool periodic = false;               ///< fold periodic slaves onto masters
  bool zero_mean = false;              ///< border the system with the mean row
};

/// Vertex <-> degree-of-freedom bookkeeping after constraint elimination.
struct DofMap {
  static constexpr std::size_t kEliminated = static_cast<std::size_t>(-1);

  /// Dirichlet vertices map to kEliminated; periodic slaves share their master's dof.
  std::vector<std::size_t> vertex_to_dof;
  std::vector<std::size_t> eliminated;  ///< Dirichlet and slave vertices, ascending
  std::size_t num_dofs = 0;
  bool has_multiplier = false;

  std::size_t system_size() const { return num_dofs + (has_multiplier ? 1 : 0); }
  /// Vertex values from a dof vector (the multiplier entry, if any, is ignored).
  std::vector<double> expand(std::span<const double> x) const;
  /// P^T v: sums slave entries into their masters and drops Dirichlet entries.
  std::vector<double> fold(std::span<const double> vertex_vector) const;
  /// Dof values picked from vertex values.
  std::vector<double> sample(std::span<const double> vertex_values) const;
};

DofMap make_dof_map(const TriMesh& mesh, const ConstraintSpec& spec);

/// P^T A P for the dof map (no multiplier border).
SparseMatrix reduce(const SparseMatrix& a, const DofMap& dofs);

struct ConstrainedSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
  DofMap dofs;
};

/// Eliminates Dirichlet vertices (value 0), folds periodic slaves onto their
/// masters and optionally borders the system with the zero-mean row whose
/// entries are the folded basis integrals.
ConstrainedSystem apply_constraints(const SparseMatrix& a, std::span<const double> b,
                                    const TriMesh& mesh, const ConstraintSpec& spec);

}  // namespace homogmem
