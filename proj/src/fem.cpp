#include "homogmem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "homogmem/error.hpp"

namespace homogmem {

double Tensor2::asymmetry() const { return std::abs(xy - yx); }

std::array<double, 2> Tensor2::eigenvalues() const {
  const double off = 0.5 * (xy + yx);
  const double mean = 0.5 * (xx + yy);
  const double rad = std::hypot(0.5 * (xx - yy), off);
  return {mean - rad, mean + rad};
}

std::array<std::array<double, 2>, 3> basis_gradients(const TriMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles()[t];
  const auto& v = mesh.vertices();
  const double two_area = 2.0 * mesh.signed_area(t);
  std::array<std::array<double, 2>, 3> g{};
  for (int i = 0; i < 3; ++i) {
    const Point& b = v[tri[(i + 1) % 3]];
    const Point& c = v[tri[(i + 2) % 3]];
    g[i] = {(b.y - c.y) / two_area, (c.x - b.x) / two_area};
  }
  return g;
}

std::array<double, 2> field_gradient(const TriMesh& mesh, std::size_t t, std::span<const double> u) {
  const auto g = basis_gradients(mesh, t);
  const auto& tri = mesh.triangles()[t];
  std::array<double, 2> out{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    out[0] += u[tri[i]] * g[i][0];
    out[1] += u[tri[i]] * g[i][1];
  }
  return out;
}

SparseMatrix assemble_stiffness(const TriMesh& mesh, const Diffusivity& coeff, RegionMask mask) {
  for (Region r : {Region::omega, Region::y1, Region::y2}) {
    if (!(mask & mask_of(r))) continue;
    const Tensor2& c = coeff[r];
    require(c.asymmetry() <= 1e-14 * std::max({std::abs(c.xx), std::abs(c.yy), 1.0}),
            Errc::invalid_argument, "diffusion tensor must be symmetric");
    require(c.positive_definite(), Errc::invalid_argument,
            "diffusion coefficient must be positive definite");
  }
  std::vector<Triplet> entries;
  entries.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!(mask & mask_of(mesh.regions()[t]))) continue;
    const Tensor2& c = coeff[mesh.regions()[t]];
    const double area = mesh.signed_area(t);
    const auto g = basis_gradients(mesh, t);
    const auto& tri = mesh.triangles()[t];
    for (int i = 0; i < 3; ++i) {
      const auto cg = c.apply(g[i]);
      for (int j = 0; j < 3; ++j)
        entries.push_back({tri[j], tri[i], area * (cg[0] * g[j][0] + cg[1] * g[j][1])});
    }
  }
  return SparseMatrix::from_triplets(mesh.num_vertices(), entries);
}

SparseMatrix assemble_mass(const TriMesh& mesh, RegionMask mask) {
  std::vector<Triplet> entries;
  entries.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!(mask & mask_of(mesh.regions()[t]))) continue;
    const double s = mesh.signed_area(t) / 12.0;
    const auto& tri = mesh.triangles()[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) entries.push_back({tri[i], tri[j], i == j ? 2.0 * s : s});
  }
  require(!entries.empty(), Errc::invalid_argument, "assemble_mass: empty subdomain");
  return SparseMatrix::from_triplets(mesh.num_vertices(), entries);
}

std::vector<double> assemble_corrector_rhs(const TriMesh& mesh, int direction, double d,
                                           RegionMask mask) {
  require(direction == 1 || direction == 2, Errc::invalid_argument,
          "corrector direction must be 1 or 2");
  const int k = direction - 1;
  std::vector<double> b(mesh.num_vertices(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!(mask & mask_of(mesh.regions()[t]))) continue;
    const double area = mesh.signed_area(t);
    const auto g = basis_gradients(mesh, t);
    const auto& tri = mesh.triangles()[t];
    for (int j = 0; j < 3; ++j) b[tri[j]] -= area * d * g[j][k];
  }
  return b;
}

std::vector<double> assemble_basis_integrals(const TriMesh& mesh, RegionMask mask) {
  std::vector<double> c(mesh.num_vertices(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!(mask & mask_of(mesh.regions()[t]))) continue;
    const double third = mesh.signed_area(t) / 3.0;
    for (std::size_t v : mesh.triangles()[t]) c[v] += third;
  }
  return c;
}

std::vector<double> assemble_boundary_flux(const TriMesh& mesh, BoundaryTag tag,
                                           const std::function<double(Point)>& g) {
  std::vector<double> b(mesh.num_vertices(), 0.0);
  const double s = 0.5 / std::sqrt(3.0);
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag != tag) continue;
    const Point p = mesh.vertices()[e.v[0]];
    const Point q = mesh.vertices()[e.v[1]];
    const double len = std::hypot(q.x - p.x, q.y - p.y);
    for (double xi : {0.5 - s, 0.5 + s}) {
      const double val = g({p.x + xi * (q.x - p.x), p.y + xi * (q.y - p.y)}) * 0.5 * len;
      b[e.v[0]] += val * (1.0 - xi);
      b[e.v[1]] += val * xi;
    }
  }
  return b;
}

std::vector<double> assemble_projection_rhs(const TriMesh& mesh,
                                            const std::function<double(double, double)>& f,
                                            RegionMask mask) {
  std::vector<double> b(mesh.num_vertices(), 0.0);
  const auto& v = mesh.vertices();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!(mask & mask_of(mesh.regions()[t]))) continue;
    const auto& tri = mesh.triangles()[t];
    std::array<double, 3> mid{};  // mid[i]: midpoint of the edge opposite vertex i
    for (int i = 0; i < 3; ++i) {
      const Point& p = v[tri[(i + 1) % 3]];
      const Point& q = v[tri[(i + 2) % 3]];
      mid[i] = f(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
    }
    const double w = mesh.signed_area(t) / 6.0;
    for (int i = 0; i < 3; ++i) b[tri[i]] += w * (mid[(i + 1) % 3] + mid[(i + 2) % 3]);
  }
  return b;
}

std::vector<double> DofMap::expand(std::span<const double> x) const {
  require(x.size() >= num_dofs, Errc::invalid_argument, "dof vector too short");
  std::vector<double> u(vertex_to_dof.size(), 0.0);
  for (std::size_t v = 0; v < u.size(); ++v)
    if (vertex_to_dof[v] != kEliminated) u[v] = x[vertex_to_dof[v]];
  return u;
}

std::vector<double> DofMap::fold(std::span<const double> vertex_vector) const {
  require(vertex_vector.size() == vertex_to_dof.size(), Errc::invalid_argument,
          "vertex vector size mismatch");
  std::vector<double> out(num_dofs, 0.0);
  for (std::size_t v = 0; v < vertex_vector.size(); ++v)
    if (vertex_to_dof[v] != kEliminated) out[vertex_to_dof[v]] += vertex_vector[v];
  return out;
}

std::vector<double> DofMap::sample(std::span<const double> vertex_values) const {
  require(vertex_values.size() == vertex_to_dof.size(), Errc::invalid_argument,
          "vertex vector size mismatch");
  std::vector<double> out(num_dofs, 0.0);
  for (std::size_t v = 0; v < vertex_values.size(); ++v)
    if (vertex_to_dof[v] != kEliminated) out[vertex_to_dof[v]] = vertex_values[v];
  return out;
}

DofMap make_dof_map(const TriMesh& mesh, const ConstraintSpec& spec) {
  const std::size_t n = mesh.num_vertices();
  std::vector<bool> dirichlet(n, false);
  for (BoundaryTag tag : spec.dirichlet) {
    require(mesh.has_tag(tag), Errc::invalid_argument,
            std::string("Dirichlet tag '") + to_string(tag) + "' is absent from the mesh");
    for (const auto& e : mesh.boundary_edges())
      if (e.tag == tag) dirichlet[e.v[0]] = dirichlet[e.v[1]] = true;
  }
  if (spec.periodic)
    require(mesh.has_periodic_pairs(), Errc::invalid_argument,
            "periodic constraint requested on a mesh without periodic pairs");

  auto is_slave = [&](std::size_t v) {
    return spec.periodic && mesh.master_of()[v] != TriMesh::kNoMaster;
  };

  DofMap map;
  map.vertex_to_dof.assign(n, DofMap::kEliminated);
  for (std::size_t v = 0; v < n; ++v) {
    if (dirichlet[v] && is_slave(v))
      fail(Errc::invalid_argument, "vertex is both Dirichlet-eliminated and a periodic slave");
    if (dirichlet[v] || is_slave(v)) {
      map.eliminated.push_back(v);
      continue;
    }
    map.vertex_to_dof[v] = map.num_dofs++;
  }
  for (std::size_t v = 0; v < n; ++v)
    if (is_slave(v)) {
      const std::size_t m = mesh.master_of()[v];
      require(!dirichlet[m], Errc::invalid_argument, "periodic master is Dirichlet-eliminated");
      map.vertex_to_dof[v] = map.vertex_to_dof[m];
    }
  map.has_multiplier = spec.zero_mean;
  return map;
}

SparseMatrix reduce(const SparseMatrix& a, const DofMap& dofs) {
  require(a.size() == dofs.vertex_to_dof.size(), Errc::invalid_argument,
          "matrix does not match the dof map");
  std::vector<Triplet> entries;
  entries.reserve(a.nnz());
  for (const auto& t : a.triplets()) {
    const std::size_t i = dofs.vertex_to_dof[t.row];
    const std::size_t j = dofs.vertex_to_dof[t.col];
    if (i == DofMap::kEliminated || j == DofMap::kEliminated) continue;
    entries.push_back({i, j, t.value});
  }
  return SparseMatrix::from_triplets(dofs.num_dofs, entries);
}

ConstrainedSystem apply_constraints(const SparseMatrix& a, std::span<const double> b,
                                    const TriMesh& mesh, const ConstraintSpec& spec) {
  require(a.size() == mesh.num_vertices() && b.size() == mesh.num_vertices(),
          Errc::invalid_argument, "system does not match the mesh");
  ConstrainedSystem sys;
  sys.dofs = make_dof_map(mesh, spec);
  const DofMap& dofs = sys.dofs;
  sys.rhs = dofs.fold(b);

  if (!spec.zero_mean) {
    sys.matrix = reduce(a, dofs);
    return sys;
  }

  std::vector<Triplet> entries = reduce(a, dofs).triplets();
  const auto mean_row = dofs.fold(assemble_basis_integrals(mesh));
  const std::size_t last = dofs.num_dofs;
  for (std::size_t j = 0; j < dofs.num_dofs; ++j) {
    entries.push_back({last, j, mean_row[j]});
    entries.push_back({j, last, mean_row[j]});
  }
  entries.push_back({last, last, 0.0});
  sys.matrix = SparseMatrix::from_triplets(dofs.num_dofs + 1, entries);
  sys.rhs.push_back(0.0);
  return sys;
}

}  // namespace homogmem
