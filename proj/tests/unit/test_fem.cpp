#include <doctest.h>

#include <cmath>

#include "homogmem/error.hpp"
#include "homogmem/fem.hpp"
#include "homogmem/solvers.hpp"

using namespace homogmem;

namespace {

TriMesh single_right_triangle(double h) {
  return TriMesh({{0, 0}, {h, 0}, {0, h}}, {{0, 1, 2}}, {Region::omega},
                 {{{0, 1}, BoundaryTag::outer}, {{1, 2}, BoundaryTag::outer}, {{2, 0}, BoundaryTag::outer}});
}

TriMesh mirrored(const TriMesh& m) {
  auto verts = m.vertices();
  for (auto& p : verts) p.x = 1.0 - p.x;
  auto tris = m.triangles();
  for (auto& t : tris) std::swap(t[1], t[2]);
  return TriMesh(verts, tris, m.regions(), m.boundary_edges());
}

}  // namespace

TEST_CASE("element stiffness of a right triangle") {
  for (double h : {1.0, 0.1, 1e-3}) {
    const auto a = assemble_stiffness(single_right_triangle(h), Diffusivity::uniform(1.0));
    const double expected[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(a.at(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-13));
  }
}

TEST_CASE("stiffness invariants") {
  const auto mesh = build_cell_mesh(CellGeometry{}, 0.06, 64);
  const auto a = assemble_stiffness(mesh, Diffusivity::uniform(2.5));
  CHECK(a.is_symmetric(1e-12));
  for (double d : a.diagonal()) CHECK(d >= 0.0);
  const double scale = a.max_abs();
  for (double s : a.row_sums()) CHECK(std::abs(s) <= 1e-12 * scale);

  const auto tensor = assemble_stiffness(mesh, Diffusivity::uniform(Tensor2::isotropic(1.0)));
  const auto scalar = assemble_stiffness(mesh, Diffusivity::uniform(1.0));
  const auto diff = linear_combination(1.0, tensor, -1.0, scalar);
  CHECK(diff.max_abs() <= 1e-14);

  const auto y1 = assemble_stiffness(mesh, Diffusivity::uniform(1.0), mask_of(Region::y1));
  const auto y2 = assemble_stiffness(mesh, Diffusivity::uniform(1.0), mask_of(Region::y2));
  CHECK(linear_combination(1.0, y1, 1.0, y2).at(0, 0) == doctest::Approx(scalar.at(0, 0)));

  CHECK_THROWS_AS(assemble_stiffness(mesh, Diffusivity::uniform(Tensor2{1.0, 0.2, 0.1, 1.0})), Error);
  CHECK_THROWS_AS(assemble_stiffness(mesh, Diffusivity::uniform(-1.0)), Error);
}

TEST_CASE("patch test: P1 reproduces linear fields") {
  const auto mesh = build_cell_mesh(CellGeometry{}, 0.07, 48);
  const Tensor2 d{2.0, 0.3, 0.3, 1.0};
  const auto a = assemble_stiffness(mesh, Diffusivity::uniform(d));
  std::vector<double> u(mesh.num_vertices());
  for (std::size_t v = 0; v < u.size(); ++v) u[v] = 0.7 * mesh.vertices()[v].x - 1.3 * mesh.vertices()[v].y + 0.2;
  const auto r = a * u;
  std::vector<bool> on_boundary(u.size(), false);
  for (const auto& e : mesh.boundary_edges())
    if (e.tag == BoundaryTag::outer) on_boundary[e.v[0]] = on_boundary[e.v[1]] = true;
  for (std::size_t v = 0; v < u.size(); ++v)
    if (!on_boundary[v]) CHECK(std::abs(r[v]) <= 1e-12);
}

TEST_CASE("mass matrix") {
  const auto tri = single_right_triangle(0.5);
  const auto m = assemble_mass(tri);
  const double s = 0.125;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(m.at(i, j) == doctest::Approx(s / 12.0 * (i == j ? 2 : 1)));

  const auto mesh = build_cell_mesh(CellGeometry{}, 0.05, 64);
  for (RegionMask mask : {kAllRegions, mask_of(Region::y1), mask_of(Region::y2)}) {
    const auto mm = assemble_mass(mesh, mask);
    const std::vector<double> ones(mesh.num_vertices(), 1.0);
    CHECK(std::abs(mm.bilinear(ones, ones) - mesh.area(mask)) <= 1e-12);
  }
  CHECK_THROWS_AS(assemble_mass(build_unit_square_mesh(2), mask_of(Region::y2)), Error);

  const auto integrals = assemble_basis_integrals(mesh);
  const auto rows = assemble_mass(mesh).row_sums();
  for (std::size_t v = 0; v < rows.size(); ++v) CHECK(integrals[v] == doctest::Approx(rows[v]).epsilon(1e-12));
}

TEST_CASE("corrector right-hand side") {
  SUBCASE("single triangle entries sum to zero") {
    for (int i : {1, 2}) {
      auto b = assemble_corrector_rhs(single_right_triangle(0.3), i, 1.7, kAllRegions);
      CHECK(std::abs(b[0] + b[1] + b[2]) < 1e-15);
    }
  }
  SUBCASE("homogeneous periodic cell has zero folded rhs") {
    const auto cell = build_homogeneous_cell_mesh(0.1);
    for (int i : {1, 2}) {
      const auto b = assemble_corrector_rhs(cell, i, 1.0);
      const auto dofs = make_dof_map(cell, {.periodic = true});
      for (double v : dofs.fold(b)) CHECK(std::abs(v) < 1e-14);
    }
  }
  SUBCASE("mirror symmetry") {
    const auto mesh = build_cell_mesh(CellGeometry{}, 0.06, 64);
    const auto mirror = mirrored(mesh);
    const auto b1 = assemble_corrector_rhs(mesh, 1, 1.0);
    const auto m1 = assemble_corrector_rhs(mirror, 1, 1.0);
    const auto b2 = assemble_corrector_rhs(mesh, 2, 1.0);
    const auto m2 = assemble_corrector_rhs(mirror, 2, 1.0);
    for (std::size_t v = 0; v < b1.size(); ++v) {
      CHECK(std::abs(m1[v] + b1[v]) <= 1e-14);
      CHECK(std::abs(m2[v] - b2[v]) <= 1e-14);
    }
  }
  CHECK_THROWS_AS(assemble_corrector_rhs(build_unit_square_mesh(1), 3, 1.0), Error);
  CHECK_THROWS_AS(assemble_corrector_rhs(build_unit_square_mesh(1), 0, 1.0), Error);
}

TEST_CASE("natural flux condition needs no surface term") {
  const auto mesh = build_cell_mesh(CellGeometry{}, 0.06, 64).restricted(mask_of(Region::y1));
  const auto b = assemble_corrector_rhs(mesh, 1, 1.0);
  const auto flux = assemble_boundary_flux(mesh, BoundaryTag::inclusion, [](Point) { return 0.0; });
  for (std::size_t v = 0; v < b.size(); ++v) CHECK(b[v] + flux[v] == b[v]);

  const auto unit = assemble_boundary_flux(build_unit_square_mesh(4), BoundaryTag::outer, [](Point) { return 1.0; });
  double total = 0.0;
  for (double x : unit) total += x;
  CHECK(total == doctest::Approx(4.0));
}

TEST_CASE("projection right-hand side is exact for quadratics") {
  const auto mesh = build_unit_square_mesh(5);
  const auto b = assemble_projection_rhs(mesh, [](double x, double y) { return x * y + x * x; });
  double total = 0.0;
  for (double v : b) total += v;
  CHECK(total == doctest::Approx(0.25 + 1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("constraints") {
  SUBCASE("no constraints is the identity transformation") {
    const auto mesh = build_unit_square_mesh(3);
    const auto a = assemble_stiffness(mesh, Diffusivity::uniform(1.0));
    std::vector<double> b(mesh.num_vertices());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = double(i);
    const auto sys = apply_constraints(a, b, mesh, {});
    CHECK(sys.matrix.size() == a.size());
    CHECK(linear_combination(1.0, sys.matrix, -1.0, a).max_abs() == 0.0);
    CHECK(sys.rhs == b);
  }
  SUBCASE("full Dirichlet n = 2 leaves one dof with entry 4") {
    const auto mesh = build_unit_square_mesh(2);
    const auto a = assemble_stiffness(mesh, Diffusivity::uniform(1.0));
    const std::vector<double> b(9, 1.0);
    const auto sys = apply_constraints(a, b, mesh, {.dirichlet = {BoundaryTag::outer}});
    REQUIRE(sys.matrix.size() == 1);
    CHECK(sys.matrix.at(0, 0) == doctest::Approx(4.0));
    CHECK(sys.dofs.eliminated.size() == 8);
    CHECK(sys.dofs.vertex_to_dof[4] == 0);
  }
  SUBCASE("periodic zero-mean homogeneous cell gives the zero solution") {
    const auto cell = build_homogeneous_cell_mesh(0.1);
    const auto a = assemble_stiffness(cell, Diffusivity::uniform(1.0));
    const auto b = assemble_corrector_rhs(cell, 1, 1.0);
    const auto sys = apply_constraints(a, b, cell, {.periodic = true, .zero_mean = true});
    CHECK(sys.dofs.has_multiplier);
    CHECK(sys.matrix.size() == sys.dofs.num_dofs + 1);
    CHECK(sys.matrix.is_symmetric());
    const auto x = solve_spd(sys.matrix, sys.rhs);
    for (double v : x) CHECK(std::abs(v) < 1e-12);
  }
  SUBCASE("periodic folding sums slave rows into masters") {
    const auto mesh = periodic_pairs(build_unit_square_mesh(4));
    const auto a = assemble_stiffness(mesh, Diffusivity::uniform(1.0));
    const std::vector<double> b(mesh.num_vertices(), 1.0);
    const auto sys = apply_constraints(a, b, mesh, {.periodic = true});
    CHECK(sys.matrix.size() == 16);
    CHECK(sys.rhs[sys.dofs.vertex_to_dof[0]] == 4.0);
    for (double s : sys.matrix.row_sums()) CHECK(std::abs(s) < 1e-12);
    const auto u = sys.dofs.expand(std::vector<double>(16, 2.0));
    for (double v : u) CHECK(v == 2.0);
  }
  SUBCASE("errors") {
    const auto mesh = build_unit_square_mesh(2);
    const auto a = assemble_stiffness(mesh, Diffusivity::uniform(1.0));
    const std::vector<double> b(9, 0.0);
    CHECK_THROWS_AS(apply_constraints(a, b, mesh, {.dirichlet = {BoundaryTag::inclusion}}), Error);
    CHECK_THROWS_AS(apply_constraints(a, b, mesh, {.periodic = true}), Error);
    const auto paired = periodic_pairs(mesh);
    CHECK_THROWS_AS(make_dof_map(paired, {.dirichlet = {BoundaryTag::outer}, .periodic = true}), Error);
  }
}
