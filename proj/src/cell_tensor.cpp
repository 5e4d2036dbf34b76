#include "homogmem/cell_tensor.hpp"

#include <cmath>
#include <thread>

#include "homogmem/error.hpp"
#include "homogmem/fem.hpp"

namespace homogmem {

std::array<double, 2> EffectiveTensor::eigenvalues() const {
  const Tensor2 t{d[0][0], d[0][1], d[1][0], d[1][1]};
  return t.eigenvalues();
}

CorrectorComponent solve_corrector(const TriMesh& y1, double d1, int direction,
                                   const SolveOptions& opts, std::span<const double> initial_guess) {
  require(d1 > 0.0, Errc::invalid_argument, "d1 must be positive");
  require(y1.has_periodic_pairs(), Errc::invalid_argument, "corrector mesh needs periodic pairs");
  const auto a = assemble_stiffness(y1, Diffusivity::uniform(d1), mask_of(Region::y1));
  const auto b = assemble_corrector_rhs(y1, direction, d1, mask_of(Region::y1));
  const auto sys = apply_constraints(a, b, y1, {.dirichlet = {}, .periodic = true, .zero_mean = true});

  std::vector<double> guess;
  if (!initial_guess.empty()) {
    guess = sys.dofs.sample(initial_guess);
    guess.push_back(0.0);
  }
  SolveReport rep;
  const auto x = solve_spd(sys.matrix, sys.rhs, opts, &rep, guess);

  CorrectorComponent out;
  out.theta = sys.dofs.expand(x);
  out.mu = x.back();
  out.residual = rep.relative_residual;
  out.iterations = rep.iterations;
  return out;
}

CorrectorSolution solve_correctors(const TriMesh& cell, const CellGeometry& geom,
                                   const SolveOptions& opts, unsigned threads) {
  require(geom.d1 > 0.0, Errc::invalid_argument, "d1 must be positive");
  require(cell.has_periodic_pairs(), Errc::invalid_argument, "cell mesh needs periodic pairs");
  CorrectorSolution sol;
  sol.y1 = cell.restricted(mask_of(Region::y1), &sol.parent_vertex);
  sol.d1 = geom.d1;

  if (threads >= 2) {
    std::exception_ptr err;
    std::thread worker([&] {
      try {
        sol.component[1] = solve_corrector(sol.y1, geom.d1, 2, opts);
      } catch (...) {
        err = std::current_exception();
      }
    });
    try {
      sol.component[0] = solve_corrector(sol.y1, geom.d1, 1, opts);
    } catch (...) {
      worker.join();
      throw;
    }
    worker.join();
    if (err) std::rethrow_exception(err);
  } else {
    for (int i = 0; i < 2; ++i) sol.component[i] = solve_corrector(sol.y1, geom.d1, i + 1, opts);
  }
  return sol;
}

EffectiveTensor effective_tensor(const CorrectorSolution& c) {
  const TriMesh& mesh = c.y1;
  EffectiveTensor out;
  out.y1_measure = mesh.area(mask_of(Region::y1));
  require(out.y1_measure > 0.0, Errc::invalid_argument, "empty Y1 region");
  std::array<std::array<double, 2>, 2> acc{};
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.regions()[t] != Region::y1) continue;
    const double area = mesh.signed_area(t);
    for (int i = 0; i < 2; ++i) {
      const auto g = field_gradient(mesh, t, c.component[i].theta);
      for (int j = 0; j < 2; ++j) acc[i][j] += area * c.d1 * ((i == j ? 1.0 : 0.0) + g[j]);
    }
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.raw[i][j] = acc[i][j] / out.y1_measure;
  out.asymmetry = std::abs(out.raw[0][1] - out.raw[1][0]);
  const double off = 0.5 * (out.raw[0][1] + out.raw[1][0]);
  out.d = {{{out.raw[0][0], off}, {off, out.raw[1][1]}}};
  return out;
}

}  // namespace homogmem
