#pragma once

#include <array>
#include <span>
#include <vector>

#include "homogmem/mesh.hpp"
#include "homogmem/solvers.hpp"

namespace homogmem {

struct CorrectorComponent {
  std::vector<double> theta;  ///< nodal values on the Y1 mesh
  double mu = 0.0;            ///< zero-mean multiplier
  double residual = 0.0;
  std::size_t iterations = 0;
};

struct CorrectorSolution {
  TriMesh y1;                              ///< Y1 part of the cell, periodic pairs kept
  std::vector<std::size_t> parent_vertex;  ///< y1 vertex -> cell vertex
  double d1 = 1.0;
  std::array<CorrectorComponent, 2> component;
};

struct EffectiveTensor {
  std::array<std::array<double, 2>, 2> d{};    ///< symmetrized
  std::array<std::array<double, 2>, 2> raw{};  ///< before symmetrization
  double asymmetry = 0.0;                      ///< |raw_12 - raw_21|
  double y1_measure = 0.0;                     ///< discrete |Y1|

  std::array<double, 2> eigenvalues() const;
};

/// Periodic zero-mean corrector for direction i in {1, 2} on a Y1 mesh.
CorrectorComponent solve_corrector(const TriMesh& y1, double d1, int direction,
                                   const SolveOptions& opts = {},
                                   std::span<const double> initial_guess = {});

/// Both correctors on the Y1 part of a periodic cell mesh. With threads >= 2
/// the two directions are solved concurrently.
CorrectorSolution solve_correctors(const TriMesh& cell, const CellGeometry& geom,
                                   const SolveOptions& opts = {}, unsigned threads = 1);

EffectiveTensor effective_tensor(const CorrectorSolution& correctors);

}  // namespace homogmem
