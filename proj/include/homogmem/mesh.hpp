#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace homogmem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Triangle labels: the periodicity cell is split into the matrix phase Y1
/// and the inclusion Y2; Omega labels the macroscale domain.
enum class Region : std::uint8_t { omega = 0, y1 = 1, y2 = 2 };

enum class BoundaryTag : std::uint8_t { outer = 0, inclusion = 1 };

const char* to_string(Region r) noexcept;
const char* to_string(BoundaryTag t) noexcept;

/// Bit mask over regions, used to restrict assembly loops.
using RegionMask = std::uint8_t;
constexpr RegionMask mask_of(Region r) { return static_cast<RegionMask>(1u << static_cast<unsigned>(r)); }
constexpr RegionMask kAllRegions = 0x7;

struct BoundaryEdge {
  std::array<std::size_t, 2> v;
  BoundaryTag tag;
};

/// Conforming triangulation with per-triangle region labels, tagged boundary
/// edges and an optional periodic slave -> master vertex map.
class TriMesh {
 public:
  static constexpr std::size_t kNoMaster = static_cast<std::size_t>(-1);

  TriMesh() = default;
  TriMesh(std::vector<Point> vertices, std::vector<std::array<std::size_t, 3>> triangles,
          std::vector<Region> regions, std::vector<BoundaryEdge> boundary_edges);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<std::array<std::size_t, 3>>& triangles() const noexcept { return triangles_; }
  const std::vector<Region>& regions() const noexcept { return regions_; }
  const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_edges_; }

  /// master_of()[v] is the master of slave vertex v, or kNoMaster.
  const std::vector<std::size_t>& master_of() const noexcept { return master_of_; }
  bool has_periodic_pairs() const noexcept { return !master_of_.empty(); }
  void set_periodic_pairs(std::vector<std::size_t> master_of);

  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_triangles() const noexcept { return triangles_.size(); }

  double signed_area(std::size_t t) const;
  double area(RegionMask mask = kAllRegions) const;
  std::size_t count(Region r) const;
  bool has_tag(BoundaryTag tag) const;

  /// Submesh made of the triangles in `mask`, vertices renumbered in
  /// increasing original order. Boundary edges are recomputed topologically;
  /// edges that were not tagged in the parent (phase interfaces) become
  /// `inclusion`. Periodic pairs survive when both ends are kept.
  TriMesh restricted(RegionMask mask, std::vector<std::size_t>* parent_vertex = nullptr) const;

  /// Throws geometry-error on a violated invariant: positive orientation,
  /// every edge shared by at most two triangles, tagged edges on the
  /// topological boundary.
  void validate() const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::array<std::size_t, 3>> triangles_;
  std::vector<Region> regions_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<std::size_t> master_of_;
};

/// Elliptical inclusion inside the unit periodicity cell.
struct CellGeometry {
  double a = 0.4;          ///< major semi-axis
  double b = 0.2;          ///< minor semi-axis
  double angle_deg = 30.0; ///< rotation of the major axis
  double d1 = 1.0;         ///< matrix diffusivity
  double d2 = 1.0;         ///< inclusion diffusivity (scaled)
  Point center{0.5, 0.5};

  double inclusion_measure() const noexcept;
  /// Half widths of the axis-aligned bounding box of the ellipse.
  std::array<double, 2> half_extents() const noexcept;
  /// Throws geometry-error for degenerate axes or boundary contact and
  /// invalid-argument for nonpositive diffusivities.
  void validate() const;
  /// Vertices of the inscribed polygon at uniform parametric angle.
  std::vector<Point> inscribed_polygon(std::size_t n_arc) const;
};

/// Area of the inscribed n-gon produced by CellGeometry::inscribed_polygon.
double inscribed_polygon_area(const CellGeometry& g, std::size_t n_arc);

bool point_in_polygon(const std::vector<Point>& polygon, Point p);

/// Structured (n+1)^2-vertex mesh of [x0,x1]x[y0,y1], each rectangle split along
/// its bottom-left to top-right diagonal.
TriMesh build_rectangle_mesh(Point lower, Point upper, std::size_t nx, std::size_t ny,
                             Region region = Region::omega,
                             BoundaryTag tag = BoundaryTag::outer);

TriMesh build_unit_square_mesh(std::size_t n);

/// Boundary-conforming Delaunay mesh of the unit cell with the ellipse
/// resolved as an inscribed n_arc-gon. Opposite sides of the cell carry
/// identical vertex layouts and periodic pairs are filled in. A nonzero
/// `jitter` (fraction of h, at most 0.25) displaces interior lattice points by
/// a fixed-seed random offset, giving an unstructured mesh without the
/// central symmetry of the plain lattice.
TriMesh build_cell_mesh(const CellGeometry& geom, double h, std::size_t n_arc = 128,
                        double jitter = 0.0);

/// Periodic unit cell with no inclusion; every triangle is labeled Y1.
TriMesh build_homogeneous_cell_mesh(double h);

/// Pairs left/right and bottom/top vertices of the unit-square frame; the
/// three non-origin corners become slaves of the corner at (0,0).
TriMesh periodic_pairs(TriMesh mesh, double tol = 1e-9);

/// Physical-group mapping used by the MSH reader and writer.
struct MshTagMap {
  std::map<int, Region> regions{{1, Region::y1}, {2, Region::y2}, {3, Region::omega}};
  std::map<int, BoundaryTag> boundaries{{1, BoundaryTag::outer}, {2, BoundaryTag::inclusion}};
};

TriMesh read_msh(const std::filesystem::path& path, const MshTagMap& tags = {});
void write_msh(const TriMesh& mesh, const std::filesystem::path& path, const MshTagMap& tags = {});

/// Native JSON dump: vertices, triangles, regions, boundary edges, pairs.
void write_mesh_json(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh read_mesh_json(const std::filesystem::path& path);

}  // namespace homogmem
