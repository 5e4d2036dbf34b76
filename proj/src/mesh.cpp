#include "homogmem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "homogmem/error.hpp"

namespace homogmem {

const char* to_string(Region r) noexcept {
  switch (r) {
    case Region::omega: return "Omega";
    case Region::y1: return "Y1";
    case Region::y2: return "Y2";
  }
  return "?";
}

const char* to_string(BoundaryTag t) noexcept {
  return t == BoundaryTag::outer ? "outer" : "inclusion";
}

namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

}  // namespace

TriMesh::TriMesh(std::vector<Point> vertices, std::vector<std::array<std::size_t, 3>> triangles,
                 std::vector<Region> regions, std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      regions_(std::move(regions)),
      boundary_edges_(std::move(boundary_edges)) {
  require(regions_.size() == triangles_.size(), Errc::invalid_argument,
          "one region label per triangle required");
  for (const auto& t : triangles_)
    for (std::size_t v : t)
      require(v < vertices_.size(), Errc::invalid_argument, "triangle vertex out of range");
  for (const auto& e : boundary_edges_)
    for (std::size_t v : e.v)
      require(v < vertices_.size(), Errc::invalid_argument, "edge vertex out of range");
}

void TriMesh::set_periodic_pairs(std::vector<std::size_t> master_of) {
  require(master_of.empty() || master_of.size() == vertices_.size(), Errc::invalid_argument,
          "periodic map must cover every vertex");
  for (std::size_t v = 0; v < master_of.size(); ++v) {
    const std::size_t m = master_of[v];
    if (m == kNoMaster) continue;
    require(m < vertices_.size() && m != v, Errc::periodicity, "invalid periodic master");
    require(master_of[m] == kNoMaster, Errc::periodicity, "periodic master is itself a slave");
  }
  master_of_ = std::move(master_of);
}

double TriMesh::signed_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  const Point& a = vertices_[tri[0]];
  const Point& b = vertices_[tri[1]];
  const Point& c = vertices_[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double TriMesh::area(RegionMask mask) const {
  // Neumaier summation keeps the partition-of-area identity at round-off level
  double s = 0.0, comp = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    if (!(mask & mask_of(regions_[t]))) continue;
    const double a = signed_area(t);
    const double next = s + a;
    comp += std::abs(s) >= std::abs(a) ? (s - next) + a : (a - next) + s;
    s = next;
  }
  return s + comp;
}

std::size_t TriMesh::count(Region r) const {
  return static_cast<std::size_t>(std::count(regions_.begin(), regions_.end(), r));
}

bool TriMesh::has_tag(BoundaryTag tag) const {
  return std::any_of(boundary_edges_.begin(), boundary_edges_.end(),
                     [tag](const BoundaryEdge& e) { return e.tag == tag; });
}

TriMesh TriMesh::restricted(RegionMask mask, std::vector<std::size_t>* parent_vertex) const {
  constexpr std::size_t kUnused = static_cast<std::size_t>(-1);
  std::vector<std::size_t> new_index(vertices_.size(), kUnused);
  std::vector<std::size_t> kept;
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    if (mask & mask_of(regions_[t])) {
      kept.push_back(t);
      for (std::size_t v : triangles_[t]) new_index[v] = 0;
    }

  std::vector<Point> verts;
  std::vector<std::size_t> parent;
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (new_index[v] != kUnused) {
      new_index[v] = verts.size();
      verts.push_back(vertices_[v]);
      parent.push_back(v);
    }

  std::vector<std::array<std::size_t, 3>> tris;
  std::vector<Region> regs;
  std::unordered_map<std::uint64_t, int> edge_count;
  for (std::size_t t : kept) {
    const auto& tri = triangles_[t];
    tris.push_back({new_index[tri[0]], new_index[tri[1]], new_index[tri[2]]});
    regs.push_back(regions_[t]);
    for (int i = 0; i < 3; ++i) ++edge_count[edge_key(tri[i], tri[(i + 1) % 3])];
  }

  std::unordered_map<std::uint64_t, BoundaryTag> parent_tags;
  for (const auto& e : boundary_edges_) parent_tags.emplace(edge_key(e.v[0], e.v[1]), e.tag);

  std::vector<BoundaryEdge> edges;
  for (const auto& e : boundary_edges_) {
    if (new_index[e.v[0]] == kUnused || new_index[e.v[1]] == kUnused) continue;
    if (!edge_count.contains(edge_key(e.v[0], e.v[1]))) continue;
    edges.push_back({{new_index[e.v[0]], new_index[e.v[1]]}, e.tag});
  }
  // topological boundary edges that were untagged in the parent are interfaces
  for (std::size_t t : kept) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      const std::size_t a = tri[i];
      const std::size_t b = tri[(i + 1) % 3];
      const auto key = edge_key(a, b);
      if (edge_count[key] == 1 && !parent_tags.contains(key))
        edges.push_back({{new_index[a], new_index[b]}, BoundaryTag::inclusion});
    }
  }

  TriMesh sub(std::move(verts), std::move(tris), std::move(regs), std::move(edges));
  if (has_periodic_pairs()) {
    std::vector<std::size_t> master(sub.num_vertices(), kNoMaster);
    for (std::size_t v = 0; v < parent.size(); ++v) {
      const std::size_t m = master_of_[parent[v]];
      if (m != kNoMaster && new_index[m] != kUnused) master[v] = new_index[m];
    }
    sub.set_periodic_pairs(std::move(master));
  }
  if (parent_vertex) *parent_vertex = std::move(parent);
  return sub;
}

void TriMesh::validate() const {
  std::unordered_map<std::uint64_t, int> edge_count;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    if (!(signed_area(t) > 0.0)) {
      std::ostringstream msg;
      msg << "triangle " << t << " is not positively oriented";
      fail(Errc::geometry, msg.str());
    }
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) ++edge_count[edge_key(tri[i], tri[(i + 1) % 3])];
  }
  std::unordered_map<std::uint64_t, BoundaryTag> tagged;
  for (const auto& e : boundary_edges_) {
    const auto key = edge_key(e.v[0], e.v[1]);
    require(edge_count.contains(key), Errc::geometry, "tagged boundary edge is not a mesh edge");
    tagged.emplace(key, e.tag);
  }
  for (const auto& [key, n] : edge_count) {
    require(n <= 2, Errc::geometry, "edge shared by more than two triangles");
    if (n == 1 && !boundary_edges_.empty())
      require(tagged.contains(key), Errc::geometry,
              "untagged boundary edge: mesh is not conforming");
  }
}

double CellGeometry::inclusion_measure() const noexcept { return std::numbers::pi * a * b; }

std::array<double, 2> CellGeometry::half_extents() const noexcept {
  const double th = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  return {std::sqrt(a * a * c * c + b * b * s * s), std::sqrt(a * a * s * s + b * b * c * c)};
}

void CellGeometry::validate() const {
  require(b > 0.0 && a >= b, Errc::geometry, "ellipse semi-axes must satisfy 0 < b <= a");
  require(d1 > 0.0 && d2 > 0.0, Errc::invalid_argument, "diffusivities must be positive");
  const auto ext = half_extents();
  const bool inside = center.x - ext[0] > 0.0 && center.x + ext[0] < 1.0 &&
                      center.y - ext[1] > 0.0 && center.y + ext[1] < 1.0;
  require(inside, Errc::geometry, "ellipse touches or crosses the cell boundary");
}

std::vector<Point> CellGeometry::inscribed_polygon(std::size_t n_arc) const {
  const double th = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  std::vector<Point> poly(n_arc);
  for (std::size_t j = 0; j < n_arc; ++j) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_arc);
    const double u = a * std::cos(phi);
    const double v = b * std::sin(phi);
    poly[j] = {center.x + c * u - s * v, center.y + s * u + c * v};
  }
  return poly;
}

double inscribed_polygon_area(const CellGeometry& g, std::size_t n_arc) {
  const double n = static_cast<double>(n_arc);
  return g.a * g.b * 0.5 * n * std::sin(2.0 * std::numbers::pi / n);
}

bool point_in_polygon(const std::vector<Point>& polygon, Point p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = polygon[i];
    const Point& b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

TriMesh build_rectangle_mesh(Point lower, Point upper, std::size_t nx, std::size_t ny,
                             Region region, BoundaryTag tag) {
  require(nx >= 1 && ny >= 1, Errc::invalid_argument, "subdivision count must be at least 1");
  require(upper.x > lower.x && upper.y > lower.y, Errc::invalid_argument, "empty rectangle");
  std::vector<Point> verts;
  verts.reserve((nx + 1) * (ny + 1));
  auto coord = [](double lo, double hi, std::size_t i, std::size_t n) {
    if (i == n) return hi;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
  };
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      verts.push_back({coord(lower.x, upper.x, i, nx), coord(lower.y, upper.y, j, ny)});

  auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  std::vector<std::array<std::size_t, 3>> tris;
  tris.reserve(2 * nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t bl = id(i, j), br = id(i + 1, j), tl = id(i, j + 1), tr = id(i + 1, j + 1);
      tris.push_back({bl, br, tr});
      tris.push_back({bl, tr, tl});
    }

  std::vector<BoundaryEdge> edges;
  for (std::size_t i = 0; i < nx; ++i) {
    edges.push_back({{id(i, 0), id(i + 1, 0)}, tag});
    edges.push_back({{id(i + 1, ny), id(i, ny)}, tag});
  }
  for (std::size_t j = 0; j < ny; ++j) {
    edges.push_back({{id(nx, j), id(nx, j + 1)}, tag});
    edges.push_back({{id(0, j + 1), id(0, j)}, tag});
  }
  std::vector<Region> regs(tris.size(), region);
  return TriMesh(std::move(verts), std::move(tris), std::move(regs), std::move(edges));
}

TriMesh build_unit_square_mesh(std::size_t n) {
  require(n >= 1, Errc::invalid_argument, "build_unit_square_mesh: n must be at least 1");
  return build_rectangle_mesh({0.0, 0.0}, {1.0, 1.0}, n, n, Region::omega, BoundaryTag::outer);
}

TriMesh periodic_pairs(TriMesh mesh, double tol) {
  const auto& verts = mesh.vertices();
  auto near = [tol](double a, double b) { return std::abs(a - b) <= tol; };

  std::vector<std::size_t> left, right, bottom, top;
  std::array<std::size_t, 4> corner{TriMesh::kNoMaster, TriMesh::kNoMaster, TriMesh::kNoMaster,
                                    TriMesh::kNoMaster};  // (0,0) (1,0) (0,1) (1,1)
  for (std::size_t v = 0; v < verts.size(); ++v) {
    const Point p = verts[v];
    const bool x0 = near(p.x, 0.0), x1 = near(p.x, 1.0), y0 = near(p.y, 0.0), y1 = near(p.y, 1.0);
    if ((x0 || x1) && (y0 || y1)) {
      corner[(x1 ? 1 : 0) + (y1 ? 2 : 0)] = v;
      continue;
    }
    if (x0) left.push_back(v);
    if (x1) right.push_back(v);
    if (y0) bottom.push_back(v);
    if (y1) top.push_back(v);
  }
  for (std::size_t c : corner)
    require(c != TriMesh::kNoMaster, Errc::periodicity,
            "mesh has no vertex at a corner of the unit cell");

  std::vector<std::size_t> master(verts.size(), TriMesh::kNoMaster);
  auto match = [&](std::vector<std::size_t> masters, const std::vector<std::size_t>& slaves,
                   bool by_y, const char* side) {
    auto key = [&](std::size_t v) { return by_y ? verts[v].y : verts[v].x; };
    std::sort(masters.begin(), masters.end(),
              [&](std::size_t p, std::size_t q) { return key(p) < key(q); });
    std::vector<bool> used(masters.size(), false);
    for (std::size_t s : slaves) {
      const double k = key(s);
      auto it = std::lower_bound(masters.begin(), masters.end(), k - tol,
                                 [&](std::size_t v, double value) { return key(v) < value; });
      if (it == masters.end() || key(*it) > k + tol || used[static_cast<std::size_t>(it - masters.begin())]) {
        std::ostringstream msg;
        msg << "no periodic partner for " << side << " vertex " << s << " at (" << verts[s].x
            << ", " << verts[s].y << ")";
        fail(Errc::periodicity, msg.str());
      }
      used[static_cast<std::size_t>(it - masters.begin())] = true;
      master[s] = *it;
    }
    if (std::find(used.begin(), used.end(), false) != used.end()) {
      fail(Errc::periodicity, std::string("unpaired vertex on the ") + side + " master side");
    }
  };
  match(left, right, true, "right");
  match(bottom, top, false, "top");
  master[corner[1]] = corner[0];
  master[corner[2]] = corner[0];
  master[corner[3]] = corner[0];
  mesh.set_periodic_pairs(std::move(master));
  return mesh;
}

}  // namespace homogmem
