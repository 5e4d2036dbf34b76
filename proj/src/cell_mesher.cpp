// Periodicity-cell mesher: Bowyer-Watson Delaunay insertion of a point set made
// of mirror-identical frame points, the inscribed inclusion polygon and a
// triangular lattice. Lattice points are kept out of the diametral circles of
// every constraint segment, so each segment is a Gabriel edge and appears in
// the triangulation without explicit recovery.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "homogmem/error.hpp"
#include "homogmem/mesh.hpp"

namespace homogmem {
namespace {

double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// > 0 when d lies strictly inside the circumcircle of the ccw triangle abc.
double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  return alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
         clift * (adx * bdy - bdx * ady);
}

double dist_to_segment(Point p, Point a, Point b) {
  const double ex = b.x - a.x, ey = b.y - a.y;
  const double len2 = ex * ex + ey * ey;
  double s = ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2;
  s = std::clamp(s, 0.0, 1.0);
  const double dx = a.x + s * ex - p.x, dy = a.y + s * ey - p.y;
  return std::sqrt(dx * dx + dy * dy);
}

class Delaunay {
 public:
  static constexpr int kNone = -1;

  Delaunay(Point lo, Point hi) {
    const double w = std::max(hi.x - lo.x, hi.y - lo.y);
    const Point c{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
    pts_.push_back({c.x - 20.0 * w, c.y - 10.0 * w});
    pts_.push_back({c.x + 20.0 * w, c.y - 10.0 * w});
    pts_.push_back({c.x, c.y + 20.0 * w});
    tris_.push_back({{0, 1, 2}, {kNone, kNone, kNone}, true});
    last_ = 0;
  }

  int insert(Point p) {
    const int t0 = locate(p);
    const int id = static_cast<int>(pts_.size());
    pts_.push_back(p);
    retriangulate(t0, id);
    return id;
  }

  const std::vector<Point>& points() const { return pts_; }

  // Triangles without super vertices, vertex ids shifted by -3.
  std::vector<std::array<std::size_t, 3>> triangles() const {
    std::vector<std::array<std::size_t, 3>> out;
    for (const auto& t : tris_) {
      if (!t.alive || t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
      out.push_back({static_cast<std::size_t>(t.v[0] - 3), static_cast<std::size_t>(t.v[1] - 3),
                     static_cast<std::size_t>(t.v[2] - 3)});
    }
    return out;
  }

 private:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb;  // nb[i] lies across the edge opposite v[i]
    bool alive;
  };

  int locate(Point p) {
    int t = last_;
    if (!tris_[t].alive) t = first_alive();
    for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
      const Tri& tri = tris_[t];
      const int start = static_cast<int>(rng_() % 3);
      int next = kNone;
      for (int k = 0; k < 3; ++k) {
        const int i = (start + k) % 3;
        const Point& a = pts_[tri.v[(i + 1) % 3]];
        const Point& b = pts_[tri.v[(i + 2) % 3]];
        if (orient(a, b, p) < 0.0) {
          next = tri.nb[i];
          break;
        }
      }
      if (next == kNone) return t;
      t = next;
    }
    // walk failed to terminate; fall back to exhaustive search
    for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
      const Tri& tri = tris_[k];
      if (!tri.alive) continue;
      if (orient(pts_[tri.v[0]], pts_[tri.v[1]], p) >= 0.0 &&
          orient(pts_[tri.v[1]], pts_[tri.v[2]], p) >= 0.0 &&
          orient(pts_[tri.v[2]], pts_[tri.v[0]], p) >= 0.0)
        return k;
    }
    fail(Errc::geometry, "mesher: point outside the triangulation");
  }

  int first_alive() const {
    for (int k = static_cast<int>(tris_.size()) - 1; k >= 0; --k)
      if (tris_[k].alive) return k;
    fail(Errc::geometry, "mesher: empty triangulation");
  }

  bool in_circle(int t, const Point& p) const {
    const Tri& tri = tris_[t];
    return incircle(pts_[tri.v[0]], pts_[tri.v[1]], pts_[tri.v[2]], p) > 0.0;
  }

  void retriangulate(int t0, int id) {
    const Point p = pts_[id];
    std::unordered_set<int> cavity{t0};
    std::vector<int> stack{t0};
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int nb : tris_[t].nb)
        if (nb != kNone && !cavity.contains(nb) && in_circle(nb, p)) {
          cavity.insert(nb);
          stack.push_back(nb);
        }
    }

    // Enforce a cavity that is star-shaped from p and connected to t0.
    for (int pass = 0; pass < 64; ++pass) {
      bool changed = false;
      std::vector<int> members(cavity.begin(), cavity.end());
      std::sort(members.begin(), members.end());
      for (int t : members) {
        if (!cavity.contains(t)) continue;
        const Tri& tri = tris_[t];
        for (int i = 0; i < 3; ++i) {
          const int nb = tri.nb[i];
          if (nb != kNone && cavity.contains(nb)) continue;
          const Point& a = pts_[tri.v[(i + 1) % 3]];
          const Point& b = pts_[tri.v[(i + 2) % 3]];
          if (orient(a, b, p) > 0.0) continue;
          if (t == t0) {
            require(nb != kNone, Errc::geometry, "mesher: point on the hull");
            cavity.insert(nb);
          } else {
            cavity.erase(t);
          }
          changed = true;
          break;
        }
      }
      // keep only the component that contains t0
      std::unordered_set<int> connected{t0};
      std::vector<int> todo{t0};
      while (!todo.empty()) {
        const int t = todo.back();
        todo.pop_back();
        for (int nb : tris_[t].nb)
          if (nb != kNone && cavity.contains(nb) && !connected.contains(nb)) {
            connected.insert(nb);
            todo.push_back(nb);
          }
      }
      if (connected.size() != cavity.size()) {
        cavity = std::move(connected);
        changed = true;
      }
      if (!changed) break;
    }

    struct Rim {
      int a, b, outside;
    };
    std::vector<Rim> rim;
    std::vector<int> members(cavity.begin(), cavity.end());
    std::sort(members.begin(), members.end());
    for (int t : members) {
      const Tri& tri = tris_[t];
      for (int i = 0; i < 3; ++i) {
        const int nb = tri.nb[i];
        if (nb != kNone && cavity.contains(nb)) continue;
        rim.push_back({tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb});
      }
    }
    for (int t : members) tris_[t].alive = false;

    // New triangle (a, b, p): nb[2] = outside, nb[0] across (b,p), nb[1] across (p,a).
    std::vector<int> created;
    created.reserve(rim.size());
    std::unordered_map<int, int> starts_at;
    std::unordered_map<int, int> ends_at;
    for (const Rim& r : rim) {
      const int nt = static_cast<int>(tris_.size());
      tris_.push_back({{r.a, r.b, id}, {kNone, kNone, r.outside}, true});
      created.push_back(nt);
      starts_at[r.a] = nt;
      ends_at[r.b] = nt;
      if (r.outside != kNone) {
        Tri& out = tris_[r.outside];
        for (int i = 0; i < 3; ++i) {
          const int u = out.v[(i + 1) % 3], w = out.v[(i + 2) % 3];
          if (u == r.b && w == r.a) out.nb[i] = nt;
        }
      }
    }
    for (int nt : created) {
      Tri& tri = tris_[nt];
      tri.nb[0] = starts_at.at(tri.v[1]);
      tri.nb[1] = ends_at.at(tri.v[0]);
    }
    last_ = created.back();
  }

  std::vector<Point> pts_;
  std::vector<Tri> tris_;
  int last_ = 0;
  std::minstd_rand rng_{12345u};
};

struct Segment {
  Point a, b;
};

TriMesh mesh_cell(const std::vector<Point>& polygon, double h, double jitter) {
  require(h > 0.0 && h <= 0.5, Errc::invalid_argument, "mesh size h must lie in (0, 0.5]");
  require(jitter >= 0.0 && jitter <= 0.25, Errc::invalid_argument, "lattice jitter must lie in [0, 0.25]");
  const std::size_t nb = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(1.0 / h)));
  const double hb = 1.0 / static_cast<double>(nb);

  auto frame = [nb](std::size_t i) {
    return i == nb ? 1.0 : static_cast<double>(i) / static_cast<double>(nb);
  };

  // frame points, counter-clockwise from the origin
  std::vector<Point> frame_pts;
  for (std::size_t i = 0; i < nb; ++i) frame_pts.push_back({frame(i), 0.0});
  for (std::size_t j = 0; j < nb; ++j) frame_pts.push_back({1.0, frame(j)});
  for (std::size_t i = nb; i > 0; --i) frame_pts.push_back({frame(i), 1.0});
  for (std::size_t j = nb; j > 0; --j) frame_pts.push_back({0.0, frame(j)});

  std::vector<Segment> poly_segments;
  double poly_len_max = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point a = polygon[i], b = polygon[(i + 1) % polygon.size()];
    poly_segments.push_back({a, b});
    poly_len_max = std::max(poly_len_max, std::hypot(b.x - a.x, b.y - a.y));
  }

  if (!polygon.empty()) {
    double gap = 1.0;
    for (const Point& p : polygon)
      gap = std::min({gap, p.x, 1.0 - p.x, p.y, 1.0 - p.y});
    if (gap < std::max(h, 0.6 * poly_len_max)) {
      std::ostringstream msg;
      msg << "inclusion is " << gap << " from the cell boundary, too close for mesh size " << h;
      fail(Errc::geometry, msg.str());
    }
  }

  // Triangular lattice centred on the cell centre; rows y = 0.5 + k dy and
  // x = 0.5 + (i + (k mod 2)/2) h are symmetric under (x,y) -> (1-x,1-y).
  const double dy = h * std::sqrt(3.0) / 2.0;
  const long kmax = static_cast<long>(std::ceil(0.5 / dy)) + 1;
  const long imax = static_cast<long>(std::ceil(0.5 / h)) + 2;
  const double frame_clear = 0.6 * hb;
  std::vector<Point> lattice;
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (long k = -kmax; k <= kmax; ++k) {
    const double y_row = 0.5 + static_cast<double>(k) * dy;
    const double shift = (k % 2 == 0) ? 0.0 : 0.5;
    for (long i = -imax; i <= imax; ++i) {
      double x = 0.5 + (static_cast<double>(i) + shift) * h;
      double y = y_row;
      if (jitter > 0.0) {
        // uniform in a disc of radius jitter h; breaks the lattice symmetry
        const double rad = jitter * h * std::sqrt(unit(rng));
        const double ang = 2.0 * std::numbers::pi * unit(rng);
        x += rad * std::cos(ang);
        y += rad * std::sin(ang);
      }
      if (std::min({x, 1.0 - x, y, 1.0 - y}) < frame_clear) continue;
      const Point p{x, y};
      bool keep = true;
      for (const Segment& s : poly_segments) {
        const double len = std::hypot(s.b.x - s.a.x, s.b.y - s.a.y);
        const Point m{0.5 * (s.a.x + s.b.x), 0.5 * (s.a.y + s.b.y)};
        if (std::hypot(p.x - m.x, p.y - m.y) < 0.55 * len ||
            dist_to_segment(p, s.a, s.b) < 0.5 * h) {
          keep = false;
          break;
        }
      }
      if (keep) lattice.push_back(p);
    }
  }

  Delaunay dt({0.0, 0.0}, {1.0, 1.0});
  for (const Point& p : frame_pts) dt.insert(p);
  for (const Point& p : polygon) dt.insert(p);
  for (const Point& p : lattice) dt.insert(p);

  std::vector<Point> verts(dt.points().begin() + 3, dt.points().end());
  auto tris = dt.triangles();

  const std::size_t n_frame = frame_pts.size();
  const std::size_t n_poly = polygon.size();
  std::vector<BoundaryEdge> edges;
  for (std::size_t i = 0; i < n_frame; ++i)
    edges.push_back({{i, (i + 1) % n_frame}, BoundaryTag::outer});
  for (std::size_t i = 0; i < n_poly; ++i)
    edges.push_back({{n_frame + i, n_frame + (i + 1) % n_poly}, BoundaryTag::inclusion});

  std::vector<Region> regions(tris.size(), Region::y1);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const Point c{(verts[tri[0]].x + verts[tri[1]].x + verts[tri[2]].x) / 3.0,
                  (verts[tri[0]].y + verts[tri[1]].y + verts[tri[2]].y) / 3.0};
    if (n_poly > 0 && point_in_polygon(polygon, c)) regions[t] = Region::y2;
  }

  TriMesh mesh(std::move(verts), std::move(tris), std::move(regions), std::move(edges));
  try {
    mesh.validate();
  } catch (const Error& e) {
    fail(Errc::geometry, std::string("cell mesher produced an invalid mesh: ") + e.what());
  }
  const double total = mesh.area();
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "cell mesher did not cover the unit cell (area " << total << ")";
    fail(Errc::geometry, msg.str());
  }
  return periodic_pairs(std::move(mesh), 1e-9);
}

}  // namespace

TriMesh build_cell_mesh(const CellGeometry& geom, double h, std::size_t n_arc, double jitter) {
  geom.validate();
  require(n_arc >= 16, Errc::invalid_argument, "n_arc must be at least 16");
  return mesh_cell(geom.inscribed_polygon(n_arc), h, jitter);
}

TriMesh build_homogeneous_cell_mesh(double h) { return mesh_cell({}, h, 0.0); }

}  // namespace homogmem
