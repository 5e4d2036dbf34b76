#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "homogmem/error.hpp"
#include "homogmem/mesh.hpp"

namespace homogmem {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  return out;
}

void expect_line(std::istream& in, const std::string& token, const std::string& where) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == token) return;
    fail(Errc::format, where + ": expected " + token + ", found '" + line + "'");
  }
  fail(Errc::format, where + ": missing " + token);
}

}  // namespace

TriMesh read_msh(const std::filesystem::path& path, const MshTagMap& tags) {
  auto in = open_input(path);
  const std::string where = path.string();

  std::unordered_map<long, Point> nodes;
  std::vector<long> node_order;
  struct RawTri {
    std::array<long, 3> n;
    int physical;
  };
  struct RawLine {
    std::array<long, 2> n;
    int physical;
  };
  std::vector<RawTri> raw_tris;
  std::vector<RawLine> raw_lines;
  bool saw_format = false, saw_nodes = false, saw_elements = false;

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "$MeshFormat") {
      std::string version;
      int file_type = -1, data_size = 0;
      in >> version >> file_type >> data_size;
      if (version != "2.2") fail(Errc::format, where + ": unsupported MSH version " + version);
      if (file_type != 0) fail(Errc::format, where + ": only ASCII MSH files are supported");
      expect_line(in, "$EndMeshFormat", where);
      saw_format = true;
    } else if (line == "$Nodes") {
      require(saw_format, Errc::format, where + ": $Nodes before $MeshFormat");
      std::size_t count = 0;
      in >> count;
      for (std::size_t i = 0; i < count; ++i) {
        long id = 0;
        double x = 0, y = 0, z = 0;
        if (!(in >> id >> x >> y >> z)) fail(Errc::format, where + ": truncated $Nodes section");
        if (std::abs(z) > 1e-12) fail(Errc::format, where + ": node with nonzero z; 2D meshes only");
        nodes[id] = {x, y};
        node_order.push_back(id);
      }
      expect_line(in, "$EndNodes", where);
      saw_nodes = true;
    } else if (line == "$Elements") {
      std::size_t count = 0;
      in >> count;
      for (std::size_t i = 0; i < count; ++i) {
        long id = 0;
        int type = 0, ntags = 0;
        if (!(in >> id >> type >> ntags)) fail(Errc::format, where + ": truncated $Elements section");
        std::vector<int> etags(static_cast<std::size_t>(std::max(ntags, 0)));
        for (int& t : etags) in >> t;
        const int physical = etags.empty() ? 0 : etags[0];
        if (type == 2) {
          RawTri t{{}, physical};
          in >> t.n[0] >> t.n[1] >> t.n[2];
          raw_tris.push_back(t);
        } else if (type == 1) {
          RawLine l{{}, physical};
          in >> l.n[0] >> l.n[1];
          raw_lines.push_back(l);
        } else if (type == 15) {
          long node = 0;
          in >> node;
        } else {
          fail(Errc::format, where + ": unsupported element type " + std::to_string(type) +
                                 " (only points, lines and triangles)");
        }
        if (!in) fail(Errc::format, where + ": malformed element record");
      }
      expect_line(in, "$EndElements", where);
      saw_elements = true;
    } else if (line.size() > 1 && line[0] == '$' && line.rfind("$End", 0) != 0) {
      // skip unknown sections ($PhysicalNames, $Periodic, ...)
      const std::string end = "$End" + line.substr(1);
      std::string skip;
      while (std::getline(in, skip)) {
        if (!skip.empty() && skip.back() == '\r') skip.pop_back();
        if (skip == end) break;
      }
    } else {
      fail(Errc::format, where + ": unexpected line '" + line + "'");
    }
  }
  require(saw_format && saw_nodes && saw_elements, Errc::format,
          where + ": missing $MeshFormat, $Nodes or $Elements");
  require(!raw_tris.empty(), Errc::format, where + ": no triangles");

  // keep only nodes referenced by triangles, in file order
  std::unordered_map<long, std::size_t> index;
  for (const auto& t : raw_tris)
    for (long n : t.n) {
      require(nodes.contains(n), Errc::format, where + ": element references unknown node");
      index.emplace(n, 0);
    }
  std::vector<Point> verts;
  for (long id : node_order)
    if (auto it = index.find(id); it != index.end()) {
      it->second = verts.size();
      verts.push_back(nodes[id]);
    }

  std::vector<std::array<std::size_t, 3>> tris;
  std::vector<Region> regions;
  for (const auto& t : raw_tris) {
    auto reg = tags.regions.find(t.physical);
    if (reg == tags.regions.end())
      fail(Errc::format, where + ": unmapped triangle physical tag " + std::to_string(t.physical));
    std::array<std::size_t, 3> v{index[t.n[0]], index[t.n[1]], index[t.n[2]]};
    const Point a = verts[v[0]], b = verts[v[1]], c = verts[v[2]];
    if ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) < 0.0) std::swap(v[1], v[2]);
    tris.push_back(v);
    regions.push_back(reg->second);
  }

  std::vector<BoundaryEdge> edges;
  for (const auto& l : raw_lines) {
    auto tag = tags.boundaries.find(l.physical);
    if (tag == tags.boundaries.end())
      fail(Errc::format, where + ": unmapped line physical tag " + std::to_string(l.physical));
    require(index.contains(l.n[0]) && index.contains(l.n[1]), Errc::format,
            where + ": boundary line references a node outside the triangulation");
    edges.push_back({{index[l.n[0]], index[l.n[1]]}, tag->second});
  }
  TriMesh mesh(std::move(verts), std::move(tris), std::move(regions), std::move(edges));
  mesh.validate();
  return mesh;
}

void write_msh(const TriMesh& mesh, const std::filesystem::path& path, const MshTagMap& tags) {
  auto physical_of_region = [&](Region r) {
    for (const auto& [k, v] : tags.regions)
      if (v == r) return k;
    fail(Errc::invalid_argument, std::string("no MSH tag for region ") + to_string(r));
  };
  auto physical_of_tag = [&](BoundaryTag t) {
    for (const auto& [k, v] : tags.boundaries)
      if (v == t) return k;
    fail(Errc::invalid_argument, std::string("no MSH tag for boundary ") + to_string(t));
  };

  auto out = open_output(path);
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out << "$Nodes\n" << mesh.num_vertices() << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
    out << i + 1 << ' ' << mesh.vertices()[i].x << ' ' << mesh.vertices()[i].y << " 0\n";
  out << "$EndNodes\n";
  out << "$Elements\n" << mesh.boundary_edges().size() + mesh.num_triangles() << '\n';
  std::size_t id = 1;
  for (const auto& e : mesh.boundary_edges()) {
    const int p = physical_of_tag(e.tag);
    out << id++ << " 1 2 " << p << ' ' << p << ' ' << e.v[0] + 1 << ' ' << e.v[1] + 1 << '\n';
  }
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const int p = physical_of_region(mesh.regions()[t]);
    const auto& tri = mesh.triangles()[t];
    out << id++ << " 2 2 " << p << ' ' << p << ' ' << tri[0] + 1 << ' ' << tri[1] + 1 << ' '
        << tri[2] + 1 << '\n';
  }
  out << "$EndElements\n";
  if (!out) fail(Errc::io, "failed writing " + path.string());
}

void write_mesh_json(const TriMesh& mesh, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "homogmem-mesh";
  j["version"] = 1;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const Point& p : mesh.vertices()) verts.push_back({p.x, p.y});
  auto& tris = j["triangles"] = nlohmann::json::array();
  for (const auto& t : mesh.triangles()) tris.push_back({t[0], t[1], t[2]});
  auto& regs = j["regions"] = nlohmann::json::array();
  for (Region r : mesh.regions()) regs.push_back(to_string(r));
  auto& edges = j["boundary_edges"] = nlohmann::json::array();
  for (const auto& e : mesh.boundary_edges())
    edges.push_back({{"v", {e.v[0], e.v[1]}}, {"tag", to_string(e.tag)}});
  auto& pairs = j["periodic_pairs"] = nlohmann::json::array();
  if (mesh.has_periodic_pairs())
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
      if (mesh.master_of()[v] != TriMesh::kNoMaster) pairs.push_back({v, mesh.master_of()[v]});
  auto out = open_output(path);
  out << j.dump(1) << '\n';
}

TriMesh read_mesh_json(const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
    require(j.value("format", "") == "homogmem-mesh", Errc::format,
            path.string() + ": not a homogmem mesh dump");
    std::vector<Point> verts;
    for (const auto& p : j.at("vertices")) verts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    std::vector<std::array<std::size_t, 3>> tris;
    for (const auto& t : j.at("triangles"))
      tris.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>(), t.at(2).get<std::size_t>()});
    std::vector<Region> regs;
    for (const auto& r : j.at("regions")) {
      const auto s = r.get<std::string>();
      if (s == "Y1") regs.push_back(Region::y1);
      else if (s == "Y2") regs.push_back(Region::y2);
      else if (s == "Omega") regs.push_back(Region::omega);
      else fail(Errc::format, path.string() + ": unknown region label " + s);
    }
    std::vector<BoundaryEdge> edges;
    for (const auto& e : j.at("boundary_edges")) {
      const auto tag = e.at("tag").get<std::string>();
      require(tag == "outer" || tag == "inclusion", Errc::format, "unknown boundary tag " + tag);
      edges.push_back({{e.at("v").at(0).get<std::size_t>(), e.at("v").at(1).get<std::size_t>()},
                       tag == "outer" ? BoundaryTag::outer : BoundaryTag::inclusion});
    }
    TriMesh mesh(std::move(verts), std::move(tris), std::move(regs), std::move(edges));
    if (!j.at("periodic_pairs").empty()) {
      std::vector<std::size_t> master(mesh.num_vertices(), TriMesh::kNoMaster);
      for (const auto& p : j.at("periodic_pairs")) {
        const auto s = p.at(0).get<std::size_t>();
        require(s < master.size(), Errc::format, "periodic pair out of range");
        master[s] = p.at(1).get<std::size_t>();
      }
      mesh.set_periodic_pairs(std::move(master));
    }
    return mesh;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::format, path.string() + ": " + e.what());
  }
}

}  // namespace homogmem
