#include "homogmem/output.hpp"

#include <fstream>
#include <iomanip>

#include "homogmem/error.hpp"

namespace homogmem {
namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), Errc::io, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  require(out.good(), Errc::io, "write failed: " + path.string());
}

}  // namespace

void write_vtk(const std::filesystem::path& path, const TriMesh& mesh, std::span<const double> values,
               const std::string& name) {
  require(values.size() == mesh.num_vertices(), Errc::invalid_argument, "vtk: one value per vertex expected");
  require(!name.empty() && name.find_first_of(" \t\n") == std::string::npos, Errc::invalid_argument,
          "vtk: field name must be a single token");
  auto out = open_for_writing(path);
  out << "# vtk DataFile Version 3.0\nhomogmem\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices()) out << p.x << ' ' << p.y << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t i = 0; i < mesh.num_triangles(); ++i) out << "5\n";
  out << "POINT_DATA " << mesh.num_vertices() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : values) out << v << '\n';
  finish(out, path);
}

void write_field_csv(const std::filesystem::path& path, const TriMesh& mesh, std::span<const double> values) {
  require(values.size() == mesh.num_vertices(), Errc::invalid_argument, "csv: one value per vertex expected");
  auto out = open_for_writing(path);
  out << "x1,x2,value\n";
  for (std::size_t v = 0; v < values.size(); ++v)
    out << mesh.vertices()[v].x << ',' << mesh.vertices()[v].y << ',' << values[v] << '\n';
  finish(out, path);
}

void write_energy_csv(const std::filesystem::path& path, std::span<const EnergyRecord> series) {
  auto out = open_for_writing(path);
  out << "n,t,energy,l2_norm\n";
  for (const auto& r : series) out << r.n << ',' << r.t << ',' << r.energy << ',' << r.l2_norm << '\n';
  finish(out, path);
}

}  // namespace homogmem
