#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "homogmem/error.hpp"
#include "homogmem/expression.hpp"
#include "homogmem/output.hpp"

using namespace homogmem;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path = std::filesystem::temp_directory_path() / "homogmem_io_test";
  TempDir() { std::filesystem::create_directories(path); }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("expressions") {
  CHECK(compile_expression("1 + 2 * 3")(0, 0) == 7.0);
  CHECK(compile_expression("(1 + 2) * 3")(0, 0) == 9.0);
  CHECK(compile_expression("2 ^ 3 ^ 2")(0, 0) == 512.0);
  CHECK(compile_expression("-x^2")(3, 0) == -9.0);
  CHECK(compile_expression("x1 - x2 / 4")(1, 2) == 0.5);
  CHECK(compile_expression("sin(pi * x) * sin(pi * y)")(0.5, 0.5) == doctest::Approx(1.0));
  CHECK(compile_expression("max(x, y) + min(x, y) + pow(2, 0.5)")(1, 2) == doctest::Approx(3.0 + std::sqrt(2.0)));
  CHECK(compile_expression("exp(1) - e")(0, 0) == doctest::Approx(0.0));
  CHECK(compile_expression("1.5e-3 * 2")(0, 0) == doctest::Approx(3e-3));

  for (const char* bad : {"", "1 +", "sin x", "foo(1)", "(1", "2 3", "min(1)", "x $ y"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(compile_expression(bad), Error);
  }
}

TEST_CASE("initial condition presets") {
  CHECK(initial_condition("zero")(0.3, 0.4) == 0.0);
  const auto u = initial_condition("paper");
  const double x = 0.6, y = 0.25;
  CHECK(u(x, y) == doctest::Approx(4.0 / (1.0 + std::exp(-10.0)) * x * (1 - x) * std::sin(std::numbers::pi * y)));
  CHECK(u(0.0, 0.5) == 0.0);
  CHECK(initial_condition("x*y")(2, 3) == 6.0);
}

TEST_CASE("VTK and CSV writers") {
  TempDir dir;
  const auto mesh = build_unit_square_mesh(2);
  std::vector<double> values(mesh.num_vertices());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = 0.5 * i;

  write_vtk(dir.path / "u.vtk", mesh, values, "concentration");
  const auto vtk = slurp(dir.path / "u.vtk");
  CHECK(vtk.starts_with("# vtk DataFile Version 3.0\n"));
  CHECK(vtk.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(vtk.find("POINTS 9 double") != std::string::npos);
  CHECK(vtk.find("CELLS 8 32") != std::string::npos);
  CHECK(vtk.find("CELL_TYPES 8") != std::string::npos);
  CHECK(vtk.find("SCALARS concentration double 1") != std::string::npos);
  CHECK(vtk.ends_with("4\n"));
  CHECK_THROWS_AS(write_vtk(dir.path / "bad.vtk", mesh, std::vector<double>(3)), Error);
  CHECK_THROWS_AS(write_vtk(dir.path / "bad.vtk", mesh, values, "two words"), Error);

  write_field_csv(dir.path / "u.csv", mesh, values);
  const auto csv = slurp(dir.path / "u.csv");
  CHECK(csv.starts_with("x1,x2,value\n0,0,0\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);

  const std::vector<EnergyRecord> series{{0, 0.0, 2.0, 1.0}, {1, 0.1, 1.5, 0.9}};
  write_energy_csv(dir.path / "energy.csv", series);
  CHECK(slurp(dir.path / "energy.csv") == "n,t,energy,l2_norm\n0,0,2,1\n1,0.10000000000000001,1.5,0.90000000000000002\n");

  CHECK_THROWS_AS(write_energy_csv(dir.path / "no" / "such" / "dir.csv", series), Error);
}
