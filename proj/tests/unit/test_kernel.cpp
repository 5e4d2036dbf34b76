#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "homogmem/error.hpp"
#include "homogmem/kernel.hpp"

using namespace homogmem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Mode {
  double lambda;
  double projection_sq;
};

// Separation of variables on (0,a)x(0,b) with d2 = 1.
std::vector<Mode> rectangle_modes(double a, double b, int count) {
  std::vector<Mode> modes;
  for (int m = 1; m <= 12; ++m) {
    for (int n = 1; n <= 12; ++n) {
      const double lambda = kPi * kPi * (m * m / (a * a) + n * n / (b * b));
      const double p2 = (m % 2 && n % 2) ? 64.0 * a * b / (m * m * n * n * std::pow(kPi, 4)) : 0.0;
      modes.push_back({lambda, p2});
    }
  }
  std::sort(modes.begin(), modes.end(), [](const Mode& x, const Mode& y) { return x.lambda < y.lambda; });
  modes.resize(count);
  return modes;
}

TriMesh rectangle_inclusion(double a, double b, std::size_t nx, std::size_t ny) {
  return build_rectangle_mesh({0.0, 0.0}, {a, b}, nx, ny, Region::y2, BoundaryTag::inclusion);
}

double identity_gap(const KernelApproximation& k) {
  double s = 0.0;
  for (const auto& t : k.raw) s += t.a / t.lambda;
  return std::abs(s + k.r_raw - k.r0());
}

const KernelApproximation& default_kernel() {
  static const KernelApproximation k = [] {
    const CellGeometry g;
    const auto y2 = build_cell_mesh(g, 0.03, 128).restricted(mask_of(Region::y2));
    return build_kernel(y2, g, 30);
  }();
  return k;
}

}  // namespace

TEST_CASE("rectangle inclusion matches separation of variables") {
  const double a = 0.6, b = 0.4;
  CellGeometry g;
  const auto k = build_kernel(rectangle_inclusion(a, b, 60, 40), g, 12);
  const auto modes = rectangle_modes(a, b, 12);
  CHECK(k.y2_measure == doctest::Approx(a * b).epsilon(1e-13));
  const double leading = modes[0].projection_sq;
  for (int i = 0; i < 6; ++i) {
    CAPTURE(i);
    CHECK(std::abs(k.raw[i].lambda / modes[i].lambda - 1.0) < 0.02);
    const double p2 = k.raw[i].projection * k.raw[i].projection;
    if (modes[i].projection_sq > 0.0) {
      CHECK(std::abs(p2 / modes[i].projection_sq - 1.0) < 0.02);
      CHECK(k.raw[i].a == doctest::Approx(p2 * k.raw[i].lambda / (1.0 - a * b)).epsilon(1e-13));
    } else {
      CHECK(p2 < 1e-3 * leading);
    }
  }
}

TEST_CASE("analytic rectangle projections are complete") {
  const double a = 0.6, b = 0.4;
  double s = 0.0;
  for (int m = 1; m < 4000; m += 2)
    for (int n = 1; n < 4000; n += 2) s += 64.0 * a * b / (double(m) * m * n * n * std::pow(kPi, 4));
  CHECK(std::abs(s - a * b) < 1e-3 * a * b);
}

TEST_CASE("kernel identity holds to machine precision") {
  CHECK(identity_gap(default_kernel()) < 1e-12);
  CHECK(identity_gap(build_kernel(rectangle_inclusion(0.5, 0.3, 20, 12), CellGeometry{}, 15)) < 1e-12);
  for (std::size_t m : {0, 1, 7, 30}) CHECK(identity_gap(truncate(default_kernel(), m)) < 1e-12);
  const auto folded = filter(default_kernel(), 1e-2, true);
  CHECK(std::abs(folded.integral() + folded.r - folded.r0()) < 1e-12);
}

TEST_CASE("m = 0 leaves only the remainder") {
  const CellGeometry g;
  const auto y2 = build_cell_mesh(g, 0.05, 512).restricted(mask_of(Region::y2));
  const auto k = build_kernel(y2, g, 0);
  CHECK(k.terms.empty());
  CHECK(k.r == k.r0());
  CHECK(std::abs(k.r - 0.335697) < 1e-4);
  CHECK(std::abs(k.y2_measure_analytic - 0.08 * kPi) < 1e-15);
}

TEST_CASE("default kernel terms and the Bessel bound") {
  const auto& k = default_kernel();
  double captured = 0.0, previous = 0.0;
  for (const auto& t : k.raw) {
    CHECK(t.lambda > 0.0);
    CHECK(t.a >= 0.0);
    captured += t.projection * t.projection;
    CHECK(captured >= previous);
    previous = captured;
  }
  CHECK(captured <= k.y2_measure * (1.0 + 1e-10));
  CHECK(k.r >= 0.0);
  CHECK(k.raw.front().lambda == doctest::Approx(89.2).epsilon(0.02));
  CHECK(k.max_residual < 1e-8);
}

TEST_CASE("sign flips leave the amplitudes unchanged") {
  const auto& k = default_kernel();
  std::vector<double> lambda, p, q;
  for (std::size_t i = 0; i < k.raw.size(); ++i) {
    lambda.push_back(k.raw[i].lambda);
    p.push_back(k.raw[i].projection);
    q.push_back(i % 3 ? -k.raw[i].projection : k.raw[i].projection);
  }
  const auto a = build_kernel_from_spectrum(lambda, p, k.y2_measure);
  const auto b = build_kernel_from_spectrum(lambda, q, k.y2_measure);
  for (std::size_t i = 0; i < a.raw.size(); ++i) CHECK(a.raw[i].a == b.raw[i].a);
  CHECK(a.r == b.r);
}

TEST_CASE("kernel evaluation") {
  const auto single = build_kernel_from_spectrum(std::vector<double>{3.0}, std::vector<double>{0.0}, 0.5);
  KernelApproximation k = single;
  k.terms = {{2.0, 3.0}};
  CHECK(eval_kernel(k, 1.0) == doctest::Approx(2.0 * std::exp(-3.0)).epsilon(1e-14));
  CHECK(eval_kernel(k, 1.0) == doctest::Approx(0.099574).epsilon(1e-5));
  CHECK(eval_kernel(default_kernel(), 0.0) == doctest::Approx(default_kernel().chi0()).epsilon(1e-14));
  CHECK_THROWS_AS(eval_kernel(k, -1e-9), Error);
}

TEST_CASE("kernel is positive, decreasing and convex") {
  const auto& k = default_kernel();
  const double t_end = 5.0 / k.terms.front().lambda;
  std::vector<double> f;
  for (int i = 0; i < 100; ++i) f.push_back(eval_kernel(k, t_end * i / 99.0));
  for (int i = 0; i < 100; ++i) CHECK(f[i] > 0.0);
  for (int i = 1; i < 100; ++i) CHECK(f[i] < f[i - 1]);
  for (int i = 1; i < 99; ++i) CHECK(f[i - 1] - 2.0 * f[i] + f[i + 1] >= 0.0);
}

TEST_CASE("trapezoid integral of the kernel matches sum a/lambda") {
  const auto& k = default_kernel();
  const double t_end = 50.0 / k.terms.front().lambda;
  const int n = 200000;
  const double dt = t_end / n;
  double s = 0.5 * (eval_kernel(k, 0.0) + eval_kernel(k, t_end));
  for (int i = 1; i < n; ++i) s += eval_kernel(k, i * dt);
  s *= dt;
  // trapezoid error is about dt^2/12 * chi'(0)
  double slope = 0.0;
  for (const auto& t : k.terms) slope += t.a * t.lambda;
  CHECK(std::abs(s - k.integral()) < dt * dt / 12.0 * slope * 1.01 + 1e-12);
}

TEST_CASE("filtering") {
  const auto& k = default_kernel();
  const auto same = filter(k, 0.0);
  CHECK(same.kept_count() == k.raw_count());
  CHECK(same.rho == 0.0);
  CHECK(same.r == k.r);

  const auto f = filter(k, 1e-3);
  CHECK(f.kept_count() < k.raw_count());
  CHECK(f.r == k.r);
  CHECK(f.rho == doctest::Approx(k.chi0() - f.chi0()).epsilon(1e-12));
  for (const auto& t : f.terms) CHECK(t.a >= 1e-3);
  for (std::size_t i = 1; i < f.terms.size(); ++i) CHECK(f.terms[i].lambda >= f.terms[i - 1].lambda);

  const auto folded = filter(k, 1.0, true);
  double dropped = 0.0;
  for (const auto& t : k.raw)
    if (t.a < 1.0) dropped += t.a / t.lambda;
  CHECK(dropped > 0.0);
  CHECK(folded.r == doctest::Approx(k.r + dropped).epsilon(1e-14));
  CHECK_THROWS_AS(filter(k, -1.0), Error);
}

TEST_CASE("truncation recomputes the remainder at the raw index") {
  const CellGeometry g;
  const auto y2 = build_cell_mesh(g, 0.03, 128).restricted(mask_of(Region::y2));
  const auto direct = build_kernel(y2, g, 12);
  const auto cut = truncate(default_kernel(), 12);
  CHECK(cut.raw_count() == 12);
  CHECK(std::abs(cut.r - direct.r) < 1e-8);
  for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(cut.raw[i].a - direct.raw[i].a) < 1e-6 * direct.chi0());
  CHECK_THROWS_AS(truncate(default_kernel(), 31), Error);
}

TEST_CASE("remainder is clamped at zero") {
  const auto k = build_kernel_from_spectrum(std::vector<double>{10.0, 20.0}, std::vector<double>{0.4, 0.2}, 0.19);
  CHECK(k.r_raw < 0.0);
  CHECK(k.r == 0.0);
  CHECK(k.r_clamped());
}

TEST_CASE("kernel JSON round trip and samples") {
  const auto dir = std::filesystem::temp_directory_path() / "homogmem_kernel_test";
  std::filesystem::create_directories(dir);
  const auto k = filter(default_kernel(), 1e-2);
  write_kernel_json(k, dir / "kernel.json");
  const auto back = read_kernel_json(dir / "kernel.json");
  REQUIRE(back.kept_count() == k.kept_count());
  REQUIRE(back.raw_count() == k.raw_count());
  for (std::size_t i = 0; i < k.kept_count(); ++i) {
    CHECK(back.terms[i].a == k.terms[i].a);
    CHECK(back.terms[i].lambda == k.terms[i].lambda);
  }
  CHECK(back.r == k.r);
  CHECK(back.rho == k.rho);
  CHECK(back.epsilon == k.epsilon);

  write_kernel_samples(k, dir / "samples.csv", 1e-4, 1.0, 50);
  std::ifstream in(dir / "samples.csv");
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line == "t,chi");
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 51);

  std::ofstream(dir / "bad.json") << "{\"terms\": 3}";
  CHECK_THROWS_AS(read_kernel_json(dir / "bad.json"), Error);
  CHECK_THROWS_AS(read_kernel_json(dir / "missing.json"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("kernel errors") {
  const CellGeometry g;
  const auto cell = build_cell_mesh(g, 0.1, 32);
  CHECK_THROWS_AS(build_kernel(cell, g, 3), Error);
  const auto y2 = cell.restricted(mask_of(Region::y2));
  CHECK_THROWS_AS(build_kernel(y2, g, 100000), Error);
}
