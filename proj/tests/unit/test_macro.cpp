#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "homogmem/error.hpp"
#include "homogmem/macro.hpp"

using namespace homogmem;

namespace {

constexpr double kPi = std::numbers::pi;

double sigmoid_u0(double x, double y) {
  return 4.0 / (1.0 + std::exp(-100.0 * (x - 0.5))) * x * (1.0 - x) * std::sin(kPi * y);
}

Eigen::MatrixXd dense(const SparseMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.size(), a.size());
  for (const auto& t : a.triplets()) d(t.row, t.col) = t.value;
  return d;
}

Eigen::VectorXd vec(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

MacroProblem base_problem(std::size_t n) {
  MacroProblem p;
  p.mesh = build_unit_square_mesh(n);
  p.d = {0.85, -0.08, -0.08, 0.97};
  p.terms = {{40.0, 90.0}, {8.0, 300.0}, {1.5, 700.0}};
  p.r = 0.05;
  p.u0 = sigmoid_u0;
  p.tau = 1e-3;
  p.sigma = 1.0;
  p.t_end = 0.02;
  return p;
}

// Barycentric interpolation of nodal values; a member of the P1 space.
ScalarField p1_field(const TriMesh& mesh, std::vector<double> values) {
  return [&mesh, values](double x, double y) {
    const auto& p = mesh.vertices();
    for (const auto& t : mesh.triangles()) {
      const Point a = p[t[0]], b = p[t[1]], c = p[t[2]];
      const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
      const double l1 = ((x - a.x) * (c.y - a.y) - (c.x - a.x) * (y - a.y)) / det;
      const double l2 = ((b.x - a.x) * (y - a.y) - (x - a.x) * (b.y - a.y)) / det;
      const double l0 = 1.0 - l1 - l2;
      if (l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12) return l0 * values[t[0]] + l1 * values[t[1]] + l2 * values[t[2]];
    }
    return 0.0;
  };
}

}  // namespace

TEST_CASE("zero initial data stays zero") {
  auto p = base_problem(8);
  p.u0 = [](double, double) { return 0.0; };
  const MacroSolver s(p);
  auto st = s.initial_state();
  CHECK(s.energy(st) == 0.0);
  for (int n = 0; n < 10; ++n) s.step(st);
  for (double v : st.y) CHECK(v == 0.0);
  for (const auto& w : st.w)
    for (double v : w) CHECK(v == 0.0);
}

TEST_CASE("projection reproduces P1 members and is Galerkin orthogonal") {
  const auto mesh = build_unit_square_mesh(6);
  std::vector<double> nodal(mesh.num_vertices(), 0.0);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t v = 0; v < nodal.size(); ++v) {
    const auto q = mesh.vertices()[v];
    if (q.x > 0 && q.x < 1 && q.y > 0 && q.y < 1) nodal[v] = u(rng);
  }
  auto p = base_problem(6);
  p.mesh = mesh;
  p.u0 = p1_field(p.mesh, nodal);
  const MacroSolver s(p);
  const auto y0 = s.nodal(s.initial_state());
  for (std::size_t v = 0; v < nodal.size(); ++v) CHECK(std::abs(y0[v] - nodal[v]) < 1e-10);

  const auto q = base_problem(20);
  const MacroSolver sq(q);
  const auto st = sq.initial_state();
  const auto b = sq.dofs().fold(assemble_projection_rhs(q.mesh, q.u0));
  const auto my = sq.mass() * st.y;
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(std::abs(my[i] - b[i]) < 1e-12);
  CHECK(sq.energy(st) == doctest::Approx(sq.stiffness().bilinear(st.y, st.y)).epsilon(1e-15));
}

TEST_CASE("eliminated step matches the coupled block system") {
  for (double sigma : {1.0, 0.5, 0.3}) {
    CAPTURE(sigma);
    auto p = base_problem(8);
    p.mesh = build_rectangle_mesh({0.0, 0.0}, {1.0, 0.5}, 11, 6);
    p.sigma = sigma;
    const MacroSolver s(p);
    const std::size_t n = s.dofs().num_dofs;
    REQUIRE(n == 50);
    const std::size_t m = p.terms.size();
    const auto M = dense(s.mass()), K = dense(s.stiffness());

    double s_ratio = 0.0;
    for (const auto& t : p.terms) s_ratio += t.a / t.lambda;
    const double tau = p.tau;
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(n * (m + 1), n * (m + 1));
    Eigen::MatrixXd rhs_op = Eigen::MatrixXd::Zero(n * (m + 1), n * (m + 1));
    lhs.topLeftCorner(n, n) = (1.0 + p.r + s_ratio) * M + sigma * tau * K;
    rhs_op.topLeftCorner(n, n) = (1.0 + p.r + s_ratio) * M - (1.0 - sigma) * tau * K;
    for (std::size_t k = 0; k < m; ++k) {
      const double ar = p.terms[k].a / p.terms[k].lambda, lt = p.terms[k].lambda * tau;
      const Eigen::Index o = n * (k + 1);
      lhs.block(0, o, n, n) = -ar * M;
      rhs_op.block(0, o, n, n) = -ar * M;
      lhs.block(o, o, n, n) = (1.0 + sigma * lt) * M;
      rhs_op.block(o, o, n, n) = (1.0 - (1.0 - sigma) * lt) * M;
      lhs.block(o, 0, n, n) = -M;
      rhs_op.block(o, 0, n, n) = -M;
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);

    auto st = s.initial_state();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n * (m + 1));
    z.head(n) = vec(st.y);
    const double scale = z.norm();
    for (int step = 0; step < 5; ++step) {
      z = lu.solve(rhs_op * z);
      s.step(st);
      CHECK((z.head(n) - vec(st.y)).norm() < 1e-10 * scale);
      for (std::size_t k = 0; k < m; ++k) CHECK((z.segment(n * (k + 1), n) - vec(st.w[k])).norm() < 1e-10 * scale);
    }
  }
}

TEST_CASE("single free dof against the hand-evaluated recurrence") {
  auto p = base_problem(2);
  p.terms = {{7.0, 30.0}};
  p.r = 0.2;
  p.tau = 0.01;
  p.sigma = 0.6;
  const MacroSolver s(p);
  REQUIRE(s.dofs().num_dofs == 1);
  const double mu = s.mass().at(0, 0), kappa = s.stiffness().at(0, 0);
  const double a = 7.0, lam = 30.0, r = 0.2, tau = 0.01, sg = 0.6;

  auto st = s.state_from({1.3});
  st.w[0][0] = -0.4;
  double y = 1.3, w = -0.4;
  for (int step = 0; step < 3; ++step) {
    // [A11 A12; A21 A22] (y1, w1) = (f1, f2) from the coupled scheme times tau
    const double A11 = (1 + r + a / lam) * mu + sg * tau * kappa, A12 = -(a / lam) * mu;
    const double A21 = -mu, A22 = mu * (1 + sg * lam * tau);
    const double f1 = (1 + r + a / lam) * mu * y - (a / lam) * mu * w - (1 - sg) * tau * kappa * y;
    const double f2 = -mu * y + mu * (1 - (1 - sg) * lam * tau) * w;
    const double det = A11 * A22 - A12 * A21;
    const double y1 = (f1 * A22 - A12 * f2) / det, w1 = (A11 * f2 - A21 * f1) / det;
    y = y1;
    w = w1;
    s.step(st);
    CHECK(st.y[0] == doctest::Approx(y).epsilon(1e-13));
    CHECK(st.w[0][0] == doctest::Approx(w).epsilon(1e-13));
  }
}

TEST_CASE("no memory terms gives the (1 + r0) heat equation") {
  auto p = base_problem(10);
  p.terms.clear();
  p.r = 0.335697;
  p.sigma = 0.5;
  const MacroSolver s(p);
  auto st = s.initial_state();
  const auto M = dense(s.mass()), K = dense(s.stiffness());
  const Eigen::MatrixXd lhs = (1 + p.r) * M + 0.5 * p.tau * K;
  const Eigen::MatrixXd rhs = (1 + p.r) * M - 0.5 * p.tau * K;
  Eigen::VectorXd y = vec(st.y);
  for (int n = 0; n < 5; ++n) {
    y = lhs.ldlt().solve(rhs * y);
    s.step(st);
  }
  CHECK((y - vec(st.y)).norm() < 1e-12 * y.norm());
  CHECK(st.w.empty());
}

TEST_CASE("heat equation mode decays with the theta-scheme factor") {
  auto p = base_problem(10);
  p.terms.clear();
  p.r = 0.0;
  p.d = Tensor2::isotropic(1.0);
  const MacroSolver base(p);
  const auto pairs = smallest_eigenpairs(base.stiffness(), base.mass(), 1);
  const double kappa = pairs.values[0];
  for (double sigma : {1.0, 0.5}) {
    p.sigma = sigma;
    const double t_end = 0.05;
    std::vector<double> err;
    for (double tau : {2e-3, 1e-3, 5e-4}) {
      p.tau = tau;
      const MacroSolver s(p);
      auto st = s.state_from(pairs.vectors[0]);
      const double g = (1.0 - (1.0 - sigma) * kappa * tau) / (1.0 + sigma * kappa * tau);
      const auto steps = static_cast<int>(std::llround(t_end / tau));
      for (int n = 0; n < steps; ++n) s.step(st);
      const double c = st.y[0] / pairs.vectors[0][0];
      CHECK(c == doctest::Approx(std::pow(g, steps)).epsilon(1e-10));
      err.push_back(std::abs(c - std::exp(-kappa * t_end)));
    }
    const double order = std::log2(err[1] / err[2]);
    CHECK(std::abs(order - (sigma == 1.0 ? 1.0 : 2.0)) < 0.2);
  }
}

TEST_CASE("energy never increases for sigma >= 1/2") {
  for (double sigma : {0.5, 0.75, 1.0}) {
    CAPTURE(sigma);
    auto p = base_problem(16);
    p.sigma = sigma;
    p.t_end = 0.05;
    const auto res = run(p);
    const double e0 = res.series.front().energy;
    CHECK(e0 > 0.0);
    for (std::size_t i = 1; i < res.series.size(); ++i) {
      CHECK(res.series[i].energy <= res.series[i - 1].energy + 1e-12 * e0);
      CHECK(res.series[i].energy <= e0 * (1.0 + 1e-10));
    }
    CHECK_FALSE(res.stability_warning);
  }
}

TEST_CASE("run bookkeeping") {
  auto p = base_problem(6);
  p.t_end = 0.0;
  auto res = run(p);
  CHECK(res.steps == 0);
  CHECK(res.series.size() == 1);
  REQUIRE(res.snapshots.size() == 1);
  CHECK(res.snapshots[0].n == 0);
  CHECK(res.snapshots[0].values.size() == p.mesh.num_vertices());

  p.t_end = 0.01;
  const std::vector<double> times{0.0, 0.004, 0.01};
  res = run(p, times);
  CHECK(res.steps == 10);
  CHECK(res.series.size() == 11);
  REQUIRE(res.snapshots.size() == 3);
  CHECK(res.snapshots[1].n == 4);
  CHECK(res.snapshots[2].t == doctest::Approx(0.01));
  CHECK_THROWS_AS(run(p, std::vector<double>{0.02}), Error);

  p.sigma = 0.25;
  CHECK(run(p).stability_warning);
}

TEST_CASE("Volterra reference") {
  auto p = base_problem(8);
  p.terms.clear();
  p.sigma = 0.5;
  const auto ref = volterra_reference(p);
  const MacroSolver s(p);
  auto st = s.initial_state();
  REQUIRE(ref.size() == p.steps() + 1);
  for (std::size_t n = 1; n < ref.size(); ++n) {
    s.step(st);
    CHECK((vec(ref[n]) - vec(st.y)).norm() < 1e-12 * vec(ref[0]).norm());
  }

  // with memory both discretizations approach the same semi-discrete solution
  p = base_problem(8);
  p.t_end = 0.04;
  std::vector<double> gaps;
  for (double tau : {2e-3, 1e-3, 5e-4}) {
    p.tau = tau;
    const auto u = volterra_reference(p);
    const MacroSolver sv(p);
    auto x = sv.initial_state();
    double gap = 0.0;
    for (std::size_t n = 1; n < u.size(); ++n) {
      sv.step(x);
      std::vector<double> d(x.y.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = x.y[i] - u[n][i];
      gap = std::max(gap, std::sqrt(sv.mass().bilinear(d, d)));
    }
    gaps.push_back(gap);
  }
  CHECK(gaps[0] / gaps[1] > 1.6);
  CHECK(gaps[1] / gaps[2] > 1.6);

  p.tau = 1e-6;
  p.t_end = 0.2;
  CHECK_THROWS_AS(volterra_reference(p), Error);
}

TEST_CASE("macro problem validation") {
  auto p = base_problem(4);
  p.tau = 0.0;
  CHECK_THROWS_AS(MacroSolver{p}, Error);
  p = base_problem(4);
  p.d = {1.0, 0.2, 0.1, 1.0};
  CHECK_THROWS_AS(MacroSolver{p}, Error);
  p = base_problem(4);
  p.d = {1.0, 2.0, 2.0, 1.0};
  CHECK_THROWS_AS(MacroSolver{p}, Error);
  p = base_problem(4);
  p.sigma = 1.5;
  CHECK_THROWS_AS(MacroSolver{p}, Error);
  p = base_problem(4);
  p.terms.push_back({-1.0, 3.0});
  CHECK_THROWS_AS(MacroSolver{p}, Error);
  p = base_problem(4);
  p.u0 = nullptr;
  CHECK_THROWS_AS(MacroSolver{p}, Error);
}
