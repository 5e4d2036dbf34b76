#include "homogmem/macro.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "homogmem/error.hpp"

namespace homogmem {

std::size_t MacroProblem::steps() const {
  if (t_end <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(t_end / tau - 1e-9));
}

void MacroProblem::validate() const {
  require(tau > 0.0, Errc::invalid_argument, "macro: tau must be positive");
  require(sigma >= 0.0 && sigma <= 1.0, Errc::invalid_argument, "macro: sigma must lie in [0, 1]");
  require(t_end >= 0.0, Errc::invalid_argument, "macro: t_end must be nonnegative");
  require(r >= 0.0, Errc::invalid_argument, "macro: remainder r must be nonnegative");
  require(static_cast<bool>(u0), Errc::invalid_argument, "macro: missing initial condition");
  require(mesh.num_triangles() > 0, Errc::invalid_argument, "macro: empty mesh");
  const double scale = std::max({std::abs(d.xx), std::abs(d.xy), std::abs(d.yx), std::abs(d.yy)});
  require(d.asymmetry() <= 1e-12 * scale, Errc::invalid_argument, "macro: D must be symmetric");
  require(d.positive_definite(), Errc::invalid_argument, "macro: D must be positive definite");
  for (const auto& t : terms)
    require(t.a > 0.0 && t.lambda > 0.0, Errc::invalid_argument, "macro: kernel terms need a > 0, lambda > 0");
}

MacroSolver::MacroSolver(const MacroProblem& problem) : problem_(problem) {
  problem_.validate();
  dofs_ = make_dof_map(problem_.mesh, {.dirichlet = {BoundaryTag::outer}});
  require(dofs_.num_dofs > 0, Errc::invalid_argument, "macro: no interior degrees of freedom");
  mass_ = reduce(assemble_mass(problem_.mesh), dofs_);
  stiffness_ = reduce(assemble_stiffness(problem_.mesh, Diffusivity::uniform(problem_.d)), dofs_);

  const double tau = problem_.tau, sigma = problem_.sigma;
  double alpha = 0.0;
  for (const auto& t : problem_.terms) {
    const double b = t.a / (1.0 + sigma * t.lambda * tau);
    beta_.push_back(b);
    alpha += b;
  }
  lead_ = 1.0 + problem_.r + sigma * tau * alpha;
  step_matrix_ = SparseCholesky(linear_combination(lead_, mass_, sigma * tau, stiffness_));
}

MacroState MacroSolver::state_from(std::vector<double> y) const {
  require(y.size() == dofs_.num_dofs, Errc::invalid_argument, "macro: state size mismatch");
  MacroState s;
  s.y = std::move(y);
  s.w.assign(problem_.terms.size(), std::vector<double>(dofs_.num_dofs, 0.0));
  return s;
}

MacroState MacroSolver::initial_state() const {
  const auto b = dofs_.fold(assemble_projection_rhs(problem_.mesh, problem_.u0));
  const SparseCholesky m(mass_);
  return state_from(m.solve(b));
}

void MacroSolver::step(MacroState& s) const {
  const std::size_t n = dofs_.num_dofs;
  const double tau = problem_.tau, sigma = problem_.sigma;

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lead_ * s.y[i];
  for (std::size_t k = 0; k < beta_.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) v[i] -= tau * beta_[k] * s.w[k][i];
  auto rhs = mass_ * v;
  if (sigma < 1.0) {
    const auto ky = stiffness_ * s.y;
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= (1.0 - sigma) * tau * ky[i];
  }
  const auto y_new = step_matrix_.solve(rhs);

  for (std::size_t k = 0; k < beta_.size(); ++k) {
    const double lt = problem_.terms[k].lambda * tau;
    const double keep = 1.0 - (1.0 - sigma) * lt;
    const double inv = 1.0 / (1.0 + sigma * lt);
    auto& w = s.w[k];
    for (std::size_t i = 0; i < n; ++i) w[i] = (y_new[i] - s.y[i] + keep * w[i]) * inv;
  }
  s.y = y_new;
  ++s.n;
  s.t = static_cast<double>(s.n) * tau;
}

double MacroSolver::energy(const MacroState& s) const {
  double e = stiffness_.bilinear(s.y, s.y);
  for (std::size_t k = 0; k < s.w.size(); ++k) e += problem_.terms[k].a * mass_.bilinear(s.w[k], s.w[k]);
  return e;
}

double MacroSolver::l2_norm(const MacroState& s) const {
  return std::sqrt(std::max(mass_.bilinear(s.y, s.y), 0.0));
}

std::vector<double> MacroSolver::nodal(const MacroState& s) const { return dofs_.expand(s.y); }

RunResult run(const MacroProblem& problem, std::span<const double> snapshot_times) {
  const MacroSolver solver(problem);
  RunResult out;
  out.steps = problem.steps();
  out.stability_warning = !problem.unconditionally_stable();

  std::vector<std::size_t> wanted;
  for (double t : snapshot_times) {
    require(t >= 0.0 && t <= problem.t_end * (1.0 + 1e-12), Errc::invalid_argument,
            "macro: snapshot time " + std::to_string(t) + " outside [0, t_end]");
    wanted.push_back(std::min(out.steps, static_cast<std::size_t>(std::llround(t / problem.tau))));
  }
  if (wanted.empty()) wanted.push_back(0);
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

  auto s = solver.initial_state();
  auto record = [&] {
    out.series.push_back({s.n, s.t, solver.energy(s), solver.l2_norm(s)});
    if (std::binary_search(wanted.begin(), wanted.end(), s.n)) out.snapshots.push_back({s.n, s.t, solver.nodal(s)});
  };
  record();
  for (std::size_t n = 0; n < out.steps; ++n) {
    solver.step(s);
    record();
  }
  return out;
}

std::vector<std::vector<double>> volterra_reference(const MacroProblem& problem) {
  const std::size_t steps = problem.steps();
  require(steps + 1 <= 100000, Errc::invalid_argument,
          "volterra reference: " + std::to_string(steps + 1) + " history levels exceed the limit of 100000");
  MacroProblem plain = problem;
  plain.terms.clear();
  const MacroSolver base(plain);
  const auto& m = base.mass();
  const auto& k = base.stiffness();
  const std::size_t n = base.dofs().num_dofs;
  const double tau = problem.tau, sigma = problem.sigma;

  // omega_i = int_{i tau}^{(i+1) tau} chi(s) ds
  std::vector<double> omega(steps + 1, 0.0);
  for (std::size_t i = 0; i <= steps; ++i)
    for (const auto& t : problem.terms)
      omega[i] += t.a / t.lambda * std::exp(-t.lambda * tau * static_cast<double>(i)) * (1.0 - std::exp(-t.lambda * tau));

  const SparseCholesky op(linear_combination(1.0 + problem.r + sigma * omega[0], m, sigma * tau, k));

  std::vector<std::vector<double>> u{base.initial_state().y};
  std::vector<std::vector<double>> delta;
  std::vector<double> conv_prev(n, 0.0);  // C^n, convolution of chi with u' at t_n
  for (std::size_t step = 0; step < steps; ++step) {
    std::vector<double> history(n, 0.0);  // C^{n+1} without the unknown increment
    for (std::size_t j = 0; j < step; ++j) {
      const double wgt = omega[step - j] / tau;
      for (std::size_t i = 0; i < n; ++i) history[i] += wgt * delta[j][i];
    }
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = -tau * (sigma * history[i] + (1.0 - sigma) * conv_prev[i]);
    auto rhs = m * v;
    const auto ku = k * u.back();
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= tau * ku[i];
    auto d = op.solve(rhs);

    std::vector<double> next = u.back();
    for (std::size_t i = 0; i < n; ++i) {
      next[i] += d[i];
      conv_prev[i] = history[i] + omega[0] / tau * d[i];
    }
    delta.push_back(std::move(d));
    u.push_back(std::move(next));
  }
  return u;
}

}  // namespace homogmem
