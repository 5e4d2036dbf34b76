#include "homogmem/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include <json.hpp>

#include "homogmem/error.hpp"
#include "homogmem/fem.hpp"

namespace homogmem {

using nlohmann::json;

double KernelApproximation::chi0() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.a;
  return s;
}

double KernelApproximation::integral() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.a / t.lambda;
  return s;
}

namespace {

void set_remainder(KernelApproximation& k, std::size_t m) {
  double captured = 0.0;
  for (std::size_t i = 0; i < m; ++i) captured += k.raw[i].projection * k.raw[i].projection;
  k.r_raw = (k.y2_measure - captured) / (1.0 - k.y2_measure);
  k.r = std::max(k.r_raw, 0.0);
}

}  // namespace

KernelApproximation build_kernel_from_spectrum(std::span<const double> lambda,
                                               std::span<const double> projection,
                                               double y2_measure) {
  require(lambda.size() == projection.size(), Errc::invalid_argument,
          "kernel: eigenvalue and projection counts differ");
  require(y2_measure > 0.0 && y2_measure < 1.0, Errc::invalid_argument,
          "kernel: |Y2| must lie in (0, 1)");
  KernelApproximation k;
  k.y2_measure = y2_measure;
  k.y2_measure_analytic = y2_measure;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    require(lambda[i] > 0.0, Errc::invalid_argument, "kernel: eigenvalues must be positive");
    require(i == 0 || lambda[i] >= lambda[i - 1], Errc::invalid_argument,
            "kernel: eigenvalues must be ascending");
    const double p = projection[i];
    k.raw.push_back({lambda[i], p, p * p * lambda[i] / (1.0 - y2_measure)});
    k.terms.push_back({k.raw.back().a, lambda[i]});
  }
  set_remainder(k, k.raw.size());
  return k;
}

KernelApproximation build_kernel(const TriMesh& y2, const CellGeometry& geom, std::size_t m,
                                 const EigenOptions& opts) {
  require(y2.num_triangles() > 0, Errc::invalid_argument, "kernel: empty Y2 mesh");
  require(y2.count(Region::y2) == y2.num_triangles(), Errc::invalid_argument,
          "kernel: mesh must contain only Y2 triangles");
  require(geom.d2 > 0.0, Errc::invalid_argument, "kernel: d2 must be positive");

  const auto dofs = make_dof_map(y2, {.dirichlet = {BoundaryTag::inclusion}});
  const auto k = reduce(assemble_stiffness(y2, Diffusivity::uniform(geom.d2)), dofs);
  const auto mass = reduce(assemble_mass(y2), dofs);
  const auto ones = dofs.fold(assemble_basis_integrals(y2));

  EigenOptions eo = opts;
  if (eo.sign_reference.empty()) eo.sign_reference = ones;
  const auto pairs = smallest_eigenpairs(k, mass, m, eo);

  std::vector<double> proj(pairs.count());
  for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = dot(ones, pairs.vectors[i]);
  auto out = build_kernel_from_spectrum(pairs.values, proj, y2.area());
  out.y2_measure_analytic = geom.inclusion_measure();
  for (double r : pairs.residuals) out.max_residual = std::max(out.max_residual, r);
  return out;
}

KernelApproximation filter(const KernelApproximation& kernel, double eps, bool fold_rho) {
  require(eps >= 0.0, Errc::invalid_argument, "kernel: filter threshold must be nonnegative");
  KernelApproximation out = kernel;
  out.terms.clear();
  out.epsilon = eps;
  out.rho = 0.0;
  out.rho_folded = fold_rho;
  double dropped_integral = 0.0;
  for (const auto& t : kernel.raw) {
    if (t.a < eps) {
      out.rho += t.a;
      dropped_integral += t.a / t.lambda;
    } else {
      out.terms.push_back({t.a, t.lambda});
    }
  }
  set_remainder(out, out.raw.size());
  if (fold_rho) out.r += dropped_integral;
  return out;
}

KernelApproximation truncate(const KernelApproximation& kernel, std::size_t m) {
  require(m <= kernel.raw.size(), Errc::invalid_argument,
          "kernel: cannot truncate to " + std::to_string(m) + " of " +
              std::to_string(kernel.raw.size()) + " terms");
  KernelApproximation out = kernel;
  out.raw.resize(m);
  return filter(out, kernel.epsilon, kernel.rho_folded);
}

double eval_kernel(const KernelApproximation& kernel, double t) {
  require(t >= 0.0, Errc::invalid_argument, "kernel: negative time");
  double s = 0.0;
  for (const auto& term : kernel.terms) s += term.a * std::exp(-term.lambda * t);
  return s;
}

void write_kernel_json(const KernelApproximation& k, const std::filesystem::path& path) {
  json terms = json::array(), raw = json::array();
  for (const auto& t : k.terms) terms.push_back({t.a, t.lambda});
  for (const auto& t : k.raw) raw.push_back({t.lambda, t.projection, t.a});
  const json doc = {
      {"terms", terms},
      {"r", k.r},
      {"r_raw", k.r_raw},
      {"r_clamped", k.r_clamped()},
      {"m", k.raw_count()},
      {"m_eps", k.kept_count()},
      {"epsilon", k.epsilon},
      {"rho", k.rho},
      {"fold_rho", k.rho_folded},
      {"chi0", k.chi0()},
      {"y2_measure", k.y2_measure},
      {"y2_measure_analytic", k.y2_measure_analytic},
      {"max_residual", k.max_residual},
      {"raw_terms", raw},
  };
  std::ofstream out(path);
  require(out.good(), Errc::io, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  require(out.good(), Errc::io, "write failed: " + path.string());
}

KernelApproximation read_kernel_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), Errc::io, "cannot open " + path.string());
  try {
    const json doc = json::parse(in);
    KernelApproximation k;
    for (const auto& t : doc.at("terms")) k.terms.push_back({t.at(0).get<double>(), t.at(1).get<double>()});
    for (const auto& t : doc.at("raw_terms"))
      k.raw.push_back({t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()});
    k.r = doc.at("r").get<double>();
    k.r_raw = doc.at("r_raw").get<double>();
    k.epsilon = doc.at("epsilon").get<double>();
    k.rho = doc.at("rho").get<double>();
    k.rho_folded = doc.at("fold_rho").get<bool>();
    k.y2_measure = doc.at("y2_measure").get<double>();
    k.y2_measure_analytic = doc.at("y2_measure_analytic").get<double>();
    k.max_residual = doc.value("max_residual", 0.0);
    for (const auto& t : k.terms)
      require(t.a > 0.0 && t.lambda > 0.0, Errc::format, path.string() + ": nonpositive kernel term");
    require(k.r >= 0.0, Errc::format, path.string() + ": negative remainder");
    return k;
  } catch (const json::exception& e) {
    fail(Errc::format, path.string() + ": " + e.what());
  }
}

void write_kernel_samples(const KernelApproximation& kernel, const std::filesystem::path& path,
                          double t_min, double t_max, std::size_t count) {
  require(t_min > 0.0 && t_max > t_min && count >= 2, Errc::invalid_argument,
          "kernel samples: need 0 < t_min < t_max and at least two points");
  std::ofstream out(path);
  require(out.good(), Errc::io, "cannot write " + path.string());
  out << "t,chi\n" << std::setprecision(17);
  out << 0.0 << ',' << eval_kernel(kernel, 0.0) << '\n';
  const double step = std::log(t_max / t_min) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = t_min * std::exp(step * static_cast<double>(i));
    out << t << ',' << eval_kernel(kernel, t) << '\n';
  }
  require(out.good(), Errc::io, "write failed: " + path.string());
}

}  // namespace homogmem
