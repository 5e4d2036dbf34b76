#include "homogmem.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <new>
#include <string>

#include "homogmem/cell_tensor.hpp"
#include "homogmem/error.hpp"
#include "homogmem/expression.hpp"
#include "homogmem/kernel.hpp"
#include "homogmem/macro.hpp"
#include "homogmem/output.hpp"

struct hm_mesh {
  homogmem::TriMesh mesh;
};

struct hm_kernel {
  homogmem::KernelApproximation kernel;
};

struct hm_run {
  homogmem::TriMesh mesh;
  homogmem::RunResult result;
};

namespace {

using namespace homogmem;

thread_local std::string last_error;

hm_status to_status(Errc e) {
  switch (e) {
    case Errc::invalid_argument: return HM_ERR_INVALID_ARGUMENT;
    case Errc::geometry: return HM_ERR_GEOMETRY;
    case Errc::periodicity: return HM_ERR_PERIODICITY;
    case Errc::format: return HM_ERR_FORMAT;
    case Errc::convergence: return HM_ERR_CONVERGENCE;
    case Errc::io: return HM_ERR_IO;
  }
  return HM_ERR_INTERNAL;
}

template <class F>
hm_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return HM_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return HM_ERR_INTERNAL;
}

template <class T>
const T& deref(const T* p, const char* what) {
  require(p != nullptr, Errc::invalid_argument, std::string("null ") + what);
  return *p;
}

std::string text(const char* p, const char* what) {
  require(p != nullptr, Errc::invalid_argument, std::string("null ") + what);
  return p;
}

template <class T>
void check_out(T* p) {
  require(p != nullptr, Errc::invalid_argument, "null output pointer");
}

CellGeometry to_geometry(const hm_cell_geometry* g) {
  const auto& in = deref(g, "geometry");
  CellGeometry out;
  out.a = in.a;
  out.b = in.b;
  out.angle_deg = in.angle_deg;
  out.d1 = in.d1;
  out.d2 = in.d2;
  return out;
}

Region to_region(hm_region r) {
  switch (r) {
    case HM_REGION_OMEGA: return Region::omega;
    case HM_REGION_Y1: return Region::y1;
    case HM_REGION_Y2: return Region::y2;
  }
  fail(Errc::invalid_argument, "unknown region");
}

const Snapshot& snapshot_at(const hm_run* run, size_t index) {
  const auto& snaps = deref(run, "run").result.snapshots;
  require(index < snaps.size(), Errc::invalid_argument, "snapshot index out of range");
  return snaps[index];
}

}  // namespace

extern "C" {

const char* hm_version(void) { return "1.0.0"; }

const char* hm_last_error(void) { return last_error.c_str(); }

const char* hm_status_string(hm_status status) {
  switch (status) {
    case HM_OK: return "ok";
    case HM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HM_ERR_GEOMETRY: return "geometry error";
    case HM_ERR_PERIODICITY: return "periodicity error";
    case HM_ERR_FORMAT: return "format error";
    case HM_ERR_CONVERGENCE: return "convergence failure";
    case HM_ERR_IO: return "i/o error";
    case HM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

hm_cell_geometry hm_default_geometry(void) {
  const CellGeometry g;
  return {g.a, g.b, g.angle_deg, g.d1, g.d2};
}

hm_status hm_mesh_cell(const hm_cell_geometry* geometry, double h, size_t n_arc, double jitter, hm_mesh** out) {
  return guarded([&] {
    check_out(out);
    *out = new hm_mesh{build_cell_mesh(to_geometry(geometry), h, n_arc, jitter)};
  });
}

hm_status hm_mesh_homogeneous_cell(double h, hm_mesh** out) {
  return guarded([&] {
    check_out(out);
    *out = new hm_mesh{build_homogeneous_cell_mesh(h)};
  });
}

hm_status hm_mesh_unit_square(size_t n, hm_mesh** out) {
  return guarded([&] {
    check_out(out);
    *out = new hm_mesh{build_unit_square_mesh(n)};
  });
}

hm_msh_tags hm_default_msh_tags(void) { return {1, 2, 3, 1, 2}; }

hm_status hm_mesh_read_msh(const char* path, const hm_msh_tags* tags, hm_mesh** out) {
  return guarded([&] {
    check_out(out);
    const hm_msh_tags t = tags ? *tags : hm_default_msh_tags();
    MshTagMap map;
    map.regions = {{t.y1, Region::y1}, {t.y2, Region::y2}, {t.omega, Region::omega}};
    map.boundaries = {{t.outer, BoundaryTag::outer}, {t.inclusion, BoundaryTag::inclusion}};
    require(map.regions.size() == 3 && map.boundaries.size() == 2, Errc::invalid_argument,
            "msh tags must be distinct");
    auto mesh = read_msh(text(path, "path"), map);
    if (mesh.count(Region::y1) + mesh.count(Region::y2) > 0) mesh = periodic_pairs(std::move(mesh));
    *out = new hm_mesh{std::move(mesh)};
  });
}

hm_status hm_mesh_write_msh(const hm_mesh* mesh, const char* path) {
  return guarded([&] { write_msh(deref(mesh, "mesh").mesh, text(path, "path")); });
}

hm_status hm_mesh_restrict(const hm_mesh* mesh, hm_region region, hm_mesh** out) {
  return guarded([&] {
    check_out(out);
    auto sub = deref(mesh, "mesh").mesh.restricted(mask_of(to_region(region)));
    require(sub.num_triangles() > 0, Errc::invalid_argument,
            std::string("mesh has no ") + to_string(to_region(region)) + " triangles");
    *out = new hm_mesh{std::move(sub)};
  });
}

hm_status hm_mesh_counts(const hm_mesh* mesh, size_t* vertices, size_t* triangles) {
  return guarded([&] {
    const auto& m = deref(mesh, "mesh").mesh;
    if (vertices) *vertices = m.num_vertices();
    if (triangles) *triangles = m.num_triangles();
  });
}

hm_status hm_mesh_area(const hm_mesh* mesh, hm_region region, double* area) {
  return guarded([&] {
    check_out(area);
    *area = deref(mesh, "mesh").mesh.area(mask_of(to_region(region)));
  });
}

void hm_mesh_free(hm_mesh* mesh) { delete mesh; }

hm_status hm_tensor_compute(const hm_mesh* cell, const hm_cell_geometry* geometry, double tol, unsigned threads,
                            hm_tensor_result* out) {
  return guarded([&] {
    check_out(out);
    SolveOptions opts;
    if (tol > 0.0) opts.tol = tol;
    const auto sol = solve_correctors(deref(cell, "mesh").mesh, to_geometry(geometry), opts, threads);
    const auto t = effective_tensor(sol);
    hm_tensor_result r{};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        r.d[i][j] = t.d[i][j];
        r.raw[i][j] = t.raw[i][j];
      }
      r.mu[i] = sol.component[i].mu;
      r.residual[i] = sol.component[i].residual;
      r.iterations[i] = sol.component[i].iterations;
    }
    r.asymmetry = t.asymmetry;
    r.y1_measure = t.y1_measure;
    r.y1_vertices = sol.y1.num_vertices();
    r.y1_triangles = sol.y1.num_triangles();
    *out = r;
  });
}

hm_status hm_kernel_build(const hm_mesh* y2, const hm_cell_geometry* geometry, size_t m, double tol,
                          hm_kernel** out) {
  return guarded([&] {
    check_out(out);
    EigenOptions opts;
    if (tol > 0.0) opts.tol = tol;
    *out = new hm_kernel{build_kernel(deref(y2, "mesh").mesh, to_geometry(geometry), m, opts)};
  });
}

hm_status hm_kernel_filter(const hm_kernel* kernel, double epsilon, int fold_rho, hm_kernel** out) {
  return guarded([&] {
    check_out(out);
    *out = new hm_kernel{filter(deref(kernel, "kernel").kernel, epsilon, fold_rho != 0)};
  });
}

hm_status hm_kernel_truncate(const hm_kernel* kernel, size_t m, hm_kernel** out) {
  return guarded([&] {
    check_out(out);
    *out = new hm_kernel{truncate(deref(kernel, "kernel").kernel, m)};
  });
}

hm_status hm_kernel_info_get(const hm_kernel* kernel, hm_kernel_info* out) {
  return guarded([&] {
    check_out(out);
    const auto& k = deref(kernel, "kernel").kernel;
    *out = {k.raw_count(), k.kept_count(), k.r, k.r_raw, k.chi0(), k.rho, k.epsilon,
            k.rho_folded ? 1 : 0, k.y2_measure, k.y2_measure_analytic, k.max_residual};
  });
}

hm_status hm_kernel_term(const hm_kernel* kernel, size_t index, double* a, double* lambda) {
  return guarded([&] {
    const auto& terms = deref(kernel, "kernel").kernel.terms;
    require(index < terms.size(), Errc::invalid_argument, "kernel term index out of range");
    if (a) *a = terms[index].a;
    if (lambda) *lambda = terms[index].lambda;
  });
}

hm_status hm_kernel_eval(const hm_kernel* kernel, double t, double* value) {
  return guarded([&] {
    check_out(value);
    *value = eval_kernel(deref(kernel, "kernel").kernel, t);
  });
}

hm_status hm_kernel_write_json(const hm_kernel* kernel, const char* path) {
  return guarded([&] { write_kernel_json(deref(kernel, "kernel").kernel, text(path, "path")); });
}

hm_status hm_kernel_read_json(const char* path, hm_kernel** out) {
  return guarded([&] {
    check_out(out);
    *out = new hm_kernel{read_kernel_json(text(path, "path"))};
  });
}

hm_status hm_kernel_write_samples(const hm_kernel* kernel, const char* path, double t_min, double t_max,
                                  size_t count) {
  return guarded(
      [&] { write_kernel_samples(deref(kernel, "kernel").kernel, text(path, "path"), t_min, t_max, count); });
}

void hm_kernel_free(hm_kernel* kernel) { delete kernel; }

hm_status hm_macro_run(const hm_mesh* omega, const hm_kernel* kernel, const hm_macro_params* params,
                       const double* snapshot_times, size_t snapshot_count, hm_run** out) {
  return guarded([&] {
    check_out(out);
    const auto& p = deref(params, "parameters");
    require(snapshot_count == 0 || snapshot_times != nullptr, Errc::invalid_argument, "null snapshot times");
    MacroProblem problem;
    problem.mesh = deref(omega, "mesh").mesh;
    problem.d = {p.d[0][0], p.d[0][1], p.d[1][0], p.d[1][1]};
    problem.set_kernel(deref(kernel, "kernel").kernel);
    problem.u0 = initial_condition(text(p.u0, "initial condition"));
    problem.tau = p.tau;
    problem.sigma = p.sigma;
    problem.t_end = p.t_end;
    auto result = run(problem, std::span<const double>(snapshot_times, snapshot_count));
    *out = new hm_run{std::move(problem.mesh), std::move(result)};
  });
}

hm_status hm_run_info_get(const hm_run* run, hm_run_info* out) {
  return guarded([&] {
    check_out(out);
    const auto& r = deref(run, "run").result;
    hm_run_info info{};
    info.steps = r.steps;
    info.snapshot_count = r.snapshots.size();
    info.stability_warning = r.stability_warning ? 1 : 0;
    info.energy_initial = r.series.front().energy;
    info.energy_final = r.series.back().energy;
    info.l2_initial = r.series.front().l2_norm;
    info.l2_final = r.series.back().l2_norm;
    info.max_energy_increase = -INFINITY;
    for (std::size_t i = 1; i < r.series.size(); ++i)
      info.max_energy_increase = std::max(info.max_energy_increase, r.series[i].energy - r.series[i - 1].energy);
    if (r.series.size() < 2) info.max_energy_increase = 0.0;
    *out = info;
  });
}

hm_status hm_run_energy(const hm_run* run, size_t n, double* t, double* energy, double* l2_norm) {
  return guarded([&] {
    const auto& s = deref(run, "run").result.series;
    require(n < s.size(), Errc::invalid_argument, "step index out of range");
    if (t) *t = s[n].t;
    if (energy) *energy = s[n].energy;
    if (l2_norm) *l2_norm = s[n].l2_norm;
  });
}

hm_status hm_run_snapshot(const hm_run* run, size_t index, size_t* step, double* t) {
  return guarded([&] {
    const auto& s = snapshot_at(run, index);
    if (step) *step = s.n;
    if (t) *t = s.t;
  });
}

hm_status hm_run_write_energy_csv(const hm_run* run, const char* path) {
  return guarded([&] { write_energy_csv(text(path, "path"), deref(run, "run").result.series); });
}

hm_status hm_run_write_snapshot_vtk(const hm_run* run, size_t index, const char* path) {
  return guarded([&] {
    const auto& snap = snapshot_at(run, index);
    write_vtk(text(path, "path"), run->mesh, snap.values, "u");
  });
}

hm_status hm_run_write_snapshot_csv(const hm_run* run, size_t index, const char* path) {
  return guarded([&] {
    const auto& snap = snapshot_at(run, index);
    write_field_csv(text(path, "path"), run->mesh, snap.values);
  });
}

void hm_run_free(hm_run* run) { delete run; }

}  // extern "C"
