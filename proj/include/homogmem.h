/* C interface to the homogenization library: cell meshes, the effective
 * diffusion tensor, the exponential-sum memory kernel and the macroscale
 * solver. Every function returns an hm_status; on failure hm_last_error()
 * describes the problem for the calling thread. Handles are opaque and owned
 * by the caller, who releases them with the matching *_free function. */
#ifndef HOMOGMEM_H
#define HOMOGMEM_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(HOMOGMEM_BUILDING)
#    define HM_API __declspec(dllexport)
#  else
#    define HM_API __declspec(dllimport)
#  endif
#else
#  define HM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hm_status {
  HM_OK = 0,
  HM_ERR_INVALID_ARGUMENT = 1,
  HM_ERR_GEOMETRY = 2,
  HM_ERR_PERIODICITY = 3,
  HM_ERR_FORMAT = 4,
  HM_ERR_CONVERGENCE = 5,
  HM_ERR_IO = 6,
  HM_ERR_INTERNAL = 7
} hm_status;

typedef enum hm_region { HM_REGION_OMEGA = 0, HM_REGION_Y1 = 1, HM_REGION_Y2 = 2 } hm_region;

typedef struct hm_mesh hm_mesh;
typedef struct hm_kernel hm_kernel;
typedef struct hm_run hm_run;

typedef struct hm_cell_geometry {
  double a, b;       /* semi-axes */
  double angle_deg;  /* rotation of the major axis */
  double d1, d2;     /* matrix and scaled inclusion diffusivities */
} hm_cell_geometry;

typedef struct hm_tensor_result {
  double d[2][2];    /* symmetrized */
  double raw[2][2];
  double asymmetry;
  double mu[2];
  double residual[2];
  size_t iterations[2];
  double y1_measure;
  size_t y1_vertices;
  size_t y1_triangles;
} hm_tensor_result;

typedef struct hm_kernel_info {
  size_t raw_count;
  size_t kept_count;
  double r;
  double r_raw;
  double chi0;
  double rho;
  double epsilon;
  int fold_rho;
  double y2_measure;
  double y2_measure_analytic;
  double max_residual;
} hm_kernel_info;

typedef struct hm_macro_params {
  double d[2][2];
  const char* u0;  /* "paper", "zero" or an expression in x, y */
  double tau;
  double sigma;
  double t_end;
} hm_macro_params;

typedef struct hm_run_info {
  size_t steps;
  size_t snapshot_count;
  int stability_warning;
  double energy_initial;
  double energy_final;
  double l2_initial;
  double l2_final;
  double max_energy_increase; /* largest E^{n+1} - E^n, <= 0 for a stable run */
} hm_run_info;

HM_API const char* hm_version(void);
HM_API const char* hm_last_error(void);
HM_API const char* hm_status_string(hm_status status);
HM_API hm_cell_geometry hm_default_geometry(void);

/* meshes */
HM_API hm_status hm_mesh_cell(const hm_cell_geometry* geometry, double h, size_t n_arc, double jitter,
                              hm_mesh** out);
HM_API hm_status hm_mesh_homogeneous_cell(double h, hm_mesh** out);
HM_API hm_status hm_mesh_unit_square(size_t n, hm_mesh** out);
/* Physical group numbers of an MSH 2.2 file. */
typedef struct hm_msh_tags {
  int y1, y2, omega;     /* triangle groups */
  int outer, inclusion;  /* line groups */
} hm_msh_tags;

/* 1 Y1, 2 Y2, 3 Omega; lines 1 outer, 2 inclusion */
HM_API hm_msh_tags hm_default_msh_tags(void);
/* tags may be NULL for the defaults. A cell mesh (any Y1 or Y2 triangle)
 * gets periodic pairs. */
HM_API hm_status hm_mesh_read_msh(const char* path, const hm_msh_tags* tags, hm_mesh** out);
HM_API hm_status hm_mesh_write_msh(const hm_mesh* mesh, const char* path);
HM_API hm_status hm_mesh_restrict(const hm_mesh* mesh, hm_region region, hm_mesh** out);
HM_API hm_status hm_mesh_counts(const hm_mesh* mesh, size_t* vertices, size_t* triangles);
HM_API hm_status hm_mesh_area(const hm_mesh* mesh, hm_region region, double* area);
HM_API void hm_mesh_free(hm_mesh* mesh);

/* effective tensor from the Y1 correctors of a periodic cell mesh */
HM_API hm_status hm_tensor_compute(const hm_mesh* cell, const hm_cell_geometry* geometry, double tol,
                                   unsigned threads, hm_tensor_result* out);

/* memory kernel on a Y2-only mesh with Dirichlet data on the inclusion boundary */
HM_API hm_status hm_kernel_build(const hm_mesh* y2, const hm_cell_geometry* geometry, size_t m, double tol,
                                 hm_kernel** out);
HM_API hm_status hm_kernel_filter(const hm_kernel* kernel, double epsilon, int fold_rho, hm_kernel** out);
HM_API hm_status hm_kernel_truncate(const hm_kernel* kernel, size_t m, hm_kernel** out);
HM_API hm_status hm_kernel_info_get(const hm_kernel* kernel, hm_kernel_info* out);
HM_API hm_status hm_kernel_term(const hm_kernel* kernel, size_t index, double* a, double* lambda);
HM_API hm_status hm_kernel_eval(const hm_kernel* kernel, double t, double* value);
HM_API hm_status hm_kernel_write_json(const hm_kernel* kernel, const char* path);
HM_API hm_status hm_kernel_read_json(const char* path, hm_kernel** out);
HM_API hm_status hm_kernel_write_samples(const hm_kernel* kernel, const char* path, double t_min, double t_max,
                                         size_t count);
HM_API void hm_kernel_free(hm_kernel* kernel);

/* macroscale run on an Omega mesh (Dirichlet on the outer boundary) */
HM_API hm_status hm_macro_run(const hm_mesh* omega, const hm_kernel* kernel, const hm_macro_params* params,
                              const double* snapshot_times, size_t snapshot_count, hm_run** out);
HM_API hm_status hm_run_info_get(const hm_run* run, hm_run_info* out);
HM_API hm_status hm_run_energy(const hm_run* run, size_t n, double* t, double* energy, double* l2_norm);
HM_API hm_status hm_run_snapshot(const hm_run* run, size_t index, size_t* step, double* t);
HM_API hm_status hm_run_write_energy_csv(const hm_run* run, const char* path);
HM_API hm_status hm_run_write_snapshot_vtk(const hm_run* run, size_t index, const char* path);
HM_API hm_status hm_run_write_snapshot_csv(const hm_run* run, size_t index, const char* path);
HM_API void hm_run_free(hm_run* run);

#ifdef __cplusplus
}
#endif

#endif
