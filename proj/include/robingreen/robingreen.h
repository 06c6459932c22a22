/*
 * robingreen: Green's functions and heat kernels for parabolic and elliptic
 * systems with Robin boundary conditions, by P1 finite elements.
 *
 * Every function returns an rg_status. On failure the message is available
 * from rg_last_error() on the calling thread until the next call. Objects
 * are opaque; each *_free function accepts NULL. Matrices and vectors are
 * passed as caller-owned arrays with explicit lengths; nodal vectors use
 * component-major order (component k of vertex v at k * vertices + v).
 */
#ifndef ROBINGREEN_H
#define ROBINGREEN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RG_BUILDING_LIBRARY)
#    define RG_API __declspec(dllexport)
#  else
#    define RG_API __declspec(dllimport)
#  endif
#else
#  define RG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rg_status {
  RG_OK = 0,
  RG_INVALID_ARGUMENT = 1,
  RG_PRECONDITION = 2,
  RG_NOT_CONVERGED = 3,
  RG_UNKNOWN_NAME = 4,
  RG_IO = 5,
  RG_INTERNAL = 6
} rg_status;

typedef enum rg_scheme { RG_IMPLICIT_EULER = 0, RG_CRANK_NICOLSON = 1 } rg_scheme;

typedef struct rg_mesh rg_mesh;
typedef struct rg_problem rg_problem;
typedef struct rg_trajectory rg_trajectory;

typedef struct rg_grid {
  double t0;
  double t1;
  size_t steps;
  rg_scheme scheme;
} rg_grid;

typedef struct rg_mesh_info {
  int dimension;
  size_t vertices;
  size_t cells;
  size_t boundary_facets;
  double measure;
  double boundary_measure;
  double diameter;
  double mesh_size;
} rg_mesh_info;

typedef struct rg_coercivity_report {
  double theta0;
  double lambda_tilde;
  double residual;
  double t_worst;
  double delta;
  int iterations;
  int converged;
  int delta_ok;
} rg_coercivity_report;

typedef struct rg_elliptic_info {
  double truncation_time;
  double tail_bound;
  size_t steps;
} rg_elliptic_info;

typedef struct rg_gaussian_fit {
  double C;
  double C_fit;
  double kappa;
  double r_squared;
  double slack;
  size_t violations;
  size_t n_samples;
  int pass;
} rg_gaussian_fit;

/* ---- library ---------------------------------------------------------- */

RG_API const char* rg_version(void);
RG_API const char* rg_last_error(void);
RG_API const char* rg_status_name(rg_status status);
/* Caps worker threads for independent columns and pairs; 0 = hardware count. */
RG_API void rg_set_max_jobs(unsigned jobs);
/* Releases strings returned through char** out-parameters. */
RG_API void rg_string_free(char* s);

/* ---- meshes ----------------------------------------------------------- */

RG_API rg_status rg_mesh_interval(double a, double b, size_t cells, rg_mesh** out);
RG_API rg_status rg_mesh_rectangle(double width, double height, size_t nx, size_t ny, rg_mesh** out);
RG_API rg_status rg_mesh_lshape(size_t n, rg_mesh** out);
RG_API rg_status rg_mesh_refine(const rg_mesh* mesh, rg_mesh** out);
RG_API rg_status rg_mesh_read_json(const char* path, rg_mesh** out);
RG_API rg_status rg_mesh_write_json(const rg_mesh* mesh, const char* path);
RG_API rg_status rg_mesh_get_info(const rg_mesh* mesh, rg_mesh_info* out);
RG_API rg_status rg_mesh_vertex(const rg_mesh* mesh, size_t vertex, double xy[2]);
RG_API rg_status rg_mesh_nearest_vertex(const rg_mesh* mesh, const double xy[2], size_t* out);
RG_API void rg_mesh_free(rg_mesh* mesh);

/* ---- problems --------------------------------------------------------- */

/* Catalog names such as "laplace", "diag(2,1)", "theta_const(1)".
 * lambda_tilde <= 0 selects half the ellipticity constant. The problem keeps
 * its own reference to the mesh. */
RG_API rg_status rg_problem_create(const rg_mesh* mesh, const char* coefficients, const char* theta, int m,
                                   double lambda_tilde, int lumped_mass, rg_problem** out);
RG_API rg_status rg_problem_ndof(const rg_problem* problem, size_t* out);
RG_API rg_status rg_problem_components(const rg_problem* problem, int* out);
/* Coordinate text export of M, K(t) and B(t); NULL paths are skipped. */
RG_API rg_status rg_problem_write_matrices(const rg_problem* problem, double t, const char* mass_path,
                                           const char* stiffness_path, const char* robin_path);
/* JSON text of the ellipticity and theta validation reports. */
RG_API rg_status rg_problem_validate(const rg_problem* problem, const double* t_samples, size_t n_samples,
                                     uint64_t seed, char** json_out);
RG_API void rg_problem_free(rg_problem* problem);

/* Newline-separated catalog entries ("coefficients" or "theta"). */
RG_API rg_status rg_catalog(const char* which, char** out);

/* ---- coercivity ------------------------------------------------------- */

RG_API rg_status rg_coercivity(const rg_problem* problem, const double* t_samples, size_t n_samples, double tol,
                               rg_coercivity_report* out);
/* Full sorted spectrum of the coercivity pencil by a dense solver (<= 2000 dofs). */
RG_API rg_status rg_coercivity_dense_spectrum(const rg_problem* problem, double t, double* out, size_t len);

/* ---- time stepping ---------------------------------------------------- */

/* Initial data by name: zero | constant(c) | bump(x0,[x1,]w) | random. */
RG_API rg_status rg_initial_data(const rg_problem* problem, const char* spec, uint64_t seed, double* out,
                                 size_t len);
/* Forward solve. source: none | constant(c) | pulse(x0,[x1,]w,t_on,t_off); NULL means none. */
RG_API rg_status rg_solve(const rg_problem* problem, const double* psi0, size_t len, const char* source,
                          const rg_grid* grid, rg_trajectory** out);
/* Backward solve of the adjoint problem from terminal data. */
RG_API rg_status rg_solve_adjoint(const rg_problem* problem, const double* psiT, size_t len, const char* source,
                                  const rg_grid* grid, rg_trajectory** out);
RG_API rg_status rg_trajectory_size(const rg_trajectory* traj, size_t* snapshots, size_t* ndof);
RG_API rg_status rg_trajectory_time(const rg_trajectory* traj, size_t k, double* out);
RG_API rg_status rg_trajectory_snapshot(const rg_trajectory* traj, size_t k, double* out, size_t len);
/* mass, gradient and Robin energies of snapshot k. */
RG_API rg_status rg_trajectory_energy(const rg_trajectory* traj, size_t k, double out[3]);
RG_API rg_status rg_trajectory_tri_norm(const rg_trajectory* traj, double* out);
/* energy_path may be NULL. */
RG_API rg_status rg_trajectory_write(const rg_trajectory* traj, const char* csv_path, const char* energy_path);
/* JSON decay report for I(t) against theta0; tol < 0 selects 0.05 + dt theta0. */
RG_API rg_status rg_trajectory_check_decay(const rg_trajectory* traj, double theta0, double tol, char** json_out);
/* JSON local-boundedness report over the given radii. */
RG_API rg_status rg_trajectory_local_bound(const rg_trajectory* traj, const double x0[2], const double* radii,
                                           size_t n_radii, char** json_out);
RG_API void rg_trajectory_free(rg_trajectory* traj);

/* ---- Green's functions ------------------------------------------------ */

RG_API rg_status rg_heat_kernel_column(const rg_problem* problem, size_t y_vertex, int column, const rg_grid* grid,
                                       rg_trajectory** out);
RG_API rg_status rg_averaged_green(const rg_problem* problem, const double y[2], double s, double epsilon,
                                   int column, const rg_grid* grid, rg_trajectory** out);
/* m x m value, row-major, of G(x,t; y,s); zero for t < s. */
RG_API rg_status rg_green_eval(const rg_problem* problem, const double x[2], double t, size_t y_vertex, double s,
                               const rg_grid* grid, double* out, size_t len);
/* m x m value of G*(y,s; x,t) from the backward adjoint run. */
RG_API rg_status rg_adjoint_green_eval(const rg_problem* problem, size_t x_vertex, double t, const double y[2],
                                       double s, const rg_grid* grid, double* out, size_t len);
/* Computes all m columns for source (y_vertex, s) and writes kernel samples
 * at every other vertex for up to max_times snapshot times. epsilon = 0
 * uses the discrete delta (s must equal grid->t0). column_csv may be NULL. */
RG_API rg_status rg_green_samples(const rg_problem* problem, size_t y_vertex, double s, double epsilon, int column,
                                  const rg_grid* grid, size_t max_times, const char* samples_csv,
                                  const char* column_csv);
/* ndof x m values, column-major by source component. */
RG_API rg_status rg_elliptic_green(const rg_problem* problem, size_t y_vertex, double theta0, double tol,
                                   double* out, size_t len, rg_elliptic_info* info);
RG_API rg_status rg_steady_green(const rg_problem* problem, size_t y_vertex, double* out, size_t len);
RG_API rg_status rg_write_nodal_csv(const rg_problem* problem, const double* values, size_t len, const char* path);

/* ---- verification (file in, JSON out) --------------------------------- */

RG_API rg_status rg_verify_gaussian(const char* samples_csv, double diam, double slack, double tau_min,
                                    double tau_max, rg_gaussian_fit* out);
RG_API rg_status rg_verify_gaussian_json(const char* samples_csv, double diam, double slack, double tau_min,
                                         double tau_max, char** json_out);
RG_API rg_status rg_verify_offdiag_json(const char* samples_csv, double h, double max_distance, double slack,
                                        char** json_out);
/* Elliptic bounds for values produced by rg_elliptic_green / rg_steady_green. */
RG_API rg_status rg_verify_elliptic_json(const rg_problem* problem, const double* values, size_t len,
                                         size_t y_vertex, double slack, char** json_out);

/* ---- oracles ---------------------------------------------------------- */

/* Heat kernel series on (0,1). terms and error_bound may be NULL; error_bound
 * receives the truncation bound plus the summation roundoff estimate. */
RG_API rg_status rg_oracle_series(double theta_left, double theta_right, double x, double y, double t,
                                  double* value, size_t* terms, double* error_bound);
/* Series samples on (0,1) for every (x, t) pair, written in the sample CSV schema. */
RG_API rg_status rg_oracle_series_samples(double theta_left, double theta_right, const double* xs, size_t nx,
                                          double y, const double* ts, size_t nt, const char* path);
/* Max relative difference between the FEM trajectory and the finite-difference
 * reference at the FEM vertices and grid times. initial: constant(c) | bump(x0,w). */
RG_API rg_status rg_oracle_fd_compare(const rg_problem* problem, size_t fine_n, const rg_grid* grid,
                                      const char* initial, double* max_rel_diff);

/* ---- experiment runner ------------------------------------------------ */

/* Runs a JSON experiment configuration; returns the manifest path. */
RG_API rg_status rg_run_config(const char* path, char** manifest_path);

#ifdef __cplusplus
}
#endif

#endif /* ROBINGREEN_H */
