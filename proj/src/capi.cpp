#include "robingreen/robingreen.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "data.hpp"
#include "error.hpp"
#include "green.hpp"
#include "io.hpp"
#include "names.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "verify.hpp"

struct rg_mesh {
  std::shared_ptr<const rg::Mesh> mesh;
};

struct rg_problem {
  rg::Problem problem;
};

struct rg_trajectory {
  rg::Trajectory traj;
};

namespace {

thread_local std::string g_last_error;

rg_status status_of(rg::ErrorCode code) {
  switch (code) {
    case rg::ErrorCode::invalid_argument: return RG_INVALID_ARGUMENT;
    case rg::ErrorCode::precondition: return RG_PRECONDITION;
    case rg::ErrorCode::not_converged: return RG_NOT_CONVERGED;
    case rg::ErrorCode::unknown_name: return RG_UNKNOWN_NAME;
    case rg::ErrorCode::io: return RG_IO;
    case rg::ErrorCode::internal: return RG_INTERNAL;
  }
  return RG_INTERNAL;
}

template <class F>
rg_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return RG_OK;
  } catch (const rg::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RG_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RG_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  rg::require(p != nullptr, rg::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rg::TimeGrid to_grid(const rg_grid* g) {
  need(g, "grid");
  rg::TimeGrid out;
  out.t0 = g->t0;
  out.t1 = g->t1;
  out.steps = g->steps;
  rg::require(g->scheme == RG_IMPLICIT_EULER || g->scheme == RG_CRANK_NICOLSON, rg::ErrorCode::invalid_argument,
              "unknown time scheme");
  out.scheme = g->scheme == RG_CRANK_NICOLSON ? rg::Scheme::crank_nicolson : rg::Scheme::implicit_euler;
  out.validate();
  return out;
}

rg::Point to_point(const double* xy, int dim) { return {xy[0], dim == 2 ? xy[1] : 0.0}; }

rg::Vector to_vector(const double* data, size_t len, size_t expected) {
  need(data, "vector");
  rg::require(len == expected, rg::ErrorCode::invalid_argument,
              "vector length " + std::to_string(len) + " does not match " + std::to_string(expected));
  return Eigen::Map<const rg::Vector>(data, static_cast<Eigen::Index>(len));
}

void copy_out(const rg::Matrix& m, double* out, size_t len) {
  need(out, "output buffer");
  rg::require(len >= static_cast<size_t>(m.size()), rg::ErrorCode::invalid_argument, "output buffer too small");
  std::memcpy(out, m.data(), sizeof(double) * static_cast<size_t>(m.size()));
}

void copy_row_major(const rg::Matrix& m, double* out, size_t len) {
  const rg::Matrix t = m.transpose();
  copy_out(t, out, len);
}

rg::Index vertex_index(const rg::Mesh& mesh, size_t v) {
  rg::require(v < mesh.num_vertices(), rg::ErrorCode::invalid_argument, "vertex index out of range");
  return v;
}

rg::Trajectory run_solve(const rg::Problem& p, const double* psi, size_t len, const char* source,
                         const rg_grid* grid, bool backward) {
  const rg::TimeGrid g = to_grid(grid);
  const rg::Vector u = to_vector(psi, len, p.ndof());
  const std::string spec = source ? source : "none";
  const rg::SourceFn f = rg::source_from_name(spec, *p.mesh, p.m());
  if (backward)
    return rg::solve_backward_adjoint(p, u, rg::pointwise_load(p, f, g.scheme, rg::Direction::backward), g);
  return rg::solve_forward(p, u, rg::pointwise_load(p, f, g.scheme), g);
}

std::vector<rg::KernelSample> filtered_samples(const char* path, double tau_min, double tau_max, int* dim) {
  need(path, "sample path");
  auto all = rg::read_samples_csv(path, dim);
  const double lo = tau_min > 0.0 ? tau_min : 0.0;
  const double hi = tau_max > 0.0 ? tau_max : INFINITY;
  std::vector<rg::KernelSample> out;
  for (auto& s : all)
    if (s.t - s.s >= lo && s.t - s.s <= hi) out.push_back(std::move(s));
  return out;
}

rg::GaussianFit gaussian(const char* path, double diam, double slack, double tau_min, double tau_max) {
  int dim = 1;
  const auto samples = filtered_samples(path, tau_min, tau_max, &dim);
  rg::require(diam > 0.0, rg::ErrorCode::invalid_argument, "domain diameter must be positive");
  return rg::fit_gaussian_bound(samples, dim, diam, slack > 0.0 ? slack : 2.0);
}

std::function<double(double)> scalar_initial(const std::string& spec) {
  const rg::CatalogName p = rg::parse_catalog_name(spec);
  if (p.name == "constant") {
    rg::require(p.args.size() == 1, rg::ErrorCode::invalid_argument, "'constant' expects one value");
    const double c = p.args[0];
    return [c](double) { return c; };
  }
  if (p.name == "bump") {
    rg::require(p.args.size() == 2 && p.args[1] > 0.0, rg::ErrorCode::invalid_argument,
                "'bump' expects a centre and a positive width");
    const double x0 = p.args[0], w = p.args[1];
    return [x0, w](double x) { return std::exp(-(x - x0) * (x - x0) / (w * w)); };
  }
  rg::fail(rg::ErrorCode::unknown_name, "unknown initial data '" + p.name + "' for the reference comparison");
}

}  // namespace

extern "C" {

const char* rg_version(void) { return "0.1.0"; }

const char* rg_last_error(void) { return g_last_error.c_str(); }

const char* rg_status_name(rg_status status) {
  switch (status) {
    case RG_OK: return "ok";
    case RG_INVALID_ARGUMENT: return "invalid_argument";
    case RG_PRECONDITION: return "precondition";
    case RG_NOT_CONVERGED: return "not_converged";
    case RG_UNKNOWN_NAME: return "unknown_name";
    case RG_IO: return "io";
    case RG_INTERNAL: return "internal";
  }
  return "unknown_status";
}

void rg_set_max_jobs(unsigned jobs) { rg::set_max_jobs(jobs); }

void rg_string_free(char* s) { std::free(s); }

/* meshes */

rg_status rg_mesh_interval(double a, double b, size_t cells, rg_mesh** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rg_mesh{std::make_shared<const rg::Mesh>(rg::build_interval_mesh(a, b, cells))};
  });
}

rg_status rg_mesh_rectangle(double width, double height, size_t nx, size_t ny, rg_mesh** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rg_mesh{std::make_shared<const rg::Mesh>(rg::build_rectangle_mesh(width, height, nx, ny))};
  });
}

rg_status rg_mesh_lshape(size_t n, rg_mesh** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rg_mesh{std::make_shared<const rg::Mesh>(rg::build_lshape_mesh(n))};
  });
}

rg_status rg_mesh_refine(const rg_mesh* mesh, rg_mesh** out) {
  return guarded([&] {
    need(mesh, "mesh");
    need(out, "out");
    *out = new rg_mesh{std::make_shared<const rg::Mesh>(rg::refine(*mesh->mesh))};
  });
}

rg_status rg_mesh_read_json(const char* path, rg_mesh** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new rg_mesh{std::make_shared<const rg::Mesh>(rg::mesh_from_json(rg::read_text(path)))};
  });
}

rg_status rg_mesh_write_json(const rg_mesh* mesh, const char* path) {
  return guarded([&] {
    need(mesh, "mesh");
    need(path, "path");
    rg::write_text(path, rg::mesh_to_json(*mesh->mesh));
  });
}

rg_status rg_mesh_get_info(const rg_mesh* mesh, rg_mesh_info* out) {
  return guarded([&] {
    need(mesh, "mesh");
    need(out, "out");
    const rg::Mesh& m = *mesh->mesh;
    out->dimension = m.dimension();
    out->vertices = m.num_vertices();
    out->cells = m.num_cells();
    out->boundary_facets = m.num_facets();
    out->measure = m.measure();
    out->boundary_measure = m.boundary_measure();
    out->diameter = m.diameter();
    out->mesh_size = m.mesh_size();
  });
}

rg_status rg_mesh_vertex(const rg_mesh* mesh, size_t vertex, double xy[2]) {
  return guarded([&] {
    need(mesh, "mesh");
    need(xy, "xy");
    const rg::Point& p = mesh->mesh->vertex(vertex_index(*mesh->mesh, vertex));
    xy[0] = p[0];
    xy[1] = p[1];
  });
}

rg_status rg_mesh_nearest_vertex(const rg_mesh* mesh, const double xy[2], size_t* out) {
  return guarded([&] {
    need(mesh, "mesh");
    need(xy, "xy");
    need(out, "out");
    *out = mesh->mesh->nearest_vertex(to_point(xy, mesh->mesh->dimension()));
  });
}

void rg_mesh_free(rg_mesh* mesh) { delete mesh; }

/* problems */

rg_status rg_problem_create(const rg_mesh* mesh, const char* coefficients, const char* theta, int m,
                            double lambda_tilde, int lumped_mass, rg_problem** out) {
  return guarded([&] {
    need(mesh, "mesh");
    need(coefficients, "coefficients");
    need(theta, "theta");
    need(out, "out");
    rg::require(m >= 1, rg::ErrorCode::invalid_argument, "number of components must be positive");
    const auto& msh = mesh->mesh;
    auto field = rg::coefficient_from_name(coefficients, m, msh->dimension());
    auto th = rg::theta_from_name(theta, m, *msh);
    *out = new rg_problem{rg::make_problem(msh, std::move(field), std::move(th), lambda_tilde, lumped_mass != 0)};
  });
}

rg_status rg_problem_ndof(const rg_problem* problem, size_t* out) {
  return guarded([&] {
    need(problem, "problem");
    need(out, "out");
    *out = problem->problem.ndof();
  });
}

rg_status rg_problem_components(const rg_problem* problem, int* out) {
  return guarded([&] {
    need(problem, "problem");
    need(out, "out");
    *out = problem->problem.m();
  });
}

rg_status rg_problem_write_matrices(const rg_problem* problem, double t, const char* mass_path,
                                    const char* stiffness_path, const char* robin_path) {
  return guarded([&] {
    need(problem, "problem");
    const rg::Forms forms(problem->problem);
    if (mass_path) rg::write_coordinate(forms.mass(), mass_path);
    if (stiffness_path) rg::write_coordinate(forms.stiffness_at(t), stiffness_path);
    if (robin_path) rg::write_coordinate(forms.robin_at(t), robin_path);
  });
}

rg_status rg_problem_validate(const rg_problem* problem, const double* t_samples, size_t n_samples, uint64_t seed,
                              char** json_out) {
  return guarded([&] {
    need(problem, "problem");
    need(json_out, "json_out");
    std::vector<double> ts = t_samples ? std::vector<double>(t_samples, t_samples + n_samples)
                                       : std::vector<double>{0.0};
    if (ts.empty()) ts.push_back(0.0);
    const auto& p = problem->problem;
    const auto ell = rg::validate_ellipticity(p.field, *p.mesh, ts, 64, seed);
    const auto th = rg::validate_theta(p.theta, *p.mesh, ts);
    const rg::Json j = {{"ellipticity", rg::to_json(ell)}, {"theta", rg::to_json(th)}, {"pass", ell.ok}};
    *json_out = dup_string(j.dump(2));
  });
}

void rg_problem_free(rg_problem* problem) { delete problem; }

rg_status rg_catalog(const char* which, char** out) {
  return guarded([&] {
    need(which, "which");
    need(out, "out");
    const std::string w = which;
    std::vector<std::string> names;
    if (w == "coefficients")
      names = rg::coefficient_catalog();
    else if (w == "theta")
      names = rg::theta_catalog();
    else
      rg::fail(rg::ErrorCode::unknown_name, "unknown catalog '" + w + "'");
    std::string text;
    for (const auto& n : names) text += n + "\n";
    *out = dup_string(text);
  });
}

/* coercivity */

rg_status rg_coercivity(const rg_problem* problem, const double* t_samples, size_t n_samples, double tol,
                        rg_coercivity_report* out) {
  return guarded([&] {
    need(problem, "problem");
    need(out, "out");
    std::vector<double> ts = t_samples ? std::vector<double>(t_samples, t_samples + n_samples)
                                       : std::vector<double>{0.0};
    if (ts.empty()) ts.push_back(0.0);
    rg::CoercivityOptions opts;
    if (tol > 0.0) opts.tol = tol;
    const auto r = rg::check_h1(problem->problem, ts, opts);
    out->theta0 = r.theta0;
    out->lambda_tilde = r.lambda_tilde;
    out->residual = r.residual;
    out->t_worst = r.t_worst;
    out->delta = r.delta;
    out->iterations = r.iterations;
    out->converged = r.converged ? 1 : 0;
    out->delta_ok = r.delta_ok ? 1 : 0;
  });
}

rg_status rg_coercivity_dense_spectrum(const rg_problem* problem, double t, double* out, size_t len) {
  return guarded([&] {
    need(problem, "problem");
    need(out, "out");
    const auto& p = problem->problem;
    rg::require(len >= p.ndof(), rg::ErrorCode::invalid_argument, "output buffer too small");
    const rg::Forms forms(p);
    const auto eig = rg::dense_generalized_eig(rg::Matrix(forms.mass()), rg::Matrix(forms.unit_stiffness()),
                                               rg::Matrix(forms.robin_at(t)), p.lambda_tilde);
    std::copy(eig.begin(), eig.end(), out);
  });
}

/* time stepping */

rg_status rg_initial_data(const rg_problem* problem, const char* spec, uint64_t seed, double* out, size_t len) {
  return guarded([&] {
    need(problem, "problem");
    need(spec, "spec");
    const auto& p = problem->problem;
    copy_out(rg::initial_from_name(spec, *p.mesh, p.m(), seed), out, len);
  });
}

rg_status rg_solve(const rg_problem* problem, const double* psi0, size_t len, const char* source,
                   const rg_grid* grid, rg_trajectory** out) {
  return guarded([&] {
    need(problem, "problem");
    need(out, "out");
    *out = new rg_trajectory{run_solve(problem->problem, psi0, len, source, grid, false)};
  });
}

rg_status rg_solve_adjoint(const rg_problem* problem, const double* psiT, size_t len, const char* source,
                           const rg_grid* grid, rg_trajectory** out) {
  return guarded([&] {
    need(problem, "problem");
    need(out, "out");
    *out = new rg_trajectory{run_solve(problem->problem, psiT, len, source, grid, true)};
  });
}

rg_status rg_trajectory_size(const rg_trajectory* traj, size_t* snapshots, size_t* ndof) {
  return guarded([&] {
    need(traj, "trajectory");
    if (snapshots) *snapshots = traj->traj.snapshots.size();
    if (ndof) *ndof = traj->traj.snapshots.empty() ? 0 : static_cast<size_t>(traj->traj.snapshots[0].size());
  });
}

rg_status rg_trajectory_time(const rg_trajectory* traj, size_t k, double* out) {
  return guarded([&] {
    need(traj, "trajectory");
    need(out, "out");
    rg::require(k < traj->traj.snapshots.size(), rg::ErrorCode::invalid_argument, "snapshot index out of range");
    *out = traj->traj.grid.time(k);
  });
}

rg_status rg_trajectory_snapshot(const rg_trajectory* traj, size_t k, double* out, size_t len) {
  return guarded([&] {
    need(traj, "trajectory");
    rg::require(k < traj->traj.snapshots.size(), rg::ErrorCode::invalid_argument, "snapshot index out of range");
    copy_out(traj->traj.snapshots[k], out, len);
  });
}

rg_status rg_trajectory_energy(const rg_trajectory* traj, size_t k, double out[3]) {
  return guarded([&] {
    need(traj, "trajectory");
    need(out, "out");
    rg::require(k < traj->traj.energy_log.size(), rg::ErrorCode::invalid_argument, "snapshot index out of range");
    const auto& e = traj->traj.energy_log[k];
    out[0] = e.mass;
    out[1] = e.gradient;
    out[2] = e.robin;
  });
}

rg_status rg_trajectory_tri_norm(const rg_trajectory* traj, double* out) {
  return guarded([&] {
    need(traj, "trajectory");
    need(out, "out");
    *out = rg::tri_norm(traj->traj);
  });
}

rg_status rg_trajectory_write(const rg_trajectory* traj, const char* csv_path, const char* energy_path) {
  return guarded([&] {
    need(traj, "trajectory");
    need(csv_path, "csv_path");
    rg::write_trajectory_csv(traj->traj, csv_path);
    if (energy_path) rg::write_energy_json(traj->traj, energy_path);
  });
}

rg_status rg_trajectory_check_decay(const rg_trajectory* traj, double theta0, double tol, char** json_out) {
  return guarded([&] {
    need(traj, "trajectory");
    need(json_out, "json_out");
    rg::Json j = rg::to_json(rg::check_decay_vs_theta0(traj->traj, theta0, tol));
    j["constants"]["theta0"] = theta0;
    *json_out = dup_string(j.dump(2));
  });
}

rg_status rg_trajectory_local_bound(const rg_trajectory* traj, const double x0[2], const double* radii,
                                    size_t n_radii, char** json_out) {
  return guarded([&] {
    need(traj, "trajectory");
    need(x0, "x0");
    need(radii, "radii");
    need(json_out, "json_out");
    const rg::Point c = to_point(x0, traj->traj.mesh->dimension());
    const std::vector<double> r(radii, radii + n_radii);
    *json_out = dup_string(rg::to_json(rg::local_boundedness_ladder(traj->traj, c, r)).dump(2));
  });
}

void rg_trajectory_free(rg_trajectory* traj) { delete traj; }

/* Green's functions */

rg_status rg_heat_kernel_column(const rg_problem* problem, size_t y_vertex, int column, const rg_grid* grid,
                                rg_trajectory** out) {
  return guarded([&] {
    need(problem, "problem");
    need(out, "out");
    const auto& p = problem->problem;
    rg::require(column >= 0 && column < p.m(), rg::ErrorCode::invalid_argument, "column out of range");
    auto col = rg::heat_kernel_column(p, vertex_index(*p.mesh, y_vertex), static_cast<rg::Index>(column),
                                      to_grid(grid));
    *out = new rg_trajectory{std::move(col.trajectory)};
  });
}

rg_status rg_averaged_green(const rg_problem* problem, const double y[2], double s, double epsilon, int column,
                            const rg_grid* grid, rg_trajectory** out) {
  return guarded([&] {
    need(problem, "problem");
    need(y, "y");
    need(out, "out");
    const auto& p = problem->problem;
    rg::require(column >= 0 && column < p.m(), rg::ErrorCode::invalid_argument, "column out of range");
    auto col = rg::averaged_green(p, {to_point(y, p.mesh->dimension()), s}, epsilon,
                                  static_cast<rg::Index>(column), to_grid(grid));
    *out = new rg_trajectory{std::move(col.trajectory)};
  });
}

rg_status rg_green_eval(const rg_problem* problem, const double x[2], double t, size_t y_vertex, double s,
                        const rg_grid* grid, double* out, size_t len) {
  return guarded([&] {
    need(problem, "problem");
    need(x, "x");
    const auto& p = problem->problem;
    const auto smp = rg::green_eval(p, to_point(x, p.mesh->dimension()), t, vertex_index(*p.mesh, y_vertex), s,
                                    to_grid(grid));
    copy_row_major(smp.value, out, len);
  });
}

rg_status rg_adjoint_green_eval(const rg_problem* problem, size_t x_vertex, double t, const double y[2], double s,
                                const rg_grid* grid, double* out, size_t len) {
  return guarded([&] {
    need(problem, "problem");
    need(y, "y");
    const auto& p = problem->problem;
    const auto smp = rg::adjoint_green_eval(p, vertex_index(*p.mesh, x_vertex), t,
                                            to_point(y, p.mesh->dimension()), s, to_grid(grid));
    copy_row_major(smp.value, out, len);
  });
}

rg_status rg_green_samples(const rg_problem* problem, size_t y_vertex, double s, double epsilon, int column,
                           const rg_grid* grid, size_t max_times, const char* samples_csv, const char* column_csv) {
  return guarded([&] {
    need(problem, "problem");
    need(samples_csv, "samples_csv");
    const auto& p = problem->problem;
    const rg::TimeGrid g = to_grid(grid);
    const rg::Index y = vertex_index(*p.mesh, y_vertex);
    rg::require(column >= 0 && column < p.m(), rg::ErrorCode::invalid_argument, "column out of range");
    rg::require(epsilon > 0.0 || s == g.t0, rg::ErrorCode::invalid_argument,
                "delta columns start at the window start");
    std::vector<rg::GreenColumn> cols(static_cast<std::size_t>(p.m()));
    rg::parallel_for(cols.size(), [&](std::size_t k) {
      if (epsilon > 0.0) {
        cols[k] = rg::averaged_green(p, {p.mesh->vertex(y), s}, epsilon, k, g);
        cols[k].source_vertex = y;
      } else {
        cols[k] = rg::heat_kernel_column(p, y, k, g);
      }
    });
    const auto samples = rg::column_vertex_samples(cols, y, s, max_times == 0 ? 32 : max_times);
    rg::write_samples_csv(samples, p.mesh->dimension(), samples_csv);
    if (column_csv) rg::write_trajectory_csv(cols[static_cast<std::size_t>(column)].trajectory, column_csv);
  });
}

rg_status rg_elliptic_green(const rg_problem* problem, size_t y_vertex, double theta0, double tol, double* out,
                            size_t len, rg_elliptic_info* info) {
  return guarded([&] {
    need(problem, "problem");
    const auto& p = problem->problem;
    rg::EllipticOptions opts;
    if (tol > 0.0) opts.tol = tol;
    const auto g = rg::elliptic_green(p, vertex_index(*p.mesh, y_vertex), theta0, opts);
    copy_out(g.values, out, len);
    if (info) {
      info->truncation_time = g.truncation_time;
      info->tail_bound = g.tail_bound;
      info->steps = g.steps;
    }
  });
}

rg_status rg_steady_green(const rg_problem* problem, size_t y_vertex, double* out, size_t len) {
  return guarded([&] {
    need(problem, "problem");
    const auto& p = problem->problem;
    copy_out(rg::steady_green(p, vertex_index(*p.mesh, y_vertex)), out, len);
  });
}

rg_status rg_write_nodal_csv(const rg_problem* problem, const double* values, size_t len, const char* path) {
  return guarded([&] {
    need(problem, "problem");
    need(values, "values");
    need(path, "path");
    const auto& p = problem->problem;
    rg::require(len == p.ndof() * static_cast<size_t>(p.m()), rg::ErrorCode::invalid_argument,
                "expected ndof x m values");
    const rg::Matrix G = Eigen::Map<const rg::Matrix>(values, static_cast<Eigen::Index>(p.ndof()), p.m());
    rg::write_nodal_csv(*p.mesh, G, path);
  });
}

/* verification */

rg_status rg_verify_gaussian(const char* samples_csv, double diam, double slack, double tau_min, double tau_max,
                             rg_gaussian_fit* out) {
  return guarded([&] {
    need(out, "out");
    const auto fit = gaussian(samples_csv, diam, slack, tau_min, tau_max);
    out->C = fit.C;
    out->C_fit = fit.C_fit;
    out->kappa = fit.kappa;
    out->r_squared = fit.r_squared;
    out->slack = fit.slack;
    out->violations = fit.violations;
    out->n_samples = fit.n_samples;
    out->pass = fit.pass ? 1 : 0;
  });
}

rg_status rg_verify_gaussian_json(const char* samples_csv, double diam, double slack, double tau_min,
                                  double tau_max, char** json_out) {
  return guarded([&] {
    need(json_out, "json_out");
    *json_out = dup_string(rg::to_json(gaussian(samples_csv, diam, slack, tau_min, tau_max)).dump(2));
  });
}

rg_status rg_verify_offdiag_json(const char* samples_csv, double h, double max_distance, double slack,
                                 char** json_out) {
  return guarded([&] {
    need(json_out, "json_out");
    int dim = 1;
    const auto samples = filtered_samples(samples_csv, 0.0, 0.0, &dim);
    const auto r = rg::check_offdiagonal_decay(samples, dim, h, max_distance, slack > 0.0 ? slack : 2.0);
    *json_out = dup_string(rg::to_json(r).dump(2));
  });
}

rg_status rg_verify_elliptic_json(const rg_problem* problem, const double* values, size_t len, size_t y_vertex,
                                  double slack, char** json_out) {
  return guarded([&] {
    need(problem, "problem");
    need(values, "values");
    need(json_out, "json_out");
    const auto& p = problem->problem;
    rg::require(len == p.ndof() * static_cast<size_t>(p.m()), rg::ErrorCode::invalid_argument,
                "expected ndof x m values");
    const rg::Matrix G = Eigen::Map<const rg::Matrix>(values, static_cast<Eigen::Index>(p.ndof()), p.m());
    const auto r = rg::check_elliptic_bounds(G, *p.mesh, vertex_index(*p.mesh, y_vertex), slack > 0.0 ? slack : 2.0);
    *json_out = dup_string(rg::to_json(r).dump(2));
  });
}

/* oracles */

rg_status rg_oracle_series(double theta_left, double theta_right, double x, double y, double t, double* value,
                           size_t* terms, double* error_bound) {
  return guarded([&] {
    need(value, "value");
    const auto v = rg::series_heat_kernel_1d(theta_left, theta_right, x, y, t);
    *value = v.value;
    if (terms) *terms = v.terms;
    if (error_bound) *error_bound = v.tail_bound + v.roundoff_bound;
  });
}

rg_status rg_oracle_series_samples(double theta_left, double theta_right, const double* xs, size_t nx, double y,
                                   const double* ts, size_t nt, const char* path) {
  return guarded([&] {
    need(xs, "xs");
    need(ts, "ts");
    need(path, "path");
    const rg::RobinEigenbasis1D basis(theta_left, theta_right);
    std::vector<rg::KernelSample> samples;
    for (size_t j = 0; j < nt; ++j)
      for (size_t i = 0; i < nx; ++i) samples.push_back(rg::series_sample(basis, xs[i], ts[j], y, 0.0));
    rg::write_samples_csv(samples, 1, path);
  });
}

rg_status rg_oracle_fd_compare(const rg_problem* problem, size_t fine_n, const rg_grid* grid, const char* initial,
                               double* max_rel_diff) {
  return guarded([&] {
    need(problem, "problem");
    need(initial, "initial");
    need(max_rel_diff, "max_rel_diff");
    const auto& p = problem->problem;
    const rg::TimeGrid g = to_grid(grid);
    const auto psi = scalar_initial(initial);
    const auto fd = rg::dense_reference_solve(p, fine_n, g, psi);
    const rg::Mesh& mesh = *p.mesh;
    rg::Vector psi0(static_cast<Eigen::Index>(mesh.num_vertices()));
    for (rg::Index v = 0; v < mesh.num_vertices(); ++v) psi0[static_cast<Eigen::Index>(v)] = psi(mesh.vertex(v)[0]);
    const auto fem = rg::solve_forward(p, psi0, {}, g);
    double diff = 0.0, scale = 0.0;
    for (size_t k = 0; k < fem.snapshots.size(); ++k)
      for (rg::Index v = 0; v < mesh.num_vertices(); ++v) {
        const double ref = fd.at(k, mesh.vertex(v)[0]);
        diff = std::max(diff, std::abs(fem.snapshots[k][static_cast<Eigen::Index>(v)] - ref));
        scale = std::max(scale, std::abs(ref));
      }
    *max_rel_diff = diff / std::max(scale, 1e-300);
  });
}

/* experiment runner */

rg_status rg_run_config(const char* path, char** manifest_path) {
  return guarded([&] {
    need(path, "path");
    const auto r = rg::run_config_file(path);
    if (manifest_path) *manifest_path = dup_string(r.manifest_path);
  });
}

}  // extern "C"
