// Command-line front end over the robingreen C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "robingreen/robingreen.h"

namespace {

using Json = nlohmann::ordered_json;

struct Failure : std::runtime_error {
  rg_status status;
  Failure(rg_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

void check(rg_status s) {
  if (s != RG_OK) throw Failure(s, std::string(rg_status_name(s)) + ": " + rg_last_error());
}

std::string take(char* s) {
  std::string out = s ? s : "";
  rg_string_free(s);
  return out;
}

// Relative output paths are placed under RG_OUTPUT_ROOT when it is set.
std::string out_path(const std::string& p) {
  if (p.empty() || p == "-") return p;
  const char* root = std::getenv("RG_OUTPUT_ROOT");
  std::filesystem::path path(p);
  if (root && *root && path.is_relative()) path = std::filesystem::path(root) / path;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  return path.string();
}

void emit(const Json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const std::string p = out_path(path);
  FILE* f = std::fopen(p.c_str(), "wb");
  if (!f) throw Failure(RG_IO, "cannot write '" + p + "'");
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

// "name(a, b, ...)" -> name and numeric arguments.
std::pair<std::string, std::vector<double>> split_call(const std::string& spec) {
  const auto open = spec.find('(');
  if (open == std::string::npos) return {spec, {}};
  if (spec.back() != ')') throw Failure(RG_INVALID_ARGUMENT, "malformed '" + spec + "'");
  std::vector<double> args;
  std::stringstream ss(spec.substr(open + 1, spec.size() - open - 2));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      args.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw Failure(RG_INVALID_ARGUMENT, "non-numeric argument in '" + spec + "'");
    }
  }
  return {spec.substr(0, open), args};
}

struct MeshHandle {
  rg_mesh* p = nullptr;
  ~MeshHandle() { rg_mesh_free(p); }
};
struct ProblemHandle {
  rg_problem* p = nullptr;
  ~ProblemHandle() { rg_problem_free(p); }
};
struct TrajectoryHandle {
  rg_trajectory* p = nullptr;
  ~TrajectoryHandle() { rg_trajectory_free(p); }
};

struct MeshOptions {
  std::string domain = "interval(0,1,64)";
  std::string file;
  int refine = 0;

  void add(CLI::App* app) {
    app->add_option("--domain", domain, "interval(a,b,cells) | rectangle(w,h,nx,ny) | lshape(n)");
    app->add_option("--mesh", file, "mesh JSON file (overrides --domain)");
    app->add_option("--refine", refine, "uniform refinements")->check(CLI::NonNegativeNumber);
  }

  Json echo() const {
    Json j;
    if (file.empty())
      j["domain"] = domain;
    else
      j["mesh"] = file;
    j["refine"] = refine;
    return j;
  }

  void build(MeshHandle& out) const {
    rg_mesh* m = nullptr;
    if (!file.empty()) {
      check(rg_mesh_read_json(file.c_str(), &m));
    } else {
      const auto [name, a] = split_call(domain);
      auto count = [&](std::size_t i) {
        if (a[i] < 1 || a[i] != static_cast<double>(static_cast<std::size_t>(a[i])))
          throw Failure(RG_INVALID_ARGUMENT, "cell counts must be positive integers");
        return static_cast<std::size_t>(a[i]);
      };
      if (name == "interval" && a.size() == 3)
        check(rg_mesh_interval(a[0], a[1], count(2), &m));
      else if (name == "rectangle" && a.size() == 4)
        check(rg_mesh_rectangle(a[0], a[1], count(2), count(3), &m));
      else if (name == "lshape" && a.size() == 1)
        check(rg_mesh_lshape(count(0), &m));
      else
        throw Failure(RG_UNKNOWN_NAME, "unknown domain '" + domain + "'");
    }
    for (int i = 0; i < refine; ++i) {
      rg_mesh* r = nullptr;
      const rg_status s = rg_mesh_refine(m, &r);
      rg_mesh_free(m);
      check(s);
      m = r;
    }
    out.p = m;
  }
};

struct ProblemOptions {
  MeshOptions mesh;
  std::string coefficients = "laplace";
  std::string theta = "theta_const(1)";
  int m = 1;
  double lambda_tilde = 0.0;
  bool lumped = false;

  void add(CLI::App* app) {
    mesh.add(app);
    app->add_option("--coefficients", coefficients, "coefficient catalog name");
    app->add_option("--theta", theta, "boundary operator catalog name");
    app->add_option("--m", m, "number of components")->check(CLI::PositiveNumber);
    app->add_option("--lambda-tilde", lambda_tilde, "gradient weight (<= 0: half the ellipticity constant)");
    app->add_flag("--lumped", lumped, "row-sum lumped mass");
  }

  Json echo() const {
    Json j = mesh.echo();
    j["coefficients"] = coefficients;
    j["theta"] = theta;
    j["m"] = m;
    j["lambda_tilde"] = lambda_tilde;
    j["lumped_mass"] = lumped;
    return j;
  }

  void build(MeshHandle& mh, ProblemHandle& ph) const {
    mesh.build(mh);
    check(rg_problem_create(mh.p, coefficients.c_str(), theta.c_str(), m, lambda_tilde, lumped ? 1 : 0, &ph.p));
  }
};

struct GridOptions {
  double t0 = 0.0;
  double t1 = 0.1;
  std::size_t steps = 100;
  std::string scheme = "implicit_euler";

  void add(CLI::App* app) {
    app->add_option("--t0", t0, "window start");
    app->add_option("--t1", t1, "window end");
    app->add_option("--steps", steps, "time steps")->check(CLI::PositiveNumber);
    app->add_option("--scheme", scheme, "implicit_euler | crank_nicolson")
        ->check(CLI::IsMember({"implicit_euler", "ie", "crank_nicolson", "cn"}));
  }

  rg_grid grid() const {
    const bool cn = scheme == "crank_nicolson" || scheme == "cn";
    return rg_grid{t0, t1, steps, cn ? RG_CRANK_NICOLSON : RG_IMPLICIT_EULER};
  }

  Json echo() const { return {{"t0", t0}, {"t1", t1}, {"steps", steps}, {"scheme", scheme}}; }
};

std::vector<double> nodal(const rg_problem* p, std::size_t cols) {
  std::size_t ndof = 0;
  check(rg_problem_ndof(p, &ndof));
  return std::vector<double>(ndof * cols);
}

double compute_theta0(const rg_problem* p, double t0) {
  rg_coercivity_report rep{};
  check(rg_coercivity(p, &t0, 1, 0.0, &rep));
  return rep.theta0;
}

std::size_t pick_vertex(const rg_mesh* m, long requested) {
  if (requested >= 0) return static_cast<std::size_t>(requested);
  rg_mesh_info info{};
  check(rg_mesh_get_info(m, &info));
  // Default: the vertex closest to the centroid of the vertex cloud.
  double c[2] = {0.0, 0.0};
  for (std::size_t v = 0; v < info.vertices; ++v) {
    double xy[2];
    check(rg_mesh_vertex(m, v, xy));
    c[0] += xy[0] / static_cast<double>(info.vertices);
    c[1] += xy[1] / static_cast<double>(info.vertices);
  }
  std::size_t out = 0;
  check(rg_mesh_nearest_vertex(m, c, &out));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Green's functions and heat kernels for Robin problems"};
  app.require_subcommand(1);
  unsigned jobs = 0;
  app.add_option("--jobs", jobs, "worker thread cap (0 = hardware count)");

  // mesh
  MeshOptions mesh_opts;
  std::string mesh_out;
  auto* mesh_cmd = app.add_subcommand("mesh", "build a mesh and write it as JSON");
  mesh_opts.add(mesh_cmd);
  mesh_cmd->add_option("--out", mesh_out, "mesh JSON output");

  // coercivity
  ProblemOptions co_prob;
  std::vector<double> co_times{0.0};
  double co_tol = 0.0;
  bool co_dense = false;
  std::string co_out;
  auto* co_cmd = app.add_subcommand("coercivity", "estimate theta0 for a catalog problem");
  co_prob.add(co_cmd);
  co_cmd->add_option("--times", co_times, "time samples");
  co_cmd->add_option("--tol", co_tol, "iteration tolerance (<= 0: default)");
  co_cmd->add_flag("--dense", co_dense, "also report the smallest eigenvalue of the dense pencil");
  co_cmd->add_option("--out", co_out, "report JSON (default stdout)");

  // solve
  ProblemOptions so_prob;
  GridOptions so_grid;
  std::string so_initial = "constant(1)", so_source = "none", so_out = "trajectory.csv", so_energy;
  std::uint64_t so_seed = 0;
  bool so_adjoint = false;
  auto* so_cmd = app.add_subcommand("solve", "time-dependent solve");
  so_prob.add(so_cmd);
  so_grid.add(so_cmd);
  so_cmd->add_option("--initial", so_initial, "zero | constant(c) | bump(x0,[x1,]w) | random");
  so_cmd->add_option("--source", so_source, "none | constant(c) | pulse(x0,[x1,]w,t_on,t_off)");
  so_cmd->add_option("--seed", so_seed, "seed for random initial data");
  so_cmd->add_flag("--adjoint", so_adjoint, "backward adjoint solve from terminal data");
  so_cmd->add_option("--out", so_out, "trajectory CSV");
  so_cmd->add_option("--energy", so_energy, "energy JSON sidecar");

  // green
  ProblemOptions gr_prob;
  GridOptions gr_grid;
  long gr_vertex = -1;
  int gr_column = 0;
  double gr_eps = 0.0, gr_s = 0.0;
  std::size_t gr_max_times = 32;
  std::string gr_out = "green_column.csv", gr_samples;
  auto* gr_cmd = app.add_subcommand("green", "Green's function columns and kernel samples");
  gr_prob.add(gr_cmd);
  gr_grid.add(gr_cmd);
  gr_cmd->add_option("--source-vertex", gr_vertex, "source vertex (default: central vertex)");
  gr_cmd->add_option("--source-time", gr_s, "source time (averaged columns)");
  gr_cmd->add_option("--epsilon", gr_eps, "averaging radius (0: discrete delta)");
  gr_cmd->add_option("--column", gr_column, "column written to --out");
  gr_cmd->add_option("--max-times", gr_max_times, "snapshot times sampled");
  gr_cmd->add_option("--out", gr_out, "column trajectory CSV");
  gr_cmd->add_option("--samples", gr_samples, "kernel sample CSV");

  // elliptic-green
  ProblemOptions el_prob;
  long el_vertex = -1;
  double el_theta0 = 0.0, el_tol = 0.0, el_slack = 2.0;
  std::string el_out = "elliptic_green.csv", el_report;
  auto* el_cmd = app.add_subcommand("elliptic-green", "time-integrated heat kernel");
  el_prob.add(el_cmd);
  el_cmd->add_option("--source-vertex", el_vertex, "source vertex (default: central vertex)");
  el_cmd->add_option("--theta0", el_theta0, "coercivity constant (<= 0: estimated)");
  el_cmd->add_option("--tol", el_tol, "truncation tolerance (<= 0: default)");
  el_cmd->add_option("--slack", el_slack, "bound slack");
  el_cmd->add_option("--out", el_out, "nodal CSV");
  el_cmd->add_option("--report", el_report, "report JSON (default stdout)");

  // verify
  auto* ve_cmd = app.add_subcommand("verify", "check kernel samples against bounds");
  ve_cmd->require_subcommand(1);
  std::string vg_samples, vg_out;
  double vg_diam = 1.0, vg_slack = 2.0, vg_tmin = 0.0, vg_tmax = 0.0;
  auto* vg_cmd = ve_cmd->add_subcommand("gaussian", "Gaussian envelope fit");
  vg_cmd->add_option("--samples", vg_samples, "sample CSV")->required();
  vg_cmd->add_option("--diam", vg_diam, "domain diameter");
  vg_cmd->add_option("--slack", vg_slack, "envelope slack");
  vg_cmd->add_option("--tau-min", vg_tmin, "smallest t - s used");
  vg_cmd->add_option("--tau-max", vg_tmax, "largest t - s used (<= 0: no limit)");
  vg_cmd->add_option("--out", vg_out, "report JSON (default stdout)");
  std::string vo_samples, vo_out;
  double vo_h = 0.0, vo_maxd = 0.0, vo_slack = 2.0;
  auto* vo_cmd = ve_cmd->add_subcommand("offdiag", "power-law off-diagonal decay");
  vo_cmd->add_option("--samples", vo_samples, "sample CSV")->required();
  vo_cmd->add_option("--mesh-size", vo_h, "mesh size h")->required();
  vo_cmd->add_option("--max-distance", vo_maxd, "largest parabolic distance used")->required();
  vo_cmd->add_option("--slack", vo_slack, "envelope slack");
  vo_cmd->add_option("--out", vo_out, "report JSON (default stdout)");

  // oracle
  auto* or_cmd = app.add_subcommand("oracle", "independent reference solutions");
  or_cmd->require_subcommand(1);
  std::vector<double> os_theta{1.0, 1.0}, os_times{1e-3}, os_xs;
  double os_y = 0.5;
  std::size_t os_nx = 33;
  std::string os_out = "oracle_samples.csv";
  auto* os_cmd = or_cmd->add_subcommand("series", "eigenfunction series heat kernel on (0,1)");
  os_cmd->add_option("--theta", os_theta, "left and right Robin coefficients")->expected(2);
  os_cmd->add_option("--t", os_times, "times");
  os_cmd->add_option("--y", os_y, "source point");
  os_cmd->add_option("--x", os_xs, "evaluation points (default: uniform grid)");
  os_cmd->add_option("--nx", os_nx, "uniform evaluation points when --x is absent")->check(CLI::Range(2, 100000));
  os_cmd->add_option("--out", os_out, "sample CSV");
  ProblemOptions of_prob;
  GridOptions of_grid;
  std::size_t of_fine = 512;
  std::string of_initial = "bump(0.5,0.1)", of_out;
  auto* of_cmd = or_cmd->add_subcommand("fd", "finite-difference comparison for scalar 1D problems");
  of_prob.add(of_cmd);
  of_grid.add(of_cmd);
  of_cmd->add_option("--fine-n", of_fine, "finite-difference cells");
  of_cmd->add_option("--initial", of_initial, "constant(c) | bump(x0,w)");
  of_cmd->add_option("--out", of_out, "report JSON (default stdout)");

  // run
  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "run an experiment configuration");
  run_cmd->add_option("config", run_config, "configuration JSON")->required();

  CLI11_PARSE(app, argc, argv);
  rg_set_max_jobs(jobs);

  try {
    if (*mesh_cmd) {
      MeshHandle mh;
      mesh_opts.build(mh);
      rg_mesh_info info{};
      check(rg_mesh_get_info(mh.p, &info));
      if (!mesh_out.empty()) check(rg_mesh_write_json(mh.p, out_path(mesh_out).c_str()));
      emit({{"dimension", info.dimension},
            {"vertices", info.vertices},
            {"cells", info.cells},
            {"boundary_facets", info.boundary_facets},
            {"measure", info.measure},
            {"boundary_measure", info.boundary_measure},
            {"diameter", info.diameter},
            {"mesh_size", info.mesh_size},
            {"config_echo", mesh_opts.echo()}},
           "");
    } else if (*co_cmd) {
      MeshHandle mh;
      ProblemHandle ph;
      co_prob.build(mh, ph);
      rg_coercivity_report rep{};
      check(rg_coercivity(ph.p, co_times.data(), co_times.size(), co_tol, &rep));
      Json j = {{"theta0", rep.theta0},       {"lambda_tilde", rep.lambda_tilde}, {"converged", rep.converged != 0},
                {"iterations", rep.iterations}, {"t_worst", rep.t_worst},         {"residual", rep.residual},
                {"delta", rep.delta},           {"delta_ok", rep.delta_ok != 0}};
      if (co_dense) {
        auto spec = nodal(ph.p, 1);
        check(rg_coercivity_dense_spectrum(ph.p, rep.t_worst, spec.data(), spec.size()));
        j["dense_theta0"] = spec.front();
      }
      Json echo = co_prob.echo();
      echo["times"] = co_times;
      echo["tol"] = co_tol;
      j["config_echo"] = echo;
      emit(j, co_out);
    } else if (*so_cmd) {
      MeshHandle mh;
      ProblemHandle ph;
      so_prob.build(mh, ph);
      auto psi = nodal(ph.p, 1);
      check(rg_initial_data(ph.p, so_initial.c_str(), so_seed, psi.data(), psi.size()));
      const rg_grid g = so_grid.grid();
      TrajectoryHandle th;
      if (so_adjoint)
        check(rg_solve_adjoint(ph.p, psi.data(), psi.size(), so_source.c_str(), &g, &th.p));
      else
        check(rg_solve(ph.p, psi.data(), psi.size(), so_source.c_str(), &g, &th.p));
      const std::string energy = so_energy.empty() ? std::string() : out_path(so_energy);
      check(rg_trajectory_write(th.p, out_path(so_out).c_str(), energy.empty() ? nullptr : energy.c_str()));
      double tri = 0.0;
      check(rg_trajectory_tri_norm(th.p, &tri));
      Json echo = so_prob.echo();
      echo["time"] = so_grid.echo();
      echo["initial"] = so_initial;
      echo["source"] = so_source;
      echo["seed"] = so_seed;
      echo["adjoint"] = so_adjoint;
      emit({{"tri_norm", tri}, {"trajectory", so_out}, {"config_echo", echo}}, "");
    } else if (*gr_cmd) {
      MeshHandle mh;
      ProblemHandle ph;
      gr_prob.build(mh, ph);
      const std::size_t y = pick_vertex(mh.p, gr_vertex);
      const rg_grid g = gr_grid.grid();
      const double s = gr_eps > 0.0 ? gr_s : g.t0;
      const std::string samples = out_path(gr_samples.empty() ? "green_samples.csv" : gr_samples);
      check(rg_green_samples(ph.p, y, s, gr_eps, gr_column, &g, gr_max_times, samples.c_str(),
                             out_path(gr_out).c_str()));
      Json echo = gr_prob.echo();
      echo["time"] = gr_grid.echo();
      echo["source_vertex"] = y;
      echo["source_time"] = s;
      echo["epsilon"] = gr_eps;
      echo["column"] = gr_column;
      echo["max_times"] = gr_max_times;
      emit({{"column_csv", gr_out}, {"samples_csv", samples}, {"config_echo", echo}}, "");
    } else if (*el_cmd) {
      MeshHandle mh;
      ProblemHandle ph;
      el_prob.build(mh, ph);
      const std::size_t y = pick_vertex(mh.p, el_vertex);
      const double theta0 = el_theta0 > 0.0 ? el_theta0 : compute_theta0(ph.p, 0.0);
      int m = 1;
      check(rg_problem_components(ph.p, &m));
      auto values = nodal(ph.p, static_cast<std::size_t>(m));
      auto steady = values;
      rg_elliptic_info info{};
      check(rg_elliptic_green(ph.p, y, theta0, el_tol, values.data(), values.size(), &info));
      check(rg_steady_green(ph.p, y, steady.data(), steady.size()));
      check(rg_write_nodal_csv(ph.p, values.data(), values.size(), out_path(el_out).c_str()));
      double diff = 0.0, norm = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        diff += (values[i] - steady[i]) * (values[i] - steady[i]);
        norm += steady[i] * steady[i];
      }
      char* bounds = nullptr;
      check(rg_verify_elliptic_json(ph.p, values.data(), values.size(), y, el_slack, &bounds));
      Json echo = el_prob.echo();
      echo["source_vertex"] = y;
      echo["theta0"] = el_theta0;
      echo["tol"] = el_tol;
      echo["slack"] = el_slack;
      emit({{"theta0", theta0},
            {"truncation_time", info.truncation_time},
            {"tail_bound", info.tail_bound},
            {"steps", info.steps},
            {"steady_relative_difference", norm > 0.0 ? std::sqrt(diff / norm) : 0.0},
            {"bounds", Json::parse(take(bounds))},
            {"config_echo", echo}},
           el_report);
    } else if (*vg_cmd) {
      char* out = nullptr;
      check(rg_verify_gaussian_json(vg_samples.c_str(), vg_diam, vg_slack, vg_tmin, vg_tmax, &out));
      Json j = Json::parse(take(out));
      j["config_echo"] = {{"samples", vg_samples}, {"diam", vg_diam},       {"slack", vg_slack},
                          {"tau_min", vg_tmin},    {"tau_max", vg_tmax}};
      emit(j, vg_out);
    } else if (*vo_cmd) {
      char* out = nullptr;
      check(rg_verify_offdiag_json(vo_samples.c_str(), vo_h, vo_maxd, vo_slack, &out));
      Json j = Json::parse(take(out));
      j["config_echo"] = {{"samples", vo_samples}, {"h", vo_h}, {"max_distance", vo_maxd}, {"slack", vo_slack}};
      emit(j, vo_out);
    } else if (*os_cmd) {
      std::vector<double> xs = os_xs;
      if (xs.empty())
        for (std::size_t i = 0; i < os_nx; ++i) xs.push_back(static_cast<double>(i) / static_cast<double>(os_nx - 1));
      const std::string path = out_path(os_out);
      check(rg_oracle_series_samples(os_theta[0], os_theta[1], xs.data(), xs.size(), os_y, os_times.data(),
                                     os_times.size(), path.c_str()));
      emit({{"samples_csv", path},
            {"n_samples", xs.size() * os_times.size()},
            {"config_echo", {{"theta", os_theta}, {"t", os_times}, {"y", os_y}, {"x", xs}}}},
           "");
    } else if (*of_cmd) {
      MeshHandle mh;
      ProblemHandle ph;
      of_prob.build(mh, ph);
      const rg_grid g = of_grid.grid();
      double rel = 0.0;
      check(rg_oracle_fd_compare(ph.p, of_fine, &g, of_initial.c_str(), &rel));
      Json echo = of_prob.echo();
      echo["time"] = of_grid.echo();
      echo["fine_n"] = of_fine;
      echo["initial"] = of_initial;
      emit({{"max_relative_difference", rel}, {"config_echo", echo}}, of_out);
    } else if (*run_cmd) {
      char* manifest = nullptr;
      check(rg_run_config(run_config.c_str(), &manifest));
      std::cout << take(manifest) << "\n";
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what() << "\n";
    return static_cast<int>(f.status) + 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
