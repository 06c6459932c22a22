#include "pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>

#include "data.hpp"
#include "error.hpp"
#include "green.hpp"
#include "oracle.hpp"
#include "parallel.hpp"

namespace fs = std::filesystem;

namespace rg {

namespace {

const std::set<std::string> kTopKeys = {"domain",       "refine", "m",    "coefficients", "theta",  "lambda",
                                        "lambda_tilde", "lumped_mass", "time", "seed",    "output", "jobs",
                                        "pipeline"};

const std::map<std::string, std::set<std::string>> kStageKeys = {
    {"mesh", {}},
    {"validate", {"t_samples", "directions"}},
    {"coercivity", {"t_samples", "tol"}},
    {"assemble", {}},
    {"solve", {"initial", "source"}},
    {"green", {"source_vertex", "column", "epsilon", "source_time", "max_times"}},
    {"elliptic_green", {"source_vertex", "tol"}},
    {"oracle", {}},
    {"verify",
     {"checks", "slack", "kappa_min", "kappa_max", "r_squared_min", "tau_min", "tau_max", "decay_tol", "x0",
      "local_factor"}},
};

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  require(obj.is_object(), ErrorCode::invalid_argument, where + " must be an object");
  for (const auto& [key, value] : obj.items())
    require(allowed.count(key) > 0, ErrorCode::invalid_argument, "unknown key '" + key + "' in " + where);
}

template <class T>
T get_or(const Json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, "bad value for '" + key + "': " + e.what());
  }
}

template <class T>
T get_required(const Json& obj, const std::string& key, const std::string& where) {
  require(obj.contains(key), ErrorCode::invalid_argument, "missing key '" + key + "' in " + where);
  return get_or<T>(obj, key, T{});
}

Mesh build_domain(const Json& d, const fs::path& base) {
  const auto kind = get_required<std::string>(d, "kind", "domain");
  if (kind == "interval") {
    check_keys(d, {"kind", "a", "b", "cells"}, "domain");
    return build_interval_mesh(get_or(d, "a", 0.0), get_or(d, "b", 1.0),
                               get_required<std::size_t>(d, "cells", "domain"));
  }
  if (kind == "rectangle") {
    check_keys(d, {"kind", "width", "height", "nx", "ny"}, "domain");
    return build_rectangle_mesh(get_or(d, "width", 1.0), get_or(d, "height", 1.0),
                                get_required<std::size_t>(d, "nx", "domain"),
                                get_required<std::size_t>(d, "ny", "domain"));
  }
  if (kind == "lshape") {
    check_keys(d, {"kind", "n"}, "domain");
    return build_lshape_mesh(get_required<std::size_t>(d, "n", "domain"));
  }
  if (kind == "file") {
    check_keys(d, {"kind", "path"}, "domain");
    fs::path p = get_required<std::string>(d, "path", "domain");
    if (p.is_relative()) p = base / p;
    return mesh_from_json(read_text(p.string()));
  }
  fail(ErrorCode::unknown_name, "unknown domain kind '" + kind + "'");
}

struct Context {
  Json config;
  fs::path base;
  fs::path out;
  std::shared_ptr<const Mesh> mesh;
  Problem problem;
  TimeGrid grid;
  std::uint64_t seed = 0;
  std::vector<std::string> files;

  std::optional<CoercivityReport> coercivity;
  std::optional<Trajectory> solution;
  bool solution_unforced = false;
  std::vector<KernelSample> green_samples;
  Index green_vertex = 0;
  double green_time = 0.0;
  std::optional<EllipticGreen> elliptic;
  std::vector<KernelSample> oracle_samples;

  Json echo(const Json& stage) const {
    Json e;
    for (const char* k : {"domain", "refine", "m", "coefficients", "theta", "lambda", "lambda_tilde", "lumped_mass",
                          "time", "seed"})
      if (config.contains(k)) e[k] = config[k];
    e["stage"] = stage;
    return e;
  }

  std::string path(const std::string& name) const { return (out / name).string(); }

  void record(const std::string& name) { files.push_back(name); }

  void emit_json(const std::string& name, Json body, const Json& stage) {
    body["config_echo"] = echo(stage);
    write_json(path(name), body);
    record(name);
  }
};

Index pick_vertex(const Context& ctx, const Json& opts) {
  const long v = get_or<long>(opts, "source_vertex", -1);
  if (v < 0) return central_vertex(*ctx.mesh);
  require(static_cast<std::size_t>(v) < ctx.mesh->num_vertices(), ErrorCode::invalid_argument,
          "source_vertex out of range");
  return static_cast<Index>(v);
}

std::vector<double> sample_times(const Context& ctx, const Json& opts) {
  const std::size_t n = get_or<std::size_t>(opts, "t_samples", ctx.problem.time_independent() ? 1 : 5);
  require(n >= 1, ErrorCode::invalid_argument, "t_samples must be at least 1");
  std::vector<double> ts;
  for (std::size_t i = 0; i < n; ++i)
    ts.push_back(n == 1 ? ctx.grid.t0 : ctx.grid.t0 + (ctx.grid.t1 - ctx.grid.t0) * static_cast<double>(i) / (n - 1));
  return ts;
}

void stage_mesh(Context& ctx, const Json& stage) {
  write_text(ctx.path("mesh.json"), mesh_to_json(*ctx.mesh));
  ctx.record("mesh.json");
  ctx.emit_json("mesh_report.json",
                {{"dimension", ctx.mesh->dimension()},
                 {"vertices", ctx.mesh->num_vertices()},
                 {"cells", ctx.mesh->num_cells()},
                 {"boundary_facets", ctx.mesh->num_facets()},
                 {"measure", ctx.mesh->measure()},
                 {"diameter", ctx.mesh->diameter()},
                 {"mesh_size", ctx.mesh->mesh_size()}},
                stage);
}

void stage_validate(Context& ctx, const Json& stage, const Json& opts) {
  const auto ts = sample_times(ctx, opts);
  const int dirs = get_or(opts, "directions", 64);
  const auto ell = validate_ellipticity(ctx.problem.field, *ctx.mesh, ts, dirs, ctx.seed);
  const auto th = validate_theta(ctx.problem.theta, *ctx.mesh, ts);
  ctx.emit_json("validate.json", {{"ellipticity", to_json(ell)}, {"theta", to_json(th)}, {"pass", ell.ok}}, stage);
  require(ell.ok, ErrorCode::precondition,
          "ellipticity check failed: sampled lower bound " + format_double(ell.lambda_lower) + " below claimed " +
              format_double(ctx.problem.field.lambda));
}

void stage_coercivity(Context& ctx, const Json& stage, const Json& opts) {
  CoercivityOptions co;
  co.tol = get_or(opts, "tol", co.tol);
  co.seed = ctx.seed;
  const auto rep = check_h1(ctx.problem, sample_times(ctx, opts), co);
  ctx.coercivity = rep;
  ctx.emit_json("coercivity.json", to_json(rep), stage);
}

void stage_assemble(Context& ctx, const Json& stage) {
  Forms forms(ctx.problem);
  write_coordinate(forms.mass(), ctx.path("mass.txt"));
  write_coordinate(forms.stiffness_at(ctx.grid.t0), ctx.path("stiffness.txt"));
  write_coordinate(forms.robin_at(ctx.grid.t0), ctx.path("robin.txt"));
  for (const char* f : {"mass.txt", "stiffness.txt", "robin.txt"}) ctx.record(f);
  ctx.emit_json("assemble.json", {{"ndof", ctx.problem.ndof()}, {"time", ctx.grid.t0}}, stage);
}

void stage_solve(Context& ctx, const Json& stage, const Json& opts) {
  std::string initial = get_or<std::string>(opts, "initial", "");
  if (initial.empty()) {
    const Point& c = ctx.mesh->vertex(central_vertex(*ctx.mesh));
    initial = "bump(" + format_double(c[0]) + (ctx.mesh->dimension() == 2 ? "," + format_double(c[1]) : "") + "," +
              format_double(0.1 * ctx.mesh->diameter()) + ")";
  }
  const Vector psi0 = initial_from_name(initial, *ctx.mesh, ctx.problem.m(), ctx.seed);
  const std::string src = get_or<std::string>(opts, "source", "none");
  const SourceFn f = source_from_name(src, *ctx.mesh, ctx.problem.m());
  const StepLoad load = pointwise_load(ctx.problem, f, ctx.grid.scheme);
  Trajectory traj = solve_forward(ctx.problem, psi0, load, ctx.grid);
  write_trajectory_csv(traj, ctx.path("trajectory.csv"));
  write_energy_json(traj, ctx.path("trajectory_energy.json"));
  ctx.record("trajectory.csv");
  ctx.record("trajectory_energy.json");
  Json body = {{"tri_norm", tri_norm(traj)}, {"energy_ratio", energy_ratio(ctx.problem, traj, f, psi0)}};
  if (ctx.grid.scheme == Scheme::implicit_euler) {
    const auto res = energy_identity_residuals(ctx.problem, traj, load);
    body["energy_identity_max_residual"] = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
  }
  if (!f && traj.energy_log.back().mass > 0.0 && traj.snapshots.size() >= 3) body["decay_rate"] = decay_rate(traj);
  ctx.emit_json("solve.json", body, stage);
  ctx.solution = std::move(traj);
  ctx.solution_unforced = !f;
}

void stage_green(Context& ctx, const Json& stage, const Json& opts) {
  const Index y = pick_vertex(ctx, opts);
  const int m = ctx.problem.m();
  const long column = get_or<long>(opts, "column", 0);
  require(column >= 0 && column < m, ErrorCode::invalid_argument, "column out of range");
  const double eps = get_or(opts, "epsilon", 0.0);
  const double s = get_or(opts, "source_time", ctx.grid.t0);
  std::vector<GreenColumn> cols(static_cast<std::size_t>(m));
  parallel_for(cols.size(), [&](std::size_t k) {
    if (eps > 0.0) {
      cols[k] = averaged_green(ctx.problem, {ctx.mesh->vertex(y), s}, eps, k, ctx.grid);
      cols[k].source_vertex = y;
    } else {
      require(s == ctx.grid.t0, ErrorCode::invalid_argument, "delta columns start at the window start");
      cols[k] = heat_kernel_column(ctx.problem, y, k, ctx.grid);
    }
  });
  const auto& col = cols[static_cast<std::size_t>(column)];
  write_trajectory_csv(col.trajectory, ctx.path("green_column.csv"));
  ctx.record("green_column.csv");
  ctx.green_samples = column_vertex_samples(cols, y, s, get_or<std::size_t>(opts, "max_times", 32));
  ctx.green_vertex = y;
  ctx.green_time = s;
  write_samples_csv(ctx.green_samples, ctx.mesh->dimension(), ctx.path("green_samples.csv"));
  ctx.record("green_samples.csv");
  ctx.emit_json("green.json",
                {{"source_vertex", y},
                 {"source", {ctx.mesh->vertex(y)[0], ctx.mesh->vertex(y)[1], s}},
                 {"epsilon", eps},
                 {"column", column},
                 {"load_mass", col.load_mass},
                 {"tri_norm", tri_norm(col.trajectory)},
                 {"n_samples", ctx.green_samples.size()}},
                stage);
}

void stage_elliptic(Context& ctx, const Json& stage, const Json& opts) {
  if (!ctx.coercivity) {
    CoercivityOptions co;
    co.seed = ctx.seed;
    ctx.coercivity = check_h1(ctx.problem, {ctx.grid.t0}, co);
  }
  const Index y = pick_vertex(ctx, opts);
  EllipticOptions eo;
  eo.tol = get_or(opts, "tol", eo.tol);
  auto g = elliptic_green(ctx.problem, y, ctx.coercivity->theta0, eo);
  const Matrix steady = steady_green(ctx.problem, y);
  const double rel = (g.values - steady).norm() / steady.norm();
  write_nodal_csv(*ctx.mesh, g.values, ctx.path("elliptic_green.csv"));
  ctx.record("elliptic_green.csv");
  const std::size_t nv = ctx.mesh->num_vertices();
  ctx.emit_json("elliptic_green.json",
                {{"source_vertex", y},
                 {"theta0", g.theta0},
                 {"truncation_time", g.truncation_time},
                 {"steps", g.steps},
                 {"tail_bound", g.tail_bound},
                 {"steady_relative_difference", rel},
                 {"value_at_source", g.values(static_cast<Eigen::Index>(dof(0, y, nv)), 0)}},
                stage);
  ctx.elliptic = std::move(g);
}

void stage_oracle(Context& ctx, const Json& stage) {
  const Mesh& mesh = *ctx.mesh;
  require(mesh.dimension() == 1 && ctx.problem.m() == 1, ErrorCode::precondition,
          "series oracle covers scalar 1D problems");
  require(ctx.problem.theta.kind == RobinOperator::Kind::multiplier && ctx.problem.time_independent(),
          ErrorCode::precondition, "series oracle needs a time-independent multiplier theta");
  double a = INFINITY, b = -INFINITY;
  for (const auto& p : mesh.vertices()) {
    a = std::min(a, p[0]);
    b = std::max(b, p[0]);
  }
  for (double x : {a, 0.5 * (a + b), b})
    require(std::abs(ctx.problem.field.evaluate({x, 0.0}, 0.0, 0, 0)(0, 0) - 1.0) <= 1e-14, ErrorCode::precondition,
            "series oracle needs the unit coefficient");
  const RobinEigenbasis1D basis(ctx.problem.theta.theta({a, 0.0}, 0.0)(0, 0),
                                ctx.problem.theta.theta({b, 0.0}, 0.0)(0, 0), a, b);
  std::vector<KernelSample> pts = ctx.green_samples;
  if (pts.empty()) {
    const Index y = central_vertex(mesh);
    for (std::size_t k = 1; k <= ctx.grid.steps; ++k)
      for (Index v = 0; v < mesh.num_vertices(); ++v)
        if (v != y) pts.push_back({mesh.vertex(v), ctx.grid.time(k), mesh.vertex(y), ctx.grid.t0, Matrix(), "fem"});
  }
  // All samples are written; only resolved ones feed the verify stage.
  std::vector<KernelSample> all;
  std::size_t unresolved = 0;
  ctx.oracle_samples.clear();
  for (const auto& p : pts) {
    bool ok = true;
    all.push_back(series_sample(basis, p.x[0], p.t, p.y[0], p.s, &ok));
    if (ok) ctx.oracle_samples.push_back(all.back());
    else ++unresolved;
  }
  write_samples_csv(all, 1, ctx.path("oracle_samples.csv"));
  ctx.record("oracle_samples.csv");
  ctx.emit_json("oracle.json",
                {{"theta_left", basis.theta_left()}, {"theta_right", basis.theta_right()},
                 {"n_samples", all.size()}, {"unresolved", unresolved}},
                stage);
}

void stage_verify(Context& ctx, const Json& stage, const Json& opts) {
  std::vector<std::string> checks =
      get_or<std::vector<std::string>>(opts, "checks", std::vector<std::string>{"gaussian", "decay"});
  const double slack = get_or(opts, "slack", 2.0);
  const Mesh& mesh = *ctx.mesh;
  const int n = mesh.dimension();
  Json reports = Json::array();
  bool all = true;
  for (const auto& check : checks) {
    Json r;
    if (check == "gaussian") {
      require(!ctx.green_samples.empty(), ErrorCode::precondition, "gaussian check needs a green stage");
      const double tmin = get_or(opts, "tau_min", 0.0), tmax = get_or(opts, "tau_max", INFINITY);
      std::vector<KernelSample> use;
      for (const auto& s : ctx.green_samples)
        if (s.t - s.s >= tmin && s.t - s.s <= tmax) use.push_back(s);
      const GaussianFit fit = fit_gaussian_bound(use, n, mesh.diameter(), slack);
      r = to_json(fit);
      const double kmin = get_or(opts, "kappa_min", 0.0), kmax = get_or(opts, "kappa_max", INFINITY);
      const double r2 = get_or(opts, "r_squared_min", 0.0);
      bool pass = fit.pass && fit.kappa >= kmin && fit.kappa <= kmax && fit.r_squared >= r2;
      if (!ctx.oracle_samples.empty()) {
        std::vector<KernelSample> orc;
        for (const auto& s : ctx.oracle_samples)
          if (s.t - s.s >= tmin && s.t - s.s <= tmax) orc.push_back(s);
        const std::size_t v = count_envelope_violations(fit, orc, n, mesh.diameter());
        r["oracle_violations"] = v;
        pass = pass && v == 0;
      }
      r["pass"] = pass;
    } else if (check == "offdiag") {
      require(!ctx.green_samples.empty(), ErrorCode::precondition, "offdiag check needs a green stage");
      const double maxd = 0.5 * distance_to_boundary(mesh, mesh.vertex(ctx.green_vertex));
      r = to_json(check_offdiagonal_decay(ctx.green_samples, n, mesh.mesh_size(), maxd, slack));
    } else if (check == "decay") {
      require(ctx.solution && ctx.solution_unforced, ErrorCode::precondition,
              "decay check needs an unforced solve stage");
      if (!ctx.coercivity) ctx.coercivity = check_h1(ctx.problem, {ctx.grid.t0});
      r = to_json(check_decay_vs_theta0(*ctx.solution, ctx.coercivity->theta0, get_or(opts, "decay_tol", -1.0)));
      r["constants"]["theta0"] = ctx.coercivity->theta0;
    } else if (check == "elliptic") {
      require(ctx.elliptic.has_value(), ErrorCode::precondition, "elliptic check needs an elliptic_green stage");
      r = to_json(check_elliptic_bounds(ctx.elliptic->values, mesh, ctx.elliptic->source_vertex, slack));
    } else if (check == "local_bound") {
      require(ctx.solution && ctx.solution_unforced, ErrorCode::precondition,
              "local_bound check needs an unforced solve stage");
      Point x0 = mesh.vertex(central_vertex(mesh));
      if (opts.contains("x0")) {
        const auto v = get_or<std::vector<double>>(opts, "x0", {});
        require(v.size() == static_cast<std::size_t>(n), ErrorCode::invalid_argument, "x0 has the wrong dimension");
        x0 = {v[0], n == 2 ? v[1] : 0.0};
      }
      const double window = ctx.grid.t1 - ctx.grid.t0;
      std::vector<double> radii;
      for (int i = 0; i < 4; ++i) radii.push_back(std::sqrt(window) / std::pow(2.0, i));
      r = to_json(local_boundedness_ladder(*ctx.solution, x0, radii, get_or(opts, "local_factor", 2.0)));
    } else {
      fail(ErrorCode::unknown_name, "unknown verify check '" + check + "'");
    }
    all = all && r.at("pass").get<bool>();
    reports.push_back(std::move(r));
  }
  ctx.emit_json("verify.json", {{"reports", reports}, {"pass", all}}, stage);
}

void write_manifest(Context& ctx, const std::string& status, const std::string& failed_stage) {
  Json files = Json::array();
  for (const auto& f : ctx.files) {
    const std::string p = ctx.path(f);
    files.push_back({{"path", f}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
  }
  Json man = {{"status", status}, {"files", files}, {"config", ctx.config}};
  if (!failed_stage.empty()) man["failed_stage"] = failed_stage;
  write_json(ctx.path("manifest.json"), man);
}

}  // namespace

std::string resolve_output_dir(const std::string& configured) {
  fs::path p = configured;
  if (p.is_relative()) {
    if (const char* root = std::getenv("RG_OUTPUT_ROOT"); root && *root) p = fs::path(root) / p;
  }
  return p.lexically_normal().string();
}

Json load_config(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::invalid_argument, path + ": " + e.what());
  }
  return j;
}

RunResult run_config(const Json& config, const std::string& config_dir) {
  check_keys(config, kTopKeys, "config");
  Context ctx;
  ctx.config = config;
  ctx.base = config_dir;
  ctx.seed = get_or<std::uint64_t>(config, "seed", 0);
  if (config.contains("jobs")) set_max_jobs(get_or<unsigned>(config, "jobs", 0));

  require(config.contains("domain"), ErrorCode::invalid_argument, "missing key 'domain' in config");
  Mesh mesh = build_domain(config.at("domain"), ctx.base);
  for (int i = get_or(config, "refine", 0); i > 0; --i) mesh = refine(mesh);
  ctx.mesh = std::make_shared<const Mesh>(std::move(mesh));

  const int m = get_or(config, "m", 1);
  require(m >= 1, ErrorCode::invalid_argument, "m must be at least 1");
  CoefficientField field =
      coefficient_from_name(get_or<std::string>(config, "coefficients", "laplace"), m, ctx.mesh->dimension());
  if (config.contains("lambda")) field.lambda = get_or(config, "lambda", field.lambda);
  RobinOperator theta = theta_from_name(get_or<std::string>(config, "theta", "theta_const(1)"), m, *ctx.mesh);
  ctx.problem = make_problem(ctx.mesh, std::move(field), std::move(theta), get_or(config, "lambda_tilde", 0.0),
                             get_or(config, "lumped_mass", false));

  const Json time = config.contains("time") ? config.at("time") : Json::object();
  check_keys(time, {"t0", "t1", "steps", "scheme"}, "time");
  ctx.grid = {get_or(time, "t0", 0.0), get_or(time, "t1", 1.0), get_or<std::size_t>(time, "steps", 100),
              scheme_from_string(get_or<std::string>(time, "scheme", "implicit_euler"))};
  ctx.grid.validate();

  require(config.contains("pipeline") && config.at("pipeline").is_array(), ErrorCode::invalid_argument,
          "config needs a 'pipeline' array");
  std::vector<std::pair<std::string, Json>> stages;
  for (const auto& st : config.at("pipeline")) {
    require(st.is_object() && st.contains("stage"), ErrorCode::invalid_argument, "every pipeline entry needs 'stage'");
    const auto name = st.at("stage").get<std::string>();
    auto it = kStageKeys.find(name);
    require(it != kStageKeys.end(), ErrorCode::unknown_name, "unknown stage '" + name + "'");
    std::set<std::string> allowed = it->second;
    allowed.insert("stage");
    check_keys(st, allowed, "stage '" + name + "'");
    stages.emplace_back(name, st);
  }

  ctx.out = resolve_output_dir(get_or<std::string>(config, "output", "robingreen_out"));
  fs::create_directories(ctx.out);

  for (const auto& [name, st] : stages) {
    try {
      if (name == "mesh") stage_mesh(ctx, st);
      else if (name == "validate") stage_validate(ctx, st, st);
      else if (name == "coercivity") stage_coercivity(ctx, st, st);
      else if (name == "assemble") stage_assemble(ctx, st);
      else if (name == "solve") stage_solve(ctx, st, st);
      else if (name == "green") stage_green(ctx, st, st);
      else if (name == "elliptic_green") stage_elliptic(ctx, st, st);
      else if (name == "oracle") stage_oracle(ctx, st);
      else if (name == "verify") stage_verify(ctx, st, st);
    } catch (const Error& e) {
      write_manifest(ctx, "failed", name);
      throw Error(e.code(), "stage '" + name + "': " + e.what());
    } catch (const std::exception& e) {
      write_manifest(ctx, "failed", name);
      throw Error(ErrorCode::internal, "stage '" + name + "': " + e.what());
    }
  }
  write_manifest(ctx, "ok", "");
  RunResult res;
  res.output_dir = ctx.out.string();
  res.manifest_path = ctx.path("manifest.json");
  res.files = ctx.files;
  return res;
}

RunResult run_config_file(const std::string& path) {
  const Json cfg = load_config(path);
  return run_config(cfg, fs::path(path).parent_path().string());
}

}  // namespace rg
