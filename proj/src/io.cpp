#include "io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "error.hpp"

namespace rg {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::io, path + ":" + std::to_string(line) + ": not a number: '" + s + "'");
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  auto out = open_out(path);
  out << "step,t";
  const Eigen::Index n = traj.snapshots.empty() ? 0 : traj.snapshots.front().size();
  for (Eigen::Index i = 0; i < n; ++i) out << ",u" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    out << k << ',' << format_double(traj.grid.time(k));
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(traj.snapshots[k][i]);
    out << '\n';
  }
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

void write_energy_json(const Trajectory& traj, const std::string& path) {
  Json j;
  j["grid"] = to_json(traj.grid);
  j["direction"] = traj.direction == Direction::forward ? "forward" : "backward";
  j["m"] = traj.m;
  Json log = Json::array();
  for (std::size_t k = 0; k < traj.energy_log.size(); ++k) {
    const auto& e = traj.energy_log[k];
    log.push_back({{"step", k}, {"t", traj.grid.time(k)}, {"mass", e.mass}, {"gradient", e.gradient},
                   {"robin", e.robin}});
  }
  j["energy"] = std::move(log);
  write_json(path, j);
}

void write_samples_csv(const std::vector<KernelSample>& samples, int dim, const std::string& path) {
  require(dim == 1 || dim == 2, ErrorCode::invalid_argument, "sample dimension must be 1 or 2");
  const Eigen::Index m = samples.empty() ? 1 : samples.front().value.rows();
  auto out = open_out(path);
  out << (dim == 1 ? "x0,t,y0,s" : "x0,x1,t,y0,y1,s");
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) out << ",g" << r << c;
  out << ",source\n";
  for (const auto& s : samples) {
    require(s.value.rows() == m && s.value.cols() == m, ErrorCode::invalid_argument, "mixed sample sizes");
    out << format_double(s.x[0]);
    if (dim == 2) out << ',' << format_double(s.x[1]);
    out << ',' << format_double(s.t) << ',' << format_double(s.y[0]);
    if (dim == 2) out << ',' << format_double(s.y[1]);
    out << ',' << format_double(s.s);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c) out << ',' << format_double(s.value(r, c));
    out << ',' << s.source << '\n';
  }
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

std::vector<KernelSample> read_samples_csv(const std::string& path, int* dim_out) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open '" + path + "'");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::io, path + ": empty sample file");
  const auto header = split(line, ',');
  require(header.size() >= 6 && header.front() == "x0" && header.back() == "source", ErrorCode::io,
          path + ": unrecognized sample header");
  const int dim = header[1] == "x1" ? 2 : 1;
  const std::size_t fixed = dim == 1 ? 4 : 6;
  const std::size_t nvals = header.size() - fixed - 1;
  Eigen::Index m = 0;
  while (static_cast<std::size_t>((m + 1) * (m + 1)) <= nvals) ++m;
  require(m >= 1 && static_cast<std::size_t>(m * m) == nvals, ErrorCode::io, path + ": value columns are not m x m");
  std::vector<KernelSample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    require(cells.size() == header.size(), ErrorCode::io, path + ":" + std::to_string(lineno) + ": wrong column count");
    auto num = [&](std::size_t i) { return parse_double(cells[i], path, lineno); };
    KernelSample s;
    std::size_t c = 0;
    s.x[0] = num(c++);
    if (dim == 2) s.x[1] = num(c++);
    s.t = num(c++);
    s.y[0] = num(c++);
    if (dim == 2) s.y[1] = num(c++);
    s.s = num(c++);
    s.value.resize(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index k = 0; k < m; ++k) s.value(r, k) = num(c++);
    s.source = cells[c];
    out.push_back(std::move(s));
  }
  if (dim_out) *dim_out = dim;
  return out;
}

void write_nodal_csv(const Mesh& mesh, const Matrix& values, const std::string& path) {
  const std::size_t nv = mesh.num_vertices();
  const Eigen::Index m = values.cols();
  require(static_cast<std::size_t>(values.rows()) == nv * static_cast<std::size_t>(m), ErrorCode::invalid_argument,
          "nodal values have the wrong shape");
  auto out = open_out(path);
  out << (mesh.dimension() == 1 ? "x0" : "x0,x1");
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) out << ",g" << r << c;
  out << '\n';
  for (Index v = 0; v < nv; ++v) {
    out << format_double(mesh.vertex(v)[0]);
    if (mesh.dimension() == 2) out << ',' << format_double(mesh.vertex(v)[1]);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c)
        out << ',' << format_double(values(static_cast<Eigen::Index>(dof(static_cast<Index>(r), v, nv)), c));
    out << '\n';
  }
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string sha256_file(const std::string& path) {
  const std::string bytes = read_text(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) == 1, ErrorCode::internal,
          "SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

Json to_json(const CoercivityReport& r) {
  return {{"theta0", r.theta0},   {"lambda_tilde", r.lambda_tilde}, {"converged", r.converged},
          {"iterations", r.iterations}, {"t_worst", r.t_worst},    {"residual", r.residual},
          {"delta", r.delta},     {"delta_ok", r.delta_ok}};
}

Json to_json(const EllipticityReport& r) {
  return {{"lambda_lower", r.lambda_lower},
          {"upper_norm", r.upper_norm},
          {"lambda_upper_ok", r.lambda_upper_ok},
          {"worst_point", {r.worst_point[0], r.worst_point[1]}},
          {"worst_time", r.worst_time},
          {"samples", r.samples},
          {"ok", r.ok}};
}

Json to_json(const ThetaReport& r) {
  return {{"delta", r.delta}, {"nonneg_ok", r.nonneg_ok}, {"worst_time", r.worst_time}};
}

Json to_json(const GaussianFit& f) {
  return {{"kind", "gaussian"},
          {"constants", {{"C", f.C}, {"C_fit", f.C_fit}, {"kappa", f.kappa}, {"slack", f.slack}}},
          {"r_squared", f.r_squared},
          {"violations", f.violations},
          {"n_samples", f.n_samples},
          {"pass", f.pass}};
}

Json to_json(const BoundReport& r) {
  Json constants = Json::object();
  for (const auto& [k, v] : r.constants) constants[k] = v;
  Json j = {{"kind", to_string(r.kind)},
            {"constants", constants},
            {"exponents", {{"target", r.exponent_target}, {"fitted", r.exponent_fitted}}},
            {"pass", r.pass},
            {"n_samples", r.n_samples},
            {"excluded", r.excluded}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json to_json(const DecayCheck& d) {
  return {{"kind", "decay"},
          {"constants", {{"worst_log_excess", d.worst_log_excess}, {"tol", d.tol}}},
          {"pairs", d.pairs},
          {"pass", d.pass}};
}

Json to_json(const TimeGrid& g) {
  return {{"t0", g.t0}, {"t1", g.t1}, {"steps", g.steps}, {"scheme", to_string(g.scheme)}};
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "implicit_euler" || s == "ie") return Scheme::implicit_euler;
  if (s == "crank_nicolson" || s == "cn") return Scheme::crank_nicolson;
  fail(ErrorCode::unknown_name, "unknown time scheme '" + s + "'");
}

std::string to_string(Scheme s) { return s == Scheme::implicit_euler ? "implicit_euler" : "crank_nicolson"; }

}  // namespace rg
