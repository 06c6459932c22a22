#include "data.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "error.hpp"
#include "names.hpp"

namespace rg {

namespace {

Point centre_from(const CatalogName& p, int dim, std::size_t first) {
  Point c{p.args[first], 0.0};
  if (dim == 2) c[1] = p.args[first + 1];
  return c;
}

}  // namespace

Vector initial_from_name(const std::string& spec, const Mesh& mesh, int m, std::uint64_t seed) {
  const CatalogName p = parse_catalog_name(spec);
  const std::size_t nv = mesh.num_vertices();
  const int dim = mesh.dimension();
  Vector u = Vector::Zero(static_cast<Eigen::Index>(nv * static_cast<std::size_t>(m)));
  if (p.name == "zero") {
    require(p.args.empty(), ErrorCode::invalid_argument, "'zero' takes no arguments");
  } else if (p.name == "constant") {
    require(p.args.size() == 1, ErrorCode::invalid_argument, "'constant' expects 1 argument");
    u.setConstant(p.args[0]);
  } else if (p.name == "bump") {
    require(p.args.size() == static_cast<std::size_t>(dim + 1), ErrorCode::invalid_argument,
            "'bump' expects the centre coordinates and a width");
    const Point c = centre_from(p, dim, 0);
    const double w = p.args[static_cast<std::size_t>(dim)];
    require(w > 0.0, ErrorCode::invalid_argument, "bump width must be positive");
    for (Index v = 0; v < nv; ++v) {
      const double r = distance(mesh.vertex(v), c, dim);
      const double val = std::exp(-r * r / (w * w));
      for (int k = 0; k < m; ++k) u[static_cast<Eigen::Index>(dof(static_cast<Index>(k), v, nv))] = val;
    }
  } else if (p.name == "random") {
    require(p.args.empty(), ErrorCode::invalid_argument, "'random' takes no arguments");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = uni(rng);
  } else {
    fail(ErrorCode::unknown_name, "unknown initial data '" + p.name + "'");
  }
  return u;
}

SourceFn source_from_name(const std::string& spec, const Mesh& mesh, int m) {
  const CatalogName p = parse_catalog_name(spec);
  const int dim = mesh.dimension();
  if (p.name == "none") {
    require(p.args.empty(), ErrorCode::invalid_argument, "'none' takes no arguments");
    return {};
  }
  if (p.name == "constant") {
    require(p.args.size() == 1, ErrorCode::invalid_argument, "'constant' expects 1 argument");
    const double c = p.args[0];
    return [c, m](const Point&, double) -> Vector { return Vector::Constant(m, c); };
  }
  if (p.name == "pulse") {
    require(p.args.size() == static_cast<std::size_t>(dim + 3), ErrorCode::invalid_argument,
            "'pulse' expects the centre coordinates, a width, t_on and t_off");
    const Point c = centre_from(p, dim, 0);
    const double w = p.args[static_cast<std::size_t>(dim)];
    const double on = p.args[static_cast<std::size_t>(dim + 1)], off = p.args[static_cast<std::size_t>(dim + 2)];
    require(w > 0.0 && on < off, ErrorCode::invalid_argument, "pulse needs width > 0 and t_on < t_off");
    return [c, w, on, off, m, dim](const Point& x, double t) -> Vector {
      if (t < on || t > off) return Vector::Zero(m);
      const double r = distance(x, c, dim);
      return Vector::Constant(m, std::exp(-r * r / (w * w)));
    };
  }
  fail(ErrorCode::unknown_name, "unknown source '" + p.name + "'");
}

Index central_vertex(const Mesh& mesh) {
  Point mean{0.0, 0.0};
  for (const auto& v : mesh.vertices()) {
    mean[0] += v[0];
    mean[1] += v[1];
  }
  mean[0] /= static_cast<double>(mesh.num_vertices());
  mean[1] /= static_cast<double>(mesh.num_vertices());
  return mesh.nearest_vertex(mean);
}

double distance_to_boundary(const Mesh& mesh, const Point& p) {
  double best = INFINITY;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    auto v = mesh.facet(f);
    if (mesh.dimension() == 1) {
      best = std::min(best, std::abs(p[0] - mesh.vertex(v[0])[0]));
      continue;
    }
    const Point& a = mesh.vertex(v[0]);
    const Point& b = mesh.vertex(v[1]);
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double s = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2;
    s = std::clamp(s, 0.0, 1.0);
    best = std::min(best, std::hypot(p[0] - a[0] - s * dx, p[1] - a[1] - s * dy));
  }
  return best;
}

}  // namespace rg
