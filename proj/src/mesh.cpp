#include "mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include <json.hpp>

#include "error.hpp"

namespace rg {

double distance(const Point& a, const Point& b, int dim) {
  const double dx = a[0] - b[0];
  const double dy = dim > 1 ? a[1] - b[1] : 0.0;
  return std::sqrt(dx * dx + dy * dy);
}

double parabolic_distance(const SpaceTimePoint& a, const SpaceTimePoint& b, int dim) {
  return std::max(distance(a.x, b.x, dim), std::sqrt(std::abs(a.t - b.t)));
}

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

std::pair<Index, Index> edge_key(Index a, Index b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

Mesh::Mesh(int dimension, std::vector<Point> vertices, std::vector<Index> cells, std::vector<Index> facets,
           std::vector<int> facet_patches)
    : dim_(dimension),
      vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      facets_(std::move(facets)),
      facet_patches_(std::move(facet_patches)) {
  validate();
}

std::span<const Index> Mesh::cell(Index c) const {
  const auto stride = static_cast<std::size_t>(dim_ + 1);
  return {cells_.data() + c * stride, stride};
}

std::span<const Index> Mesh::facet(Index f) const {
  const auto stride = static_cast<std::size_t>(dim_);
  return {facets_.data() + f * stride, stride};
}

double Mesh::cell_measure(Index c) const {
  auto v = cell(c);
  if (dim_ == 1) return vertices_[v[1]][0] - vertices_[v[0]][0];
  return signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
}

double Mesh::facet_measure(Index f) const {
  if (dim_ == 1) return 1.0;
  auto v = facet(f);
  return distance(vertices_[v[0]], vertices_[v[1]], 2);
}

double Mesh::measure() const {
  double sum = 0.0;
  for (Index c = 0; c < num_cells(); ++c) sum += cell_measure(c);
  return sum;
}

double Mesh::boundary_measure() const {
  double sum = 0.0;
  for (Index f = 0; f < num_facets(); ++f) sum += facet_measure(f);
  return sum;
}

void Mesh::validate() {
  require(dim_ == 1 || dim_ == 2, ErrorCode::invalid_argument, "mesh dimension must be 1 or 2");
  const auto cstride = static_cast<std::size_t>(dim_ + 1);
  const auto fstride = static_cast<std::size_t>(dim_);
  require(!vertices_.empty() && !cells_.empty() && cells_.size() % cstride == 0, ErrorCode::invalid_argument,
          "mesh has no cells or a malformed cell list");
  require(facets_.size() == facet_patches_.size() * fstride, ErrorCode::invalid_argument,
          "boundary facet list and patch labels disagree in length");
  for (const auto& p : vertices_)
    require(std::isfinite(p[0]) && std::isfinite(p[1]), ErrorCode::invalid_argument, "non-finite vertex coordinate");
  for (Index v : cells_) require(v < vertices_.size(), ErrorCode::invalid_argument, "cell vertex index out of range");
  for (Index v : facets_) require(v < vertices_.size(), ErrorCode::invalid_argument, "facet vertex index out of range");

  h_ = 0.0;
  for (Index c = 0; c < num_cells(); ++c) {
    require(cell_measure(c) > 0.0, ErrorCode::invalid_argument,
            "cell " + std::to_string(c) + " has non-positive measure or wrong orientation");
    auto v = cell(c);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        h_ = std::max(h_, distance(vertices_[v[i]], vertices_[v[j]], dim_));
  }

  on_boundary_.assign(vertices_.size(), false);
  if (dim_ == 1) {
    std::vector<int> count(vertices_.size(), 0);
    for (Index v : cells_) ++count[v];
    std::vector<int> facet_count(vertices_.size(), 0);
    for (Index v : facets_) ++facet_count[v];
    for (Index v = 0; v < vertices_.size(); ++v) {
      require(count[v] <= 2, ErrorCode::invalid_argument, "vertex shared by more than two segments");
      require((count[v] == 1) == (facet_count[v] == 1) && facet_count[v] <= 1, ErrorCode::invalid_argument,
              "boundary facets do not cover the boundary exactly once");
      on_boundary_[v] = count[v] == 1;
    }
  } else {
    std::map<std::pair<Index, Index>, int> edges;
    for (Index c = 0; c < num_cells(); ++c) {
      auto v = cell(c);
      for (int i = 0; i < 3; ++i) ++edges[edge_key(v[i], v[(i + 1) % 3])];
    }
    std::map<std::pair<Index, Index>, int> declared;
    for (Index f = 0; f < num_facets(); ++f) {
      auto v = facet(f);
      ++declared[edge_key(v[0], v[1])];
    }
    std::size_t boundary_edges = 0;
    for (const auto& [e, n] : edges) {
      require(n <= 2, ErrorCode::invalid_argument, "edge shared by more than two triangles");
      if (n == 1) {
        ++boundary_edges;
        auto it = declared.find(e);
        require(it != declared.end() && it->second == 1, ErrorCode::invalid_argument,
                "boundary facets do not cover the boundary exactly once");
        on_boundary_[e.first] = on_boundary_[e.second] = true;
      }
    }
    require(boundary_edges == declared.size() && declared.size() == num_facets(), ErrorCode::invalid_argument,
            "boundary facet list contains interior or duplicate edges");
  }

  // The convex hull of a polytope is spanned by its boundary vertices.
  std::vector<Index> bnd;
  for (Index v = 0; v < vertices_.size(); ++v)
    if (on_boundary_[v]) bnd.push_back(v);
  diam_ = 0.0;
  for (std::size_t i = 0; i < bnd.size(); ++i)
    for (std::size_t j = i + 1; j < bnd.size(); ++j)
      diam_ = std::max(diam_, distance(vertices_[bnd[i]], vertices_[bnd[j]], dim_));
}

std::optional<CellLocation> Mesh::locate(const Point& p, double tol) const {
  for (Index c = 0; c < num_cells(); ++c) {
    auto v = cell(c);
    if (dim_ == 1) {
      const double x0 = vertices_[v[0]][0];
      const double x1 = vertices_[v[1]][0];
      const double len = x1 - x0;
      if (p[0] >= x0 - tol * len && p[0] <= x1 + tol * len) {
        const double s = std::clamp((p[0] - x0) / len, 0.0, 1.0);
        return CellLocation{c, {1.0 - s, s, 0.0}};
      }
    } else {
      const Point& a = vertices_[v[0]];
      const Point& b = vertices_[v[1]];
      const Point& d = vertices_[v[2]];
      const double area = signed_area(a, b, d);
      const double l0 = signed_area(p, b, d) / area;
      const double l1 = signed_area(a, p, d) / area;
      const double l2 = 1.0 - l0 - l1;
      if (l0 >= -tol && l1 >= -tol && l2 >= -tol) return CellLocation{c, {l0, l1, l2}};
    }
  }
  return std::nullopt;
}

Index Mesh::nearest_vertex(const Point& p) const {
  Index best = 0;
  double best_d = distance(p, vertices_[0], dim_);
  for (Index v = 1; v < vertices_.size(); ++v) {
    const double d = distance(p, vertices_[v], dim_);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

Mesh build_interval_mesh(double a, double b, std::size_t n_cells) {
  require(std::isfinite(a) && std::isfinite(b), ErrorCode::invalid_argument, "interval bounds must be finite");
  require(a < b, ErrorCode::invalid_argument, "interval requires a < b");
  require(n_cells >= 1, ErrorCode::invalid_argument, "interval needs at least one cell");
  std::vector<Point> verts(n_cells + 1);
  for (std::size_t i = 0; i <= n_cells; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n_cells);
    verts[i] = {i == n_cells ? b : a + (b - a) * s, 0.0};
  }
  std::vector<Index> cells;
  cells.reserve(2 * n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) {
    cells.push_back(i);
    cells.push_back(i + 1);
  }
  return Mesh(1, std::move(verts), std::move(cells), {0, n_cells}, {0, 1});
}

Mesh build_rectangle_mesh(double w, double h, std::size_t nx, std::size_t ny) {
  require(std::isfinite(w) && std::isfinite(h) && w > 0.0 && h > 0.0, ErrorCode::invalid_argument,
          "rectangle requires positive finite width and height");
  require(nx >= 1 && ny >= 1, ErrorCode::invalid_argument, "rectangle needs at least one cell per direction");
  auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  std::vector<Point> verts;
  verts.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      verts.push_back({i == nx ? w : w * static_cast<double>(i) / static_cast<double>(nx),
                       j == ny ? h : h * static_cast<double>(j) / static_cast<double>(ny)});
  std::vector<Index> cells;
  cells.reserve(6 * nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const Index v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
      cells.insert(cells.end(), {v00, v10, v11, v00, v11, v01});
    }
  std::vector<Index> facets;
  std::vector<int> patches;
  auto add = [&](Index a, Index b, int patch) {
    facets.push_back(a);
    facets.push_back(b);
    patches.push_back(patch);
  };
  for (std::size_t i = 0; i < nx; ++i) add(id(i, 0), id(i + 1, 0), 0);
  for (std::size_t j = 0; j < ny; ++j) add(id(nx, j), id(nx, j + 1), 1);
  for (std::size_t i = nx; i > 0; --i) add(id(i, ny), id(i - 1, ny), 2);
  for (std::size_t j = ny; j > 0; --j) add(id(0, j), id(0, j - 1), 3);
  return Mesh(2, std::move(verts), std::move(cells), std::move(facets), std::move(patches));
}

Mesh build_lshape_mesh(std::size_t n) {
  require(n >= 1, ErrorCode::invalid_argument, "L-shape needs n >= 1");
  const std::size_t m = 2 * n;
  const double step = 1.0 / static_cast<double>(m);
  auto removed = [n](std::size_t i, std::size_t j) { return i >= n && j >= n; };
  std::vector<long> map((m + 1) * (m + 1), -1);
  std::vector<Point> verts;
  auto vid = [&](std::size_t i, std::size_t j) -> Index {
    long& slot = map[j * (m + 1) + i];
    if (slot < 0) {
      slot = static_cast<long>(verts.size());
      verts.push_back({static_cast<double>(i) * step, static_cast<double>(j) * step});
    }
    return static_cast<Index>(slot);
  };
  std::vector<Index> cells;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      if (removed(i, j)) continue;
      const Index v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      cells.insert(cells.end(), {v00, v10, v11, v00, v11, v01});
    }
  // Boundary edges are those used by exactly one triangle.
  std::map<std::pair<Index, Index>, int> count;
  std::vector<std::pair<Index, Index>> order;
  for (std::size_t c = 0; c < cells.size(); c += 3)
    for (int k = 0; k < 3; ++k) {
      const Index a = cells[c + k], b = cells[c + (k + 1) % 3];
      if (count[edge_key(a, b)]++ == 0) order.emplace_back(a, b);
    }
  std::vector<Index> facets;
  std::vector<int> patches;
  for (const auto& [a, b] : order) {
    if (count[edge_key(a, b)] != 1) continue;
    const Point mid{0.5 * (verts[a][0] + verts[b][0]), 0.5 * (verts[a][1] + verts[b][1])};
    int patch;
    if (mid[1] == 0.0) patch = 0;
    else if (mid[0] == 1.0) patch = 1;
    else if (mid[1] == 0.5 && mid[0] > 0.5) patch = 2;
    else if (mid[0] == 0.5 && mid[1] > 0.5) patch = 3;
    else if (mid[1] == 1.0) patch = 4;
    else patch = 5;
    facets.push_back(a);
    facets.push_back(b);
    patches.push_back(patch);
  }
  return Mesh(2, std::move(verts), std::move(cells), std::move(facets), std::move(patches));
}

Mesh refine(const Mesh& mesh) {
  const int dim = mesh.dimension();
  std::vector<Point> verts = mesh.vertices();
  std::map<std::pair<Index, Index>, Index> midpoints;
  auto mid = [&](Index a, Index b) {
    auto [it, inserted] = midpoints.try_emplace(edge_key(a, b), verts.size());
    if (inserted) {
      const Point& p = verts[a];
      const Point& q = verts[b];
      verts.push_back({0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])});
    }
    return it->second;
  };

  std::vector<Index> cells;
  std::vector<Index> facets;
  std::vector<int> patches;
  if (dim == 1) {
    for (Index c = 0; c < mesh.num_cells(); ++c) {
      auto v = mesh.cell(c);
      const Index m = mid(v[0], v[1]);
      cells.insert(cells.end(), {v[0], m, m, v[1]});
    }
    for (Index f = 0; f < mesh.num_facets(); ++f) {
      facets.push_back(mesh.facet(f)[0]);
      patches.push_back(mesh.facet_patch(f));
    }
  } else {
    for (Index c = 0; c < mesh.num_cells(); ++c) {
      auto v = mesh.cell(c);
      const Index ab = mid(v[0], v[1]), bc = mid(v[1], v[2]), ca = mid(v[2], v[0]);
      cells.insert(cells.end(), {v[0], ab, ca, ab, v[1], bc, ca, bc, v[2], ab, bc, ca});
    }
    for (Index f = 0; f < mesh.num_facets(); ++f) {
      auto v = mesh.facet(f);
      const Index m = mid(v[0], v[1]);
      facets.insert(facets.end(), {v[0], m, m, v[1]});
      patches.push_back(mesh.facet_patch(f));
      patches.push_back(mesh.facet_patch(f));
    }
  }
  return Mesh(dim, std::move(verts), std::move(cells), std::move(facets), std::move(patches));
}

std::string mesh_to_json(const Mesh& mesh) {
  using nlohmann::json;
  const int dim = mesh.dimension();
  json verts = json::array();
  for (const auto& p : mesh.vertices())
    verts.push_back(dim == 1 ? json::array({p[0]}) : json::array({p[0], p[1]}));
  json cells = json::array();
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    auto v = mesh.cell(c);
    cells.push_back(std::vector<Index>(v.begin(), v.end()));
  }
  json facets = json::array();
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    auto v = mesh.facet(f);
    facets.push_back({{"vertices", std::vector<Index>(v.begin(), v.end())}, {"patch", mesh.facet_patch(f)}});
  }
  json doc = {{"dimension", dim}, {"vertices", verts}, {"cells", cells}, {"boundary_facets", facets}};
  return doc.dump(1);
}

Mesh mesh_from_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::io, std::string("mesh JSON parse error: ") + e.what());
  }
  try {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const auto& k = it.key();
      require(k == "dimension" || k == "vertices" || k == "cells" || k == "boundary_facets",
              ErrorCode::invalid_argument, "unknown mesh key '" + k + "'");
    }
    const int dim = doc.at("dimension").get<int>();
    require(dim == 1 || dim == 2, ErrorCode::invalid_argument, "mesh dimension must be 1 or 2");
    std::vector<Point> verts;
    for (const auto& v : doc.at("vertices")) {
      require(v.size() == static_cast<std::size_t>(dim), ErrorCode::invalid_argument,
              "vertex coordinate count does not match dimension");
      verts.push_back({v[0].get<double>(), dim == 2 ? v[1].get<double>() : 0.0});
    }
    std::vector<Index> cells;
    for (const auto& c : doc.at("cells")) {
      require(c.size() == static_cast<std::size_t>(dim + 1), ErrorCode::invalid_argument, "cell arity mismatch");
      for (const auto& v : c) cells.push_back(v.get<Index>());
    }
    std::vector<Index> facets;
    std::vector<int> patches;
    for (const auto& f : doc.at("boundary_facets")) {
      const auto& fv = f.at("vertices");
      require(fv.size() == static_cast<std::size_t>(dim), ErrorCode::invalid_argument, "facet arity mismatch");
      for (const auto& v : fv) facets.push_back(v.get<Index>());
      patches.push_back(f.at("patch").get<int>());
    }
    return Mesh(dim, std::move(verts), std::move(cells), std::move(facets), std::move(patches));
  } catch (const json::exception& e) {
    fail(ErrorCode::io, std::string("malformed mesh document: ") + e.what());
  }
}

}  // namespace rg
