#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rg {

using Index = std::size_t;

/// Spatial point. The second coordinate is unused (zero) in 1D.
using Point = std::array<double, 2>;

double distance(const Point& a, const Point& b, int dim);

struct SpaceTimePoint {
  Point x{0.0, 0.0};
  double t = 0.0;
};

/// max(|x - y|, sqrt|t - s|)
double parabolic_distance(const SpaceTimePoint& a, const SpaceTimePoint& b, int dim);

/// Location of a point inside a cell, as barycentric weights on its vertices.
struct CellLocation {
  Index cell = 0;
  std::array<double, 3> weights{0.0, 0.0, 0.0};
};

/// Simplicial mesh of an interval (segments) or a polygon (triangles).
///
/// Cells and boundary facets are stored flat with strides dim+1 and dim.
/// Construction validates every invariant: positive cell measure with
/// counter-clockwise orientation in 2D, and boundary facets that cover the
/// topological boundary exactly once. Instances are immutable.
class Mesh {
 public:
  Mesh(int dimension, std::vector<Point> vertices, std::vector<Index> cells,
       std::vector<Index> facets, std::vector<int> facet_patches);

  int dimension() const { return dim_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return cells_.size() / static_cast<std::size_t>(dim_ + 1); }
  std::size_t num_facets() const { return facet_patches_.size(); }

  const Point& vertex(Index v) const { return vertices_[v]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  std::span<const Index> cell(Index c) const;
  std::span<const Index> facet(Index f) const;
  int facet_patch(Index f) const { return facet_patches_[f]; }

  double cell_measure(Index c) const;
  /// Length of an edge in 2D; a boundary point has unit counting measure in 1D.
  double facet_measure(Index f) const;
  double measure() const;
  double boundary_measure() const;
  double diameter() const { return diam_; }
  /// Largest cell diameter.
  double mesh_size() const { return h_; }

  const std::vector<bool>& boundary_vertices() const { return on_boundary_; }

  std::optional<CellLocation> locate(const Point& p, double tol = 1e-12) const;
  /// Nearest vertex by Euclidean distance (ties broken by lowest index).
  Index nearest_vertex(const Point& p) const;

 private:
  int dim_;
  std::vector<Point> vertices_;
  std::vector<Index> cells_;
  std::vector<Index> facets_;
  std::vector<int> facet_patches_;
  std::vector<bool> on_boundary_;
  double diam_ = 0.0;
  double h_ = 0.0;

  void validate();
};

Mesh build_interval_mesh(double a, double b, std::size_t n_cells);
Mesh build_rectangle_mesh(double w, double h, std::size_t nx, std::size_t ny);
/// [0,1]^2 minus (0.5,1]^2 on a 2n x 2n grid of squares.
Mesh build_lshape_mesh(std::size_t n);
/// Uniform refinement: bisection in 1D, red refinement in 2D.
Mesh refine(const Mesh& mesh);

std::string mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const std::string& text);

}  // namespace rg
