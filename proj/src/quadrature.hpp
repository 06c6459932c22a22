#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "mesh.hpp"

namespace rg {

struct QuadPoint {
  Point x{0.0, 0.0};
  double weight = 0.0;
  /// P1 basis values of the cell (or facet) vertices at x.
  std::array<double, 3> basis{0.0, 0.0, 0.0};
};

namespace quad {

inline Point combine(const Mesh& mesh, std::span<const Index> v, const std::array<double, 3>& l) {
  Point p{0.0, 0.0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    p[0] += l[i] * mesh.vertex(v[i])[0];
    p[1] += l[i] * mesh.vertex(v[i])[1];
  }
  return p;
}

/// Gradient rule: midpoint in 1D, symmetric three-point rule in 2D.
inline std::vector<QuadPoint> stiffness_rule(const Mesh& mesh, Index c) {
  auto v = mesh.cell(c);
  const double meas = mesh.cell_measure(c);
  std::vector<QuadPoint> pts;
  if (mesh.dimension() == 1) {
    std::array<double, 3> l{0.5, 0.5, 0.0};
    pts.push_back({combine(mesh, v, l), meas, l});
  } else {
    constexpr double a = 1.0 / 6.0, b = 2.0 / 3.0;
    for (const auto& l : {std::array<double, 3>{b, a, a}, std::array<double, 3>{a, b, a},
                          std::array<double, 3>{a, a, b}})
      pts.push_back({combine(mesh, v, l), meas / 3.0, l});
  }
  return pts;
}

/// Degree-2 exact rule for mass and load integrals.
inline std::vector<QuadPoint> mass_rule(const Mesh& mesh, Index c) {
  if (mesh.dimension() == 2) return stiffness_rule(mesh, c);
  auto v = mesh.cell(c);
  const double meas = mesh.cell_measure(c);
  const double g = 0.5 / std::sqrt(3.0);
  std::vector<QuadPoint> pts;
  for (double s : {0.5 - g, 0.5 + g}) {
    std::array<double, 3> l{1.0 - s, s, 0.0};
    pts.push_back({combine(mesh, v, l), 0.5 * meas, l});
  }
  return pts;
}

/// Boundary rule: unit point mass in 1D, two-point Gauss on each edge in 2D.
inline std::vector<QuadPoint> facet_rule(const Mesh& mesh, Index f) {
  auto v = mesh.facet(f);
  std::vector<QuadPoint> pts;
  if (mesh.dimension() == 1) {
    pts.push_back({mesh.vertex(v[0]), 1.0, {1.0, 0.0, 0.0}});
  } else {
    const double len = mesh.facet_measure(f);
    const double g = 0.5 / std::sqrt(3.0);
    for (double s : {0.5 - g, 0.5 + g}) {
      std::array<double, 3> l{1.0 - s, s, 0.0};
      pts.push_back({combine(mesh, v, l), 0.5 * len, l});
    }
  }
  return pts;
}

}  // namespace quad
}  // namespace rg
