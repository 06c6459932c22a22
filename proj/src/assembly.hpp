#pragma once

#include <functional>
#include <string>

#include <Eigen/Sparse>

#include "coeff.hpp"
#include "mesh.hpp"

namespace rg {

using SparseMatrix = Eigen::SparseMatrix<double>;

// DOF ordering is component-major: dof(k, v) = k * num_vertices + v.
inline Index dof(Index component, Index vertex, std::size_t num_vertices) {
  return component * num_vertices + vertex;
}

/// Vector-valued source term f(x, t) in R^m.
using SourceFn = std::function<Vector(const Point& x, double t)>;

/// Consistent (or row-sum lumped) P1 mass matrix for m components.
SparseMatrix assemble_mass(const Mesh& mesh, int m, bool lumped = false);

/// Matrix of a(u, v; t) = int A^{ab}(., t) D_b u . D_a v; rows index the test
/// function, columns the trial function.
SparseMatrix assemble_stiffness(const Mesh& mesh, const CoefficientField& field, double t);

/// Factored finite-rank part B = left * core * right^T (dense N x r factors).
struct LowRankForm {
  Matrix left;
  Matrix core;
  Matrix right;
};

/// Matrix of <Theta(t) u, v>. The finite-rank kind is materialized on the
/// boundary DOFs; `factors`, when given, receives its factored form.
SparseMatrix assemble_robin(const Mesh& mesh, const RobinOperator& theta, double t, LowRankForm* factors = nullptr);

/// Vector with entries int f(., t) . phi_i.
Vector assemble_load(const Mesh& mesh, int m, const SourceFn& f, double t);

/// Vector w with w . u = u_k(x) for a P1 field u (point evaluation functional).
Vector point_functional(const Mesh& mesh, int m, const Point& x, Index component);

/// Conjugate gradients with diagonal scaling; throws on non-convergence.
Vector solve_spd(const SparseMatrix& A, const Vector& b, double tol, int max_iterations = 0);

bool is_symmetric(const SparseMatrix& A, double rel_tol = 1e-12);

/// Coordinate text: one "row col value" line per stored entry, 17 digits.
void write_coordinate(const SparseMatrix& A, const std::string& path);

}  // namespace rg
