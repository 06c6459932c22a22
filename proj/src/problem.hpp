#pragma once

#include <memory>

#include "assembly.hpp"

namespace rg {

/// Operator data of one Robin problem on a fixed mesh.
struct Problem {
  std::shared_ptr<const Mesh> mesh;
  CoefficientField field;
  RobinOperator theta;
  double lambda_tilde = 0.5;
  bool lumped_mass = false;

  int m() const { return field.m; }
  std::size_t ndof() const { return mesh->num_vertices() * static_cast<std::size_t>(field.m); }
  bool time_independent() const { return field.time_independent && theta.time_independent; }
  /// Problem with adjoint coefficients and Theta*.
  Problem adjoint() const;
  Problem on_mesh(std::shared_ptr<const Mesh> other) const;
};

/// Checks compatibility of the pieces; lambda_tilde <= 0 selects lambda / 2.
Problem make_problem(std::shared_ptr<const Mesh> mesh, CoefficientField field, RobinOperator theta,
                     double lambda_tilde = 0.0, bool lumped_mass = false);

/// Assembled forms of a problem at time t. Mass and unit stiffness are
/// time independent and assembled once; K and B are cached when the data
/// permits.
class Forms {
 public:
  explicit Forms(const Problem& problem);

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& unit_stiffness() const { return unit_; }
  /// K(t) + B(t)
  SparseMatrix operator_at(double t) const;
  SparseMatrix stiffness_at(double t) const;
  SparseMatrix robin_at(double t) const;

 private:
  Problem problem_;
  bool k_cached_ = false;
  bool b_cached_ = false;
  SparseMatrix mass_;
  SparseMatrix unit_;
  SparseMatrix k0_;
  SparseMatrix b0_;
};

}  // namespace rg
