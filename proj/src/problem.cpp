#include "problem.hpp"

#include "error.hpp"

namespace rg {

Problem Problem::adjoint() const {
  Problem p = *this;
  p.field = field.adjoint();
  p.theta = theta.adjoint();
  return p;
}

Problem Problem::on_mesh(std::shared_ptr<const Mesh> other) const {
  require(other && other->dimension() == mesh->dimension(), ErrorCode::invalid_argument,
          "replacement mesh must have the same dimension");
  Problem p = *this;
  p.mesh = std::move(other);
  return p;
}

Problem make_problem(std::shared_ptr<const Mesh> mesh, CoefficientField field, RobinOperator theta,
                     double lambda_tilde, bool lumped_mass) {
  require(mesh != nullptr, ErrorCode::invalid_argument, "problem requires a mesh");
  require(field.n == mesh->dimension(), ErrorCode::invalid_argument,
          "coefficient dimension does not match mesh dimension");
  require(theta.m == field.m, ErrorCode::invalid_argument, "theta and coefficients disagree on component count");
  require(field.lambda > 0.0 && field.lambda <= 1.0, ErrorCode::invalid_argument, "lambda must lie in (0, 1]");
  if (lambda_tilde <= 0.0) lambda_tilde = 0.5 * field.lambda;
  require(lambda_tilde < field.lambda, ErrorCode::invalid_argument, "lambda_tilde must lie in (0, lambda)");
  if (theta.kind == RobinOperator::Kind::finite_rank) {
    require(theta.phi.size() == theta.psi.size() && theta.coupling.rows() == theta.rank() &&
                theta.coupling.cols() == theta.rank(),
            ErrorCode::invalid_argument, "finite-rank theta has inconsistent profile/coupling sizes");
  }
  Problem p;
  p.mesh = std::move(mesh);
  p.field = std::move(field);
  p.theta = std::move(theta);
  p.lambda_tilde = lambda_tilde;
  p.lumped_mass = lumped_mass;
  return p;
}

Forms::Forms(const Problem& problem) : problem_(problem) {
  const Mesh& mesh = *problem_.mesh;
  mass_ = assemble_mass(mesh, problem_.m(), problem_.lumped_mass);
  unit_ = assemble_stiffness(mesh, unit_coefficients(problem_.m(), mesh.dimension()), 0.0);
  if (problem_.field.time_independent) {
    k0_ = assemble_stiffness(mesh, problem_.field, 0.0);
    k_cached_ = true;
  }
  if (problem_.theta.time_independent) {
    b0_ = assemble_robin(mesh, problem_.theta, 0.0);
    b_cached_ = true;
  }
}

SparseMatrix Forms::stiffness_at(double t) const {
  return k_cached_ ? k0_ : assemble_stiffness(*problem_.mesh, problem_.field, t);
}

SparseMatrix Forms::robin_at(double t) const {
  return b_cached_ ? b0_ : assemble_robin(*problem_.mesh, problem_.theta, t);
}

SparseMatrix Forms::operator_at(double t) const { return stiffness_at(t) + robin_at(t); }

}  // namespace rg
