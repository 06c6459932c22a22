#include "coercivity.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SparseLU>

#include "error.hpp"
#include "problem.hpp"

namespace rg {

CoercivityReport estimate_theta0(const SparseMatrix& M, const SparseMatrix& K_unit, const SparseMatrix& B,
                                 double lambda_tilde, const CoercivityOptions& opts) {
  require(lambda_tilde > 0.0 && lambda_tilde < opts.lambda, ErrorCode::invalid_argument,
          "lambda_tilde must lie in (0, lambda)");
  require(M.rows() == K_unit.rows() && M.rows() == B.rows() && M.rows() == M.cols(), ErrorCode::invalid_argument,
          "pencil matrices have mismatched dimensions");
  require(opts.tol > 0.0, ErrorCode::invalid_argument, "tolerance must be positive");

  // <Theta u, u> only sees the symmetric part of B.
  const SparseMatrix Bt = B.transpose();
  const SparseMatrix A = lambda_tilde * K_unit + 0.5 * (B + Bt);
  const SparseMatrix H = M + K_unit;
  const SparseMatrix shifted = A + opts.shift * H;

  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(shifted);
  require(lu.info() == Eigen::Success, ErrorCode::not_converged, "factorization of the shifted pencil failed");

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vector x(M.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 1.0 + 0.5 * uni(rng);

  CoercivityReport rep;
  rep.lambda_tilde = lambda_tilde;
  auto normalize = [&H](Vector& v) { v /= std::sqrt(v.dot(H * v)); };
  normalize(x);
  double mu = x.dot(A * x);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Vector y = lu.solve(H * x);
    require(y.allFinite(), ErrorCode::not_converged, "inverse iteration produced non-finite values");
    normalize(y);
    x = std::move(y);
    const Vector Hx = H * x;
    const Vector Ax = A * x;
    mu = x.dot(Ax) / x.dot(Hx);
    rep.residual = (Ax - mu * Hx).norm() / Hx.norm();
    rep.iterations = it;
    if (rep.residual <= opts.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.theta0 = mu;
  rep.eigvec = x;
  return rep;
}

CoercivityReport check_h1(const Problem& problem, const std::vector<double>& t_samples,
                          const CoercivityOptions& opts) {
  std::vector<double> times = t_samples.empty() ? std::vector<double>{0.0} : t_samples;
  Forms forms(problem);
  CoercivityOptions o = opts;
  o.lambda = problem.field.lambda;

  const ThetaReport theta_rep = validate_theta(problem.theta, *problem.mesh, times);

  CoercivityReport worst;
  bool first = true;
  bool all_converged = true;
  CoercivityReport cached;
  bool have_cached = false;
  for (double t : times) {
    CoercivityReport rep;
    if (problem.theta.time_independent && have_cached) {
      rep = cached;
    } else {
      rep = estimate_theta0(forms.mass(), forms.unit_stiffness(), forms.robin_at(t), problem.lambda_tilde, o);
      cached = rep;
      have_cached = true;
    }
    all_converged = all_converged && rep.converged;
    if (first || rep.theta0 < worst.theta0) {
      worst = rep;
      worst.t_worst = t;
      first = false;
    }
  }
  worst.converged = all_converged;
  worst.delta = theta_rep.delta;
  worst.delta_ok = theta_rep.delta > 0.0 && theta_rep.delta > 1e-12 * problem.mesh->boundary_measure();
  return worst;
}

}  // namespace rg
