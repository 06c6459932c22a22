#include "coeff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "error.hpp"
#include "quadrature.hpp"

namespace rg {

Matrix CoefficientField::tensor(const Point& x, double t) const {
  Matrix T(n * m, n * m);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Matrix block = evaluate(x, t, a, b);
      require(block.rows() == m && block.cols() == m, ErrorCode::internal,
              "coefficient '" + name + "' returned a block of the wrong size");
      T.block(a * m, b * m, m, m) = block;
    }
  return T;
}

CoefficientField CoefficientField::adjoint() const {
  CoefficientField out = *this;
  auto base = evaluate;
  out.evaluate = [base](const Point& x, double t, int alpha, int beta) -> Matrix {
    return base(x, t, beta, alpha).transpose();
  };
  out.name = name + "*";
  return out;
}

CoefficientField CoefficientField::scaled(double factor) const {
  CoefficientField out = *this;
  auto base = evaluate;
  out.evaluate = [base, factor](const Point& x, double t, int alpha, int beta) -> Matrix {
    return factor * base(x, t, alpha, beta);
  };
  out.name = std::to_string(factor) + "*" + name;
  return out;
}

CoefficientField unit_coefficients(int m, int n) {
  CoefficientField f;
  f.m = m;
  f.n = n;
  f.lambda = 1.0;
  f.time_independent = true;
  f.name = "unit";
  f.evaluate = [m](const Point&, double, int alpha, int beta) -> Matrix {
    return alpha == beta ? Matrix(Matrix::Identity(m, m)) : Matrix(Matrix::Zero(m, m));
  };
  return f;
}

RobinOperator RobinOperator::adjoint() const {
  RobinOperator out = *this;
  if (kind == Kind::multiplier) {
    auto base = theta;
    out.theta = [base](const Point& x, double t) -> Matrix { return base(x, t).transpose(); };
  } else {
    std::swap(out.phi, out.psi);
    out.coupling = coupling.transpose();
  }
  out.name = name + "*";
  return out;
}

RobinOperator RobinOperator::scaled(double factor) const {
  RobinOperator out = *this;
  if (kind == Kind::multiplier) {
    auto base = theta;
    out.theta = [base, factor](const Point& x, double t) -> Matrix { return factor * base(x, t); };
  } else {
    out.coupling = factor * coupling;
  }
  out.claimed_nonneg = claimed_nonneg && factor >= 0.0;
  out.name = std::to_string(factor) + "*" + name;
  return out;
}

EllipticityReport validate_ellipticity(const CoefficientField& field, const Mesh& mesh,
                                       const std::vector<double>& t_samples, int dir_samples, std::uint64_t seed) {
  require(dir_samples >= 1, ErrorCode::invalid_argument, "dir_samples must be >= 1");
  require(field.n == mesh.dimension(), ErrorCode::invalid_argument, "coefficient dimension does not match mesh");
  std::vector<double> times = t_samples.empty() ? std::vector<double>{0.0} : t_samples;

  const int d = field.n * field.m;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&]() {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = normal(rng);
    return Vector(v / v.norm());
  };

  EllipticityReport rep;
  rep.lambda_lower = std::numeric_limits<double>::infinity();
  for (double t : times)
    for (Index c = 0; c < mesh.num_cells(); ++c)
      for (const auto& q : quad::stiffness_rule(mesh, c)) {
        Matrix T;
        try {
          T = field.tensor(q.x, t);
        } catch (const Error&) {
          throw;
        } catch (const std::exception& e) {
          fail(ErrorCode::internal, std::string("coefficient evaluation failed: ") + e.what());
        }
        require(T.allFinite(), ErrorCode::internal, "coefficient evaluation produced non-finite values");
        const Matrix sym = 0.5 * (T + T.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
        double lower = es.eigenvalues()[0];
        double upper = Eigen::JacobiSVD<Matrix>(T).singularValues()[0];
        for (int s = 0; s < dir_samples; ++s) {
          const Vector xi = random_unit();
          const Vector eta = random_unit();
          lower = std::min(lower, xi.dot(T * xi));
          upper = std::max(upper, std::abs(eta.dot(T * xi)));
        }
        ++rep.samples;
        if (lower < rep.lambda_lower) {
          rep.lambda_lower = lower;
          rep.worst_point = q.x;
          rep.worst_time = t;
        }
        rep.upper_norm = std::max(rep.upper_norm, upper);
      }
  rep.lambda_upper_ok = rep.upper_norm <= 1.0 / field.lambda + 1e-10;
  rep.ok = rep.lambda_upper_ok && rep.lambda_lower >= field.lambda - 1e-10;
  return rep;
}

ThetaReport validate_theta(const RobinOperator& theta, const Mesh& mesh, const std::vector<double>& t_samples) {
  require(mesh.num_facets() > 0, ErrorCode::precondition, "mesh has an empty boundary");
  std::vector<double> times = t_samples.empty() ? std::vector<double>{0.0} : t_samples;
  const int m = theta.m;

  ThetaReport rep;
  rep.delta = std::numeric_limits<double>::infinity();
  rep.nonneg_ok = true;
  for (double t : times) {
    Matrix integral = Matrix::Zero(m, m);
    if (theta.kind == RobinOperator::Kind::multiplier) {
      for (Index f = 0; f < mesh.num_facets(); ++f)
        for (const auto& q : quad::facet_rule(mesh, f)) {
          const Matrix th = theta.theta(q.x, t);
          integral += q.weight * th;
          Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (th + th.transpose()), Eigen::EigenvaluesOnly);
          if (es.eigenvalues()[0] < -1e-10) rep.nonneg_ok = false;
        }
    } else {
      const int r = theta.rank();
      Matrix a = Matrix::Zero(m, r), b = Matrix::Zero(m, r);
      for (Index f = 0; f < mesh.num_facets(); ++f)
        for (const auto& q : quad::facet_rule(mesh, f))
          for (int k = 0; k < r; ++k) {
            a.col(k) += q.weight * theta.phi[k](q.x);
            b.col(k) += q.weight * theta.psi[k](q.x);
          }
      // <Theta e_j, e_i> = sum_kl c_kl a_k[j] b_l[i]
      integral = b * theta.coupling.transpose() * a.transpose();
      const Matrix csym = 0.5 * (theta.coupling + theta.coupling.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(csym, Eigen::EigenvaluesOnly);
      bool same_profiles = true;
      for (Index f = 0; f < mesh.num_facets() && same_profiles; ++f)
        for (const auto& q : quad::facet_rule(mesh, f))
          for (int k = 0; k < r; ++k)
            if ((theta.phi[k](q.x) - theta.psi[k](q.x)).norm() > 1e-14) same_profiles = false;
      if (!same_profiles || es.eigenvalues()[0] < -1e-10) rep.nonneg_ok = false;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (integral + integral.transpose()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues()[0] < rep.delta) {
      rep.delta = es.eigenvalues()[0];
      rep.worst_time = t;
    }
  }
  return rep;
}

}  // namespace rg
