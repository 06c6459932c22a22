#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mesh.hpp"

namespace rg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Coefficient tensor A^{ab}(x,t): for spatial directions a, b the m x m
/// block with entries a^{ab}_{ij}. `lambda` is the claimed ellipticity
/// constant in (0,1].
struct CoefficientField {
  int m = 1;
  int n = 1;
  std::function<Matrix(const Point& x, double t, int alpha, int beta)> evaluate;
  double lambda = 1.0;
  bool time_independent = true;
  std::string name;

  /// Full (n*m) x (n*m) matrix T with T[(a,i),(b,j)] = a^{ab}_{ij}; the
  /// quadratic form of the tensor is xi^T T xi.
  Matrix tensor(const Point& x, double t) const;
  /// Coefficients of the formal adjoint: A*^{ab} = (A^{ba})^T.
  CoefficientField adjoint() const;
  CoefficientField scaled(double factor) const;
};

/// Identity tensor (the Laplacian applied componentwise).
CoefficientField unit_coefficients(int m, int n);

/// Boundary operator Theta(t). Either a pointwise multiplier theta(x,t), or a
/// finite-rank nonlocal form
///   <Theta u, v> = sum_{k,l} c_{kl} (int phi_k . u dS)(int psi_l . v dS).
struct RobinOperator {
  enum class Kind { multiplier, finite_rank };

  Kind kind = Kind::multiplier;
  int m = 1;
  std::function<Matrix(const Point& x, double t)> theta;
  std::vector<std::function<Vector(const Point& x)>> phi;
  std::vector<std::function<Vector(const Point& x)>> psi;
  Matrix coupling;
  bool time_independent = true;
  bool claimed_nonneg = true;
  std::string name;

  int rank() const { return static_cast<int>(phi.size()); }
  /// Theta*: transposed multiplier, or swapped profiles with c^T.
  RobinOperator adjoint() const;
  RobinOperator scaled(double factor) const;
};

struct EllipticityReport {
  double lambda_lower = 0.0;
  double upper_norm = 0.0;
  bool lambda_upper_ok = false;
  Point worst_point{0.0, 0.0};
  double worst_time = 0.0;
  std::size_t samples = 0;
  /// lambda_lower >= claimed lambda (within 1e-10) and the upper bound held.
  bool ok = false;
};

/// Samples the quadratic form of A over every interior quadrature point and
/// time sample, using `dir_samples` seeded random unit directions per point
/// together with the exact extreme eigen/singular values of the pointwise
/// tensor.
EllipticityReport validate_ellipticity(const CoefficientField& field, const Mesh& mesh,
                                       const std::vector<double>& t_samples, int dir_samples = 64,
                                       std::uint64_t seed = 0x5eed);

struct ThetaReport {
  double delta = 0.0;
  bool nonneg_ok = false;
  double worst_time = 0.0;
};

/// delta = min over t of the smallest eigenvalue of the symmetric part of the
/// boundary integral of theta. For the finite-rank kind the m x m matrix
/// <Theta e_i, e_j> on constant fields takes the role of that integral.
ThetaReport validate_theta(const RobinOperator& theta, const Mesh& mesh, const std::vector<double>& t_samples);

/// Named catalog entries, e.g. "laplace", "diag(2,0.5)", "theta_const(1)".
/// Unknown names throw ErrorCode::unknown_name.
CoefficientField coefficient_from_name(const std::string& spec, int m, int n);
RobinOperator theta_from_name(const std::string& spec, int m, const Mesh& mesh);
std::vector<std::string> coefficient_catalog();
std::vector<std::string> theta_catalog();

}  // namespace rg
