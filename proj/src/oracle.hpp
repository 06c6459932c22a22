#pragma once

// Reference solutions that share no assembly or solver code with the
// finite-element path.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mesh.hpp"

namespace rg {

struct Problem;
struct TimeGrid;
struct KernelSample;

/// Eigenpairs of -u'' = mu u on (a, b) with -u'(a) + theta_left u(a) = 0 and
/// u'(b) + theta_right u(b) = 0, theta >= 0.
class RobinEigenbasis1D {
 public:
  RobinEigenbasis1D(double theta_left, double theta_right, double a = 0.0, double b = 1.0);

  /// Makes sure at least `count` eigenpairs are available.
  void ensure(std::size_t count) const;
  double eigenvalue(std::size_t k) const;
  /// L^2-normalized eigenfunction k (0-based) at x.
  double eigenfunction(std::size_t k, double x) const;
  /// Integral of eigenfunction k over (a, b).
  double integral(std::size_t k) const;
  /// Normalized residual of the matching condition at root k.
  double matching_residual(std::size_t k) const;

  /// Upper bound on sum_{k >= count} exp(-mu_k t) max|phi_k|^2.
  double tail_bound(std::size_t count, double t) const;

  double theta_left() const { return tl_; }
  double theta_right() const { return tr_; }

 private:
  double tl_, tr_, a_, b_, len_;
  // Unit-interval frequencies and norms.
  mutable std::vector<double> omega_;
  mutable std::vector<double> norm_;

  double matching(double w) const;
  double unit_phi(std::size_t k, double s) const;
};

struct SeriesValue {
  double value = 0.0;
  std::size_t terms = 0;
  double tail_bound = 0.0;
  /// Estimate of the floating-point error of the partial sum,
  /// 16 eps sum_k |term_k|. Values below it are not resolved.
  double roundoff_bound = 0.0;
};

/// K(x,y,t) = sum_k exp(-mu_k t) phi_k(x) phi_k(y) on the unit interval (or
/// (a,b) through the basis), truncated once the computed tail bound is below
/// 1e-12 relative to the partial sum. max_terms = 0 means no cap; a cap that
/// is too small raises a precondition error.
SeriesValue series_heat_kernel_1d(const RobinEigenbasis1D& basis, double x, double y, double t,
                                  std::size_t max_terms = 0);
SeriesValue series_heat_kernel_1d(double theta_left, double theta_right, double x, double y, double t,
                                  std::size_t max_terms = 0);

/// int_a^b K(x, y, t) dx by the same series.
SeriesValue series_kernel_mass_1d(const RobinEigenbasis1D& basis, double y, double t, std::size_t max_terms = 0);

/// True when |value| exceeds ten times the combined truncation and roundoff
/// bounds, i.e. the series actually determines the value.
bool series_resolved(const SeriesValue& v);

/// Free-space heat kernel (4 pi t)^{-n/2} exp(-r^2 / 4t).
double free_space_heat_kernel(int n, double r, double t);

/// Series samples in the kernel sample schema, tagged "oracle". `resolved`,
/// when given, receives series_resolved of the underlying sum (true for the
/// exact zeros at t <= s).
KernelSample series_sample(const RobinEigenbasis1D& basis, double x, double t, double y, double s,
                           bool* resolved = nullptr);

struct FdTrajectory {
  std::vector<double> x;
  std::vector<double> times;
  /// values[k][i] = u(x_i, times[k]).
  std::vector<std::vector<double>> values;

  /// Linear interpolation in space at snapshot k.
  double at(std::size_t k, double xq) const;
};

/// Vertex-centred finite volumes on fine_n uniform cells with Robin
/// flux closure at both ends and implicit Euler in time. Scalar 1D problems
/// with a multiplier theta only; coefficients are evaluated at the implicit
/// level.
FdTrajectory dense_reference_solve(const Problem& problem, std::size_t fine_n, const TimeGrid& grid,
                                   const std::function<double(double)>& psi0,
                                   const std::function<double(double, double)>& f = {});

/// Full sorted spectrum of the pencil (lambda_tilde K + sym B, M + K) by a
/// dense generalized symmetric eigensolver. Dimension capped at 2000.
std::vector<double> dense_generalized_eig(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K,
                                          const Eigen::MatrixXd& B, double lambda_tilde);

}  // namespace rg
