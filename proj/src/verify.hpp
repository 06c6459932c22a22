#pragma once

#include <map>
#include <string>
#include <vector>

#include "green.hpp"

namespace rg {

struct GaussianFit {
  double C = 0.0;
  double kappa = 0.0;
  double r_squared = 0.0;
  /// Samples above slack * envelope at the reported (C, kappa).
  std::size_t violations = 0;
  double slack = 1.0;
  std::size_t n_samples = 0;
  /// Constant of the raw least-squares fit, before inflation.
  double C_fit = 0.0;
  bool pass = false;
};

enum class BoundKind { offdiag_power, elliptic_log, elliptic_power, elliptic_bounded, local_bound, symmetry };
std::string to_string(BoundKind kind);

struct BoundReport {
  BoundKind kind = BoundKind::offdiag_power;
  std::map<std::string, double> constants;
  double exponent_target = 0.0;
  double exponent_fitted = 0.0;
  std::size_t n_samples = 0;
  std::size_t excluded = 0;
  bool pass = false;
  std::string note;
};

/// Frobenius norm of a sample value.
double sample_magnitude(const KernelSample& s);

/// Gaussian envelope C min(sqrt(t-s), diam)^{-n} exp(-kappa |x-y|^2/(t-s)).
double gaussian_envelope(double C, double kappa, int n, double diam, const KernelSample& s);

/// Least-squares fit of log(|G| min(sqrt(tau), diam)^n) against |x-y|^2/tau,
/// then C is raised until no sample exceeds slack times the envelope.
/// Samples are sorted first so the result does not depend on their order.
GaussianFit fit_gaussian_bound(const std::vector<KernelSample>& samples, int n, double diam, double slack = 2.0);

/// Samples exceeding slack * envelope of an existing fit.
std::size_t count_envelope_violations(const GaussianFit& fit, const std::vector<KernelSample>& samples, int n,
                                      double diam);

/// Power-law fit |G| ~ C d_P^{-p} to the largest magnitude in each dyadic
/// level of d_P, over samples with 4h <= d_P <= max_distance. Passes when
/// p >= n - 0.3 and every kept sample lies within `slack` of the envelope.
BoundReport check_offdiagonal_decay(const std::vector<KernelSample>& samples, int n, double h, double max_distance,
                                    double slack = 2.0);

struct SymmetryPair {
  Index x_vertex = 0;
  double t = 0.0;
  Index y_vertex = 0;
  double s = 0.0;
};

/// max over pairs of |G(X,Y) - G*(Y,X)^T| / |G(X,Y)|; passes at `tolerance`.
BoundReport check_symmetry(const Problem& problem, const std::vector<SymmetryPair>& pairs, const TimeGrid& grid,
                           double tolerance);

/// Combines a base-mesh and a refined-mesh symmetry report: the base error
/// must be within the base tolerance and the refined error strictly smaller.
BoundReport symmetry_under_refinement(const BoundReport& base, const BoundReport& refined);

/// Bounds for a nodal elliptic Green's function (ndof x m) with source y.
/// In 2D the magnitudes are fitted against 1 + ln(diam/|x-y|) over vertices
/// with |x-y| >= 4h; in 1D the report is downgraded to plain boundedness.
BoundReport check_elliptic_bounds(const Matrix& G, const Mesh& mesh, Index y_vertex, double slack = 2.0);

/// max |G(x,y) - (2 pi)^{-1} ln(1/|x-y|)| over vertices with r_min <= |x-y| <= r_max (scalar, 2D).
double log_remainder_bound(const Matrix& G, const Mesh& mesh, Index y_vertex, double r_min, double r_max);

/// sup over Q^-_{R/2}(x0, b) of |u| divided by R^{-(n+2)/2} |u|_{L^2(Omega x (b-R^2, b))},
/// where b is the final time of the trajectory. The report's "ratio" constant
/// is the empirical analogue of A_1.
BoundReport check_local_boundedness(const Trajectory& traj, const Point& x0, double R);

/// Ratios over a set of radii; passes when neighbouring radii differ by at
/// most `factor`.
BoundReport local_boundedness_ladder(const Trajectory& traj, const Point& x0, const std::vector<double>& radii,
                                     double factor = 2.0);

struct DecayCheck {
  bool pass = false;
  /// max over i < j of log(I_j / (I_i exp(-2 theta0 (t_j - t_i)))).
  double worst_log_excess = 0.0;
  double tol = 0.0;
  std::size_t pairs = 0;
};

/// I(t_j) <= I(t_i) exp(-2 theta0 (t_j - t_i)) (1 + tol) for every grid pair
/// i < j. A negative tol selects 0.05 + dt theta0.
DecayCheck check_decay_vs_theta0(const Trajectory& traj, double theta0, double tol = -1.0);

}  // namespace rg
