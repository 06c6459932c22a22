#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "error.hpp"
#include "green.hpp"
#include "parabolic.hpp"
#include "problem.hpp"

namespace rg {

namespace {
constexpr std::size_t kMaxTerms = 1000000;
// Each term carries a few ulps from the root, the trigonometric evaluations
// and the exponential; summation adds one more per term.
constexpr double kRoundoffFactor = 16.0;
}

RobinEigenbasis1D::RobinEigenbasis1D(double theta_left, double theta_right, double a, double b)
    : a_(a), b_(b), len_(b - a) {
  require(std::isfinite(a) && std::isfinite(b) && a < b, ErrorCode::invalid_argument, "series needs a < b");
  require(theta_left >= 0.0 && theta_right >= 0.0 && std::isfinite(theta_left) && std::isfinite(theta_right),
          ErrorCode::invalid_argument, "series oracle needs finite theta >= 0");
  tl_ = theta_left;
  tr_ = theta_right;
}

double RobinEigenbasis1D::matching(double w) const {
  const double l = tl_ * len_, r = tr_ * len_;
  return (l * r - w * w) * std::sin(w) + w * (l + r) * std::cos(w);
}

void RobinEigenbasis1D::ensure(std::size_t count) const {
  const double l = tl_ * len_, r = tr_ * len_;
  const bool neumann = l == 0.0 && r == 0.0;
  while (omega_.size() < count) {
    const std::size_t k = omega_.size();
    double w;
    if (neumann) {
      w = static_cast<double>(k) * M_PI;
    } else {
      double lo = static_cast<double>(k) * M_PI, hi = static_cast<double>(k + 1) * M_PI;
      double flo = k == 0 ? 1.0 : matching(lo);  // F > 0 just right of 0
      const double fhi = matching(hi);
      if (k == 0) lo = 0.0;
      require(flo * fhi < 0.0, ErrorCode::not_converged,
              "eigenvalue bracket failure on (" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
      for (;;) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = matching(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm > 0.0) == (flo > 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      w = 0.5 * (lo + hi);
    }
    double n2;
    if (w == 0.0) {
      n2 = 1.0;  // constant Neumann mode, phi = 1
    } else {
      n2 = 0.5 * (w * w + l * l) + (w * w - l * l) * std::sin(2.0 * w) / (4.0 * w) + l * std::sin(w) * std::sin(w);
    }
    omega_.push_back(w);
    norm_.push_back(std::sqrt(n2));
  }
}

double RobinEigenbasis1D::eigenvalue(std::size_t k) const {
  ensure(k + 1);
  return omega_[k] * omega_[k] / (len_ * len_);
}

double RobinEigenbasis1D::unit_phi(std::size_t k, double s) const {
  const double w = omega_[k];
  if (w == 0.0) return 1.0;
  return (w * std::cos(w * s) + tl_ * len_ * std::sin(w * s)) / norm_[k];
}

double RobinEigenbasis1D::eigenfunction(std::size_t k, double x) const {
  ensure(k + 1);
  return unit_phi(k, (x - a_) / len_) / std::sqrt(len_);
}

double RobinEigenbasis1D::integral(std::size_t k) const {
  ensure(k + 1);
  const double w = omega_[k];
  if (w == 0.0) return std::sqrt(len_);
  const double l = tl_ * len_;
  return std::sqrt(len_) * (std::sin(w) + l * (1.0 - std::cos(w)) / w) / norm_[k];
}

double RobinEigenbasis1D::matching_residual(std::size_t k) const {
  ensure(k + 1);
  const double w = omega_[k];
  const double l = tl_ * len_, r = tr_ * len_;
  const double scale = w * w + l * r + w * (l + r);
  return scale > 0.0 ? std::abs(matching(w)) / scale : 0.0;
}

double RobinEigenbasis1D::tail_bound(std::size_t count, double t) const {
  require(count >= 1 && t > 0.0, ErrorCode::invalid_argument, "tail bound needs count >= 1 and t > 0");
  // For k >= count >= 1 the frequency is at least k*pi >= 1 and the squared
  // sup of the normalized eigenfunction on the unit interval is at most 4.
  const double tu = t / (len_ * len_);
  const double c = static_cast<double>(count);
  const double first = std::exp(-(c * M_PI) * (c * M_PI) * tu);
  const double ratio = std::exp(-(2.0 * c + 1.0) * M_PI * M_PI * tu);
  return 4.0 / len_ * first / (1.0 - ratio);
}

namespace {

template <class Term>
SeriesValue sum_series(const RobinEigenbasis1D& basis, double t, std::size_t max_terms, Term term) {
  require(t > 0.0, ErrorCode::invalid_argument, "series needs t > 0");
  const std::size_t cap = max_terms == 0 ? kMaxTerms : max_terms;
  SeriesValue out;
  double abs_sum = 0.0;
  for (std::size_t k = 0; k < cap; ++k) {
    basis.ensure(k + 1);
    const double contribution = std::exp(-basis.eigenvalue(k) * t) * term(k);
    out.value += contribution;
    abs_sum += std::abs(contribution);
    out.terms = k + 1;
    out.tail_bound = basis.tail_bound(k + 1, t);
    out.roundoff_bound = kRoundoffFactor * std::numeric_limits<double>::epsilon() * abs_sum;
    if (out.tail_bound <= 1e-12 * std::abs(out.value) || out.tail_bound < 1e-300) return out;
  }
  fail(ErrorCode::precondition, "series truncation did not reach 1e-12 relative within " + std::to_string(cap) +
                                    " terms (tail bound " + std::to_string(out.tail_bound) + ")");
}

}  // namespace

SeriesValue series_heat_kernel_1d(const RobinEigenbasis1D& basis, double x, double y, double t,
                                  std::size_t max_terms) {
  return sum_series(basis, t, max_terms,
                    [&](std::size_t k) { return basis.eigenfunction(k, x) * basis.eigenfunction(k, y); });
}

SeriesValue series_heat_kernel_1d(double theta_left, double theta_right, double x, double y, double t,
                                  std::size_t max_terms) {
  const RobinEigenbasis1D basis(theta_left, theta_right);
  return series_heat_kernel_1d(basis, x, y, t, max_terms);
}

SeriesValue series_kernel_mass_1d(const RobinEigenbasis1D& basis, double y, double t, std::size_t max_terms) {
  return sum_series(basis, t, max_terms,
                    [&](std::size_t k) { return basis.integral(k) * basis.eigenfunction(k, y); });
}

double free_space_heat_kernel(int n, double r, double t) {
  require(t > 0.0, ErrorCode::invalid_argument, "free-space kernel needs t > 0");
  return std::pow(4.0 * M_PI * t, -0.5 * n) * std::exp(-r * r / (4.0 * t));
}

bool series_resolved(const SeriesValue& v) {
  return std::abs(v.value) > 10.0 * (v.tail_bound + v.roundoff_bound);
}

KernelSample series_sample(const RobinEigenbasis1D& basis, double x, double t, double y, double s,
                           bool* resolved) {
  KernelSample out;
  out.x = {x, 0.0};
  out.t = t;
  out.y = {y, 0.0};
  out.s = s;
  out.value = Matrix::Zero(1, 1);
  out.source = "oracle";
  if (resolved) *resolved = true;
  if (t > s) {
    const SeriesValue v = series_heat_kernel_1d(basis, x, y, t - s);
    out.value(0, 0) = v.value;
    if (resolved) *resolved = series_resolved(v);
  }
  return out;
}

double FdTrajectory::at(std::size_t k, double xq) const {
  require(k < values.size(), ErrorCode::invalid_argument, "snapshot index out of range");
  const std::size_t n = x.size() - 1;
  const double h = (x.back() - x.front()) / static_cast<double>(n);
  double pos = std::clamp((xq - x.front()) / h, 0.0, static_cast<double>(n));
  std::size_t i = std::min(static_cast<std::size_t>(pos), n - 1);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * values[k][i] + w * values[k][i + 1];
}

FdTrajectory dense_reference_solve(const Problem& problem, std::size_t fine_n, const TimeGrid& grid,
                                   const std::function<double(double)>& psi0,
                                   const std::function<double(double, double)>& f) {
  const Mesh& mesh = *problem.mesh;
  require(mesh.dimension() == 1 && problem.m() == 1, ErrorCode::invalid_argument,
          "finite-difference reference handles scalar 1D problems");
  require(problem.theta.kind == RobinOperator::Kind::multiplier, ErrorCode::invalid_argument,
          "finite-difference reference needs a multiplier theta");
  require(fine_n >= 2, ErrorCode::invalid_argument, "fine grid needs at least two cells");
  require(static_cast<bool>(psi0), ErrorCode::invalid_argument, "initial data required");
  grid.validate();
  double a = INFINITY, b = -INFINITY;
  for (const auto& p : mesh.vertices()) {
    a = std::min(a, p[0]);
    b = std::max(b, p[0]);
  }
  const std::size_t n = fine_n;
  const double h = (b - a) / static_cast<double>(n);

  FdTrajectory out;
  out.x.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out.x[i] = i == n ? b : a + h * static_cast<double>(i);
  std::vector<double> u(n + 1);
  for (std::size_t i = 0; i <= n; ++i) u[i] = psi0(out.x[i]);
  out.times.push_back(grid.t0);
  out.values.push_back(u);

  std::vector<double> vol(n + 1, h);
  vol[0] = vol[n] = 0.5 * h;
  std::vector<double> lower(n + 1), diag(n + 1), upper(n + 1), rhs(n + 1), cp(n + 1), dp(n + 1);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double t = grid.time(k + 1);
    const double dt = t - grid.time(k);
    std::fill(lower.begin(), lower.end(), 0.0);
    std::fill(upper.begin(), upper.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      diag[i] = vol[i];
      rhs[i] = vol[i] * (u[i] + (f ? dt * f(out.x[i], t) : 0.0));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double mid = 0.5 * (out.x[i] + out.x[i + 1]);
      const double flux = dt * problem.field.evaluate({mid, 0.0}, t, 0, 0)(0, 0) / h;
      diag[i] += flux;
      diag[i + 1] += flux;
      upper[i] -= flux;
      lower[i + 1] -= flux;
    }
    diag[0] += dt * problem.theta.theta({a, 0.0}, t)(0, 0);
    diag[n] += dt * problem.theta.theta({b, 0.0}, t)(0, 0);
    // Thomas algorithm.
    cp[0] = upper[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i <= n; ++i) {
      const double den = diag[i] - lower[i] * cp[i - 1];
      require(den != 0.0, ErrorCode::not_converged, "tridiagonal solve broke down");
      cp[i] = upper[i] / den;
      dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / den;
    }
    u[n] = dp[n];
    for (std::size_t i = n; i-- > 0;) u[i] = dp[i] - cp[i] * u[i + 1];
    out.times.push_back(t);
    out.values.push_back(u);
  }
  return out;
}

std::vector<double> dense_generalized_eig(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K,
                                          const Eigen::MatrixXd& B, double lambda_tilde) {
  const auto n = M.rows();
  require(n <= 2000, ErrorCode::invalid_argument, "dense eigensolve is capped at dimension 2000");
  require(M.cols() == n && K.rows() == n && K.cols() == n && B.rows() == n && B.cols() == n,
          ErrorCode::invalid_argument, "pencil matrices have mismatched dimensions");
  const Eigen::MatrixXd A = lambda_tilde * K + 0.5 * (B + B.transpose());
  const Eigen::MatrixXd H = M + K;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, H, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::not_converged, "dense generalized eigensolve failed");
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace rg
