#include "parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "error.hpp"
#include "quadrature.hpp"

namespace rg {

void TimeGrid::validate() const {
  require(std::isfinite(t0) && std::isfinite(t1), ErrorCode::invalid_argument, "time window must be finite");
  require(t0 < t1, ErrorCode::invalid_argument, "time window requires t0 < t1");
  require(steps >= 1, ErrorCode::invalid_argument, "time grid needs at least one step");
}

StepLoad pointwise_load(const Problem& problem, SourceFn f, Scheme scheme, Direction direction) {
  if (!f) return {};
  auto mesh = problem.mesh;
  const int m = problem.m();
  return [mesh, m, f = std::move(f), scheme, direction](double t_lo, double t_hi) -> Vector {
    if (scheme == Scheme::crank_nicolson)
      return 0.5 * (assemble_load(*mesh, m, f, t_lo) + assemble_load(*mesh, m, f, t_hi));
    return assemble_load(*mesh, m, f, direction == Direction::forward ? t_hi : t_lo);
  };
}

Stepper::Stepper(const Problem& problem, Scheme scheme, Direction direction)
    : problem_(problem), forms_(problem), scheme_(scheme), direction_(direction) {
  if (problem_.time_independent()) {
    fixed_op_ = op(0.0);
    fixed_ = true;
  }
}

SparseMatrix Stepper::op(double t) const {
  if (fixed_) return fixed_op_;
  SparseMatrix L = forms_.operator_at(t);
  if (direction_ == Direction::backward) {
    SparseMatrix Lt = L.transpose();
    return Lt;
  }
  return L;
}

std::shared_ptr<Stepper::System> Stepper::factor(SparseMatrix A) const {
  auto sys = std::make_shared<System>();
  sys->matrix = std::move(A);
  sys->lu.compute(sys->matrix);
  require(sys->lu.info() == Eigen::Success, ErrorCode::not_converged,
          "step matrix factorization failed (loss of positivity?)");
  return sys;
}

std::shared_ptr<Stepper::System> Stepper::system_for(double dt, double implicit_weight, double t_to) const {
  const SparseMatrix& M = forms_.mass();
  if (!fixed_) return factor(M + implicit_weight * op(t_to));
  // Step sizes recovered from grid times differ in the last bits; treat
  // nearby values as one key.
  const double tol = 1e-9 * dt;
  auto it = cache_.lower_bound(dt - tol);
  if (it != cache_.end() && it->first <= dt + tol) return it->second;
  return cache_.emplace(dt, factor(M + implicit_weight * fixed_op_)).first->second;
}

Matrix Stepper::solve_block(const std::shared_ptr<System>& sys, const Matrix& rhs) const {
  Matrix X = sys->lu.solve(rhs);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double rnorm = rhs.col(c).norm();
    if (rnorm == 0.0) {
      X.col(c).setZero();
      continue;
    }
    const double res = (sys->matrix * X.col(c) - rhs.col(c)).norm();
    require(X.col(c).allFinite() && res <= 1e-10 * rnorm, ErrorCode::not_converged,
            "step solve residual " + std::to_string(res / rnorm) + " exceeds 1e-10");
  }
  return X;
}

Matrix Stepper::step_block(const Matrix& U, double t_from, double t_to) const {
  const double dt = std::abs(t_to - t_from);
  require(dt > 0.0, ErrorCode::invalid_argument, "time step must be positive");
  require((direction_ == Direction::forward) == (t_to > t_from), ErrorCode::invalid_argument,
          "step direction does not match the stepper");
  const double implicit_weight = scheme_ == Scheme::crank_nicolson ? 0.5 * dt : dt;
  Matrix rhs = forms_.mass() * U;
  if (scheme_ == Scheme::crank_nicolson) rhs -= implicit_weight * (op(t_from) * U);
  return solve_block(system_for(dt, implicit_weight, t_to), rhs);
}

Matrix Stepper::impulse_block(const Matrix& R, double t_from, double t_to) const {
  const double dt = std::abs(t_to - t_from);
  require(dt > 0.0, ErrorCode::invalid_argument, "time step must be positive");
  require((direction_ == Direction::forward) == (t_to > t_from), ErrorCode::invalid_argument,
          "step direction does not match the stepper");
  const double implicit_weight = scheme_ == Scheme::crank_nicolson ? 0.5 * dt : dt;
  return solve_block(system_for(dt, implicit_weight, t_to), R);
}

Vector Stepper::step(const Vector& u, double t_from, double t_to, const Vector* load) const {
  const double dt = std::abs(t_to - t_from);
  require(dt > 0.0, ErrorCode::invalid_argument, "time step must be positive");
  require((direction_ == Direction::forward) == (t_to > t_from), ErrorCode::invalid_argument,
          "step direction does not match the stepper");
  const SparseMatrix& M = forms_.mass();
  const double implicit_weight = scheme_ == Scheme::crank_nicolson ? 0.5 * dt : dt;

  Vector rhs = M * u;
  if (scheme_ == Scheme::crank_nicolson) rhs -= implicit_weight * (op(t_from) * u);
  if (load) rhs += dt * (*load);

  const auto sys = system_for(dt, implicit_weight, t_to);
  const double rnorm = rhs.norm();
  if (rnorm == 0.0) return Vector::Zero(u.size());
  Vector x = sys->lu.solve(rhs);
  const double res = (sys->matrix * x - rhs).norm();
  require(x.allFinite() && res <= 1e-10 * rnorm, ErrorCode::not_converged,
          "step solve residual " + std::to_string(res / rnorm) + " exceeds 1e-10");
  return x;
}

void march_forward(const Stepper& stepper, const Vector& psi0, const StepLoad& load, const TimeGrid& grid,
                   const SnapshotObserver& observe) {
  grid.validate();
  Vector u = psi0;
  observe(0, grid.t0, u);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double lo = grid.time(k), hi = grid.time(k + 1);
    if (load) {
      const Vector F = load(lo, hi);
      u = stepper.step(u, lo, hi, &F);
    } else {
      u = stepper.step(u, lo, hi, nullptr);
    }
    observe(k + 1, hi, u);
  }
}

Trajectory solve_forward(const Problem& problem, const Vector& psi0, const StepLoad& load, const TimeGrid& grid) {
  grid.validate();
  require(static_cast<std::size_t>(psi0.size()) == problem.ndof(), ErrorCode::invalid_argument,
          "initial data has the wrong length");
  Stepper stepper(problem, grid.scheme, Direction::forward);
  Trajectory traj;
  traj.mesh = problem.mesh;
  traj.m = problem.m();
  traj.grid = grid;
  traj.direction = Direction::forward;
  traj.snapshots.reserve(grid.steps + 1);
  march_forward(stepper, psi0, load, grid,
                [&](std::size_t, double, const Vector& u) { traj.snapshots.push_back(u); });
  fill_energy_log(problem, traj);
  return traj;
}

Trajectory solve_backward_adjoint(const Problem& problem, const Vector& psiT, const StepLoad& load,
                                  const TimeGrid& grid) {
  grid.validate();
  require(static_cast<std::size_t>(psiT.size()) == problem.ndof(), ErrorCode::invalid_argument,
          "terminal data has the wrong length");
  Stepper stepper(problem, grid.scheme, Direction::backward);
  Trajectory traj;
  traj.mesh = problem.mesh;
  traj.m = problem.m();
  traj.grid = grid;
  traj.direction = Direction::backward;
  traj.snapshots.assign(grid.steps + 1, Vector());
  traj.snapshots[grid.steps] = psiT;
  for (std::size_t k = grid.steps; k > 0; --k) {
    const double hi = grid.time(k), lo = grid.time(k - 1);
    if (load) {
      const Vector F = load(lo, hi);
      traj.snapshots[k - 1] = stepper.step(traj.snapshots[k], hi, lo, &F);
    } else {
      traj.snapshots[k - 1] = stepper.step(traj.snapshots[k], hi, lo, nullptr);
    }
  }
  fill_energy_log(problem, traj);
  return traj;
}

void fill_energy_log(const Problem& problem, Trajectory& traj) {
  Forms forms(problem);
  traj.energy_log.clear();
  traj.energy_log.reserve(traj.snapshots.size());
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const Vector& u = traj.snapshots[k];
    const SparseMatrix B = forms.robin_at(traj.grid.time(k));
    traj.energy_log.push_back({u.dot(forms.mass() * u), problem.lambda_tilde * u.dot(forms.unit_stiffness() * u),
                               u.dot(B * u)});
  }
}

double tri_norm(const Trajectory& traj) {
  require(traj.energy_log.size() == traj.snapshots.size() && !traj.energy_log.empty(), ErrorCode::precondition,
          "trajectory energy log is not populated");
  const double dt = traj.grid.dt();
  double sup = 0.0, integral = 0.0;
  const std::size_t n = traj.energy_log.size() - 1;
  for (std::size_t k = 0; k <= n; ++k) {
    const auto& e = traj.energy_log[k];
    sup = std::max(sup, e.mass);
    const bool implicit_level = traj.direction == Direction::forward ? k >= 1 : k < n;
    if (implicit_level) integral += dt * (e.gradient + e.robin);
  }
  return std::sqrt(sup + integral);
}

std::vector<double> energy_identity_residuals(const Problem& problem, const Trajectory& traj, const StepLoad& load) {
  require(traj.direction == Direction::forward && traj.grid.scheme == Scheme::implicit_euler,
          ErrorCode::precondition, "energy identity applies to forward implicit Euler trajectories");
  Forms forms(problem);
  const SparseMatrix& M = forms.mass();
  const double dt = traj.grid.dt();
  std::vector<double> out;
  out.reserve(traj.grid.steps);
  for (std::size_t k = 0; k < traj.grid.steps; ++k) {
    const Vector& u = traj.snapshots[k];
    const Vector& up = traj.snapshots[k + 1];
    const double lo = traj.grid.time(k), hi = traj.grid.time(k + 1);
    const SparseMatrix L = forms.operator_at(hi);
    const Vector diff = up - u;
    const double a = up.dot(M * up), b = u.dot(M * u), c = diff.dot(M * diff);
    const double d = 2.0 * dt * up.dot(L * up);
    const double f = load ? 2.0 * dt * load(lo, hi).dot(up) : 0.0;
    const double scale = std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d) + std::abs(f);
    out.push_back(scale == 0.0 ? 0.0 : std::abs(a - b + c + d - f) / scale);
  }
  return out;
}

double source_norm(const Problem& problem, const SourceFn& f, const TimeGrid& grid, double p) {
  if (!f) return 0.0;
  const Mesh& mesh = *problem.mesh;
  const double dt = grid.dt();
  double sum = 0.0;
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double tm = 0.5 * (grid.time(k) + grid.time(k + 1));
    for (Index c = 0; c < mesh.num_cells(); ++c)
      for (const auto& q : quad::mass_rule(mesh, c)) sum += dt * q.weight * std::pow(f(q.x, tm).norm(), p);
  }
  return std::pow(sum, 1.0 / p);
}

double energy_ratio(const Problem& problem, const Trajectory& traj, const SourceFn& f, const Vector& psi0) {
  const int n = problem.mesh->dimension();
  const double p = 2.0 * (n + 2.0) / (n + 4.0);
  Forms forms(problem);
  const double denom = source_norm(problem, f, traj.grid, p) + std::sqrt(psi0.dot(forms.mass() * psi0));
  const double num = tri_norm(traj);
  if (denom == 0.0) {
    require(num == 0.0, ErrorCode::internal, "nonzero trajectory produced by zero data");
    return 0.0;
  }
  return num / denom;
}

double decay_rate(const Trajectory& traj) {
  require(traj.energy_log.size() == traj.snapshots.size() && traj.snapshots.size() >= 3, ErrorCode::precondition,
          "decay rate needs a populated trajectory with at least two steps");
  const std::size_t n = traj.snapshots.size() - 1;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t k = n / 2; k <= n; ++k) {
    const double I = traj.energy_log[k].mass;
    require(I > std::numeric_limits<double>::min(), ErrorCode::precondition,
            "I(t) underflowed on the fit window; shrink the window");
    const double x = traj.grid.time(k), y = std::log(I);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double c = static_cast<double>(count);
  const double slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  return -0.5 * slope;
}

}  // namespace rg
