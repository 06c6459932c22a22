#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "problem.hpp"

namespace rg {

enum class Scheme { implicit_euler, crank_nicolson };
enum class Direction { forward, backward };

struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t steps = 1;
  Scheme scheme = Scheme::implicit_euler;

  double dt() const { return (t1 - t0) / static_cast<double>(steps); }
  double time(std::size_t k) const {
    return k == steps ? t1 : t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(steps);
  }
  void validate() const;
};

/// Load vector to apply on the step between t_lo and t_hi (already in the
/// scheme's convention). An empty function means no load.
using StepLoad = std::function<Vector(double t_lo, double t_hi)>;

/// Pointwise source assembled at the implicit level (implicit Euler) or
/// averaged over both levels (Crank-Nicolson). For backward marching the
/// implicit level is t_lo.
StepLoad pointwise_load(const Problem& problem, SourceFn f, Scheme scheme, Direction direction = Direction::forward);

struct EnergyTriple {
  double mass = 0.0;      ///< u^T M u
  double gradient = 0.0;  ///< lambda_tilde u^T K_unit u
  double robin = 0.0;     ///< u^T B u
};

struct Trajectory {
  std::shared_ptr<const Mesh> mesh;
  int m = 1;
  TimeGrid grid;
  Direction direction = Direction::forward;
  /// snapshots[k] is the field at grid.time(k) for both directions.
  std::vector<Vector> snapshots;
  std::vector<EnergyTriple> energy_log;
};

/// Time stepper with factorization caching for time-independent data.
/// Forward steps use (K + B); backward steps use the transposes.
class Stepper {
 public:
  Stepper(const Problem& problem, Scheme scheme, Direction direction);

  /// Advance u from t_from to t_to (t_to > t_from forward, < backward).
  Vector step(const Vector& u, double t_from, double t_to, const Vector* load) const;
  /// Homogeneous step applied to every column of U.
  Matrix step_block(const Matrix& U, double t_from, double t_to) const;
  /// Response after one step to right-hand sides R entering the step system
  /// directly (zero state), i.e. the system matrix applied inversely to R.
  Matrix impulse_block(const Matrix& R, double t_from, double t_to) const;
  /// Drops cached factorizations (useful when dt keeps changing).
  void clear_cache() const { cache_.clear(); }
  const Forms& forms() const { return forms_; }

 private:
  using LU = Eigen::SparseLU<SparseMatrix>;
  struct System {
    SparseMatrix matrix;
    LU lu;
  };
  Problem problem_;
  Forms forms_;
  Scheme scheme_;
  Direction direction_;
  SparseMatrix fixed_op_;
  bool fixed_ = false;
  mutable std::map<double, std::shared_ptr<System>> cache_;

  SparseMatrix op(double t) const;
  std::shared_ptr<System> factor(SparseMatrix A) const;
  Matrix solve_block(const std::shared_ptr<System>& sys, const Matrix& rhs) const;
  std::shared_ptr<System> system_for(double dt, double implicit_weight, double t_to) const;
};

/// Observer invoked for every snapshot: (grid index, time, field).
using SnapshotObserver = std::function<void(std::size_t, double, const Vector&)>;

/// Forward march without storing snapshots.
void march_forward(const Stepper& stepper, const Vector& psi0, const StepLoad& load, const TimeGrid& grid,
                   const SnapshotObserver& observe);

Trajectory solve_forward(const Problem& problem, const Vector& psi0, const StepLoad& load, const TimeGrid& grid);
/// Marches from grid.t1 down to grid.t0 for the adjoint problem with
/// terminal data psiT.
Trajectory solve_backward_adjoint(const Problem& problem, const Vector& psiT, const StepLoad& load,
                                  const TimeGrid& grid);

/// Recomputes the energy log of a trajectory against the problem's forms.
void fill_energy_log(const Problem& problem, Trajectory& traj);

/// sqrt( max_k |u_k|_M^2 + sum over implicit levels dt (lambda~|Du|^2 + <Theta u,u>) )
double tri_norm(const Trajectory& traj);

/// Per-step residuals of the implicit Euler energy identity
///   |u+|^2 - |u|^2 + |u+ - u|^2 + 2 dt u+^T (K+B) u+ = 2 dt F^T u+,
/// each divided by the magnitude of the terms involved.
std::vector<double> energy_identity_residuals(const Problem& problem, const Trajectory& traj, const StepLoad& load);

/// L^p(Q) norm of a source by cell quadrature and step midpoints.
double source_norm(const Problem& problem, const SourceFn& f, const TimeGrid& grid, double p);

/// tri_norm / (|f|_{L^{2(n+2)/(n+4)}(Q)} + |psi0|_{L^2}).
double energy_ratio(const Problem& problem, const Trajectory& traj, const SourceFn& f, const Vector& psi0);

/// Negated half slope of a least-squares fit of log I(t) over the second half
/// of the window, I(t) = |u(t)|_M^2.
double decay_rate(const Trajectory& traj);

}  // namespace rg
