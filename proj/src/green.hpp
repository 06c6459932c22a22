#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coercivity.hpp"
#include "parabolic.hpp"

namespace rg {

/// One column (index k) of a Green's function with source at Y.
struct GreenColumn {
  SpaceTimePoint source;
  std::optional<Index> source_vertex;
  int column = 0;
  /// Averaging radius; 0 for the discrete delta.
  double epsilon = 0.0;
  /// Space-time integral of the right-hand side (1 for averaged columns).
  double load_mass = 0.0;
  Trajectory trajectory;
};

/// Pointwise value of the m x m kernel at (x,t;y,s).
struct KernelSample {
  Point x{0.0, 0.0};
  double t = 0.0;
  Point y{0.0, 0.0};
  double s = 0.0;
  Matrix value;
  std::string source = "fem";
};

/// Load of the normalized indicator of Q_eps^-(Y) = B_eps(y) x (s - eps^2, s)
/// in component k, already integrated over each step. The ball integral is
/// computed with sub-cell quadrature; the same quadrature normalizes it.
class CylinderLoad {
 public:
  CylinderLoad(const Mesh& mesh, int m, const SpaceTimePoint& Y, double epsilon, Index k);
  Vector operator()(double t_lo, double t_hi) const;
  /// Spatial part: entries int_{B_eps} phi_i, before time normalization.
  const Vector& spatial() const { return spatial_; }
  double ball_measure() const { return ball_measure_; }
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }

 private:
  Vector spatial_;
  double ball_measure_ = 0.0;
  double t_begin_ = 0.0;
  double t_end_ = 0.0;
};

GreenColumn averaged_green(const Problem& problem, const SpaceTimePoint& Y, double epsilon, Index k,
                           const TimeGrid& grid);

/// Both sides of the averaged duality identity
///   int G^eps_{.k}(., Y) . f dX  =  (average over Q_eps^-(Y) of v_k),
/// where v solves the backward adjoint problem with load f and zero terminal
/// data. The left side pairs the forward column with f at the implicit
/// levels; the right side pairs v with the cylinder load.
struct DualityProbe {
  double forward = 0.0;
  double backward = 0.0;
  double relative_error = 0.0;
};
DualityProbe averaged_green_duality(const Problem& problem, const SpaceTimePoint& Y, double epsilon, Index k,
                                    const SourceFn& f, const TimeGrid& grid);

/// Discrete delta initial data M^{-1} e_{(y,k)}.
Vector discrete_delta(const Problem& problem, Index vertex, Index k);

/// Heat kernel column K_{.k}(., y, t) on grid (grid.t0 must be 0).
GreenColumn heat_kernel_column(const Problem& problem, Index y_vertex, Index k, const TimeGrid& grid);

/// m x m kernel value at (x, t) from the m columns of one source, linear in
/// time between snapshots. columns[k] must share the same grid.
Matrix sample_columns(const std::vector<GreenColumn>& columns, const Point& x, double t);

/// Samples of the m columns of one source at every other vertex, for up to
/// max_times snapshot times after s (evenly spread over the grid indices).
std::vector<KernelSample> column_vertex_samples(const std::vector<GreenColumn>& columns, Index y, double s,
                                                std::size_t max_times);

/// G(x,t,y,s): zero for t < s; otherwise m delta columns started at s with
/// the step size of `grid`. y must be a mesh vertex.
KernelSample green_eval(const Problem& problem, const Point& x, double t, Index y_vertex, double s,
                        const TimeGrid& grid);

/// G*(y,s,x,t) for the adjoint problem, i.e. the backward run started from a
/// delta at (x, t) and read at (y, s). Zero for s > t. x must be a vertex.
KernelSample adjoint_green_eval(const Problem& problem, Index x_vertex, double t, const Point& y, double s,
                                const TimeGrid& grid);

struct EllipticGreen {
  Index source_vertex = 0;
  /// ndof x m; column k is G_{.k}(., y) in component-major DOF order.
  Matrix values;
  double truncation_time = 0.0;
  std::size_t steps = 0;
  double tail_bound = 0.0;
  double theta0 = 0.0;
};

struct EllipticOptions {
  double tol = 1e-4;
  std::size_t steps_per_level = 16;
  std::size_t max_levels = 80;
};

/// G(x,y) = int_0^inf K(x,y,t) dt by implicit Euler heat-kernel columns on a
/// geometric time grid (dt0 = (h/2)^2, doubled every steps_per_level steps),
/// summed with the right-endpoint rule. Stops once |K(.,y,T)|_M / theta0 is
/// below tol times the accumulated integral.
EllipticGreen elliptic_green(const Problem& problem, Index y_vertex, double theta0, const EllipticOptions& opts = {});

/// Steady Robin solve (K + B) g = e_{(y,k)} for every k; ndof x m.
Matrix steady_green(const Problem& problem, Index y_vertex);

struct Representation {
  Trajectory superposed;
  Trajectory direct;
  double relative_error = 0.0;
};

/// u = sum over sources of G(., Y) f(Y) dY. Each step load is split into
/// nodal impulses; the response to a unit impulse at node i on step j is a
/// Green's column, and the columns are superposed. Time-independent data on
/// a uniform grid reuse one column per node by translation. The direct path
/// is a single forward solve with the same load.
Representation represent_solution(const Problem& problem, const SourceFn& f, const TimeGrid& grid);

}  // namespace rg
