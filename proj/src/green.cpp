#include "green.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "error.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace rg {

namespace {

constexpr int kSubdivisions1D = 64;
constexpr int kSubdivisions2D = 16;

// Integral of 1_B(y,eps) * phi_a over one cell that straddles the sphere,
// by the centroid rule on a uniform sub-simplex grid.
std::array<double, 3> partial_cell_weights(const Mesh& mesh, Index c, const Point& y, double eps) {
  auto v = mesh.cell(c);
  const double meas = mesh.cell_measure(c);
  const int dim = mesh.dimension();
  std::array<double, 3> out{0.0, 0.0, 0.0};
  auto accumulate = [&](const std::array<double, 3>& l, double w) {
    if (distance(quad::combine(mesh, v, l), y, dim) > eps) return;
    for (int a = 0; a <= dim; ++a) out[a] += w * l[a];
  };
  if (dim == 1) {
    const int n = kSubdivisions1D;
    for (int i = 0; i < n; ++i) {
      const double s = (i + 0.5) / n;
      accumulate({1.0 - s, s, 0.0}, meas / n);
    }
  } else {
    const int n = kSubdivisions2D;
    const double w = meas / (n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; i + j < n; ++j) {
        double l1 = (i + 1.0 / 3.0) / n, l2 = (j + 1.0 / 3.0) / n;
        accumulate({1.0 - l1 - l2, l1, l2}, w);
        if (i + j <= n - 2) {
          l1 = (i + 2.0 / 3.0) / n;
          l2 = (j + 2.0 / 3.0) / n;
          accumulate({1.0 - l1 - l2, l1, l2}, w);
        }
      }
  }
  return out;
}

Matrix sparse_solve_columns(const SparseMatrix& A, const Matrix& B) {
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(A);
  require(lu.info() == Eigen::Success, ErrorCode::not_converged, "factorization failed");
  Matrix X = lu.solve(B);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double bn = B.col(c).norm();
    require(X.col(c).allFinite() && (A * X.col(c) - B.col(c)).norm() <= 1e-10 * std::max(bn, 1e-300),
            ErrorCode::not_converged, "linear solve residual too large");
  }
  return X;
}

double mass_norm(const SparseMatrix& M, const Vector& u) { return std::sqrt(std::max(0.0, u.dot(M * u))); }

}  // namespace

CylinderLoad::CylinderLoad(const Mesh& mesh, int m, const SpaceTimePoint& Y, double epsilon, Index k) {
  require(epsilon > 0.0, ErrorCode::invalid_argument, "averaging radius must be positive");
  require(static_cast<int>(k) < m, ErrorCode::invalid_argument, "column index out of range");
  const std::size_t nv = mesh.num_vertices();
  const int dim = mesh.dimension();
  spatial_ = Vector::Zero(static_cast<Eigen::Index>(nv * static_cast<std::size_t>(m)));
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    auto v = mesh.cell(c);
    double dmin = INFINITY, dmax = 0.0, span = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a) {
      const double d = distance(mesh.vertex(v[a]), Y.x, dim);
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
      for (std::size_t b = a + 1; b < v.size(); ++b)
        span = std::max(span, distance(mesh.vertex(v[a]), mesh.vertex(v[b]), dim));
    }
    if (dmin > epsilon + span) continue;
    std::array<double, 3> w{};
    if (dmax <= epsilon) {
      const double share = mesh.cell_measure(c) / (dim + 1);
      w = {share, share, dim == 2 ? share : 0.0};
    } else {
      w = partial_cell_weights(mesh, c, Y.x, epsilon);
    }
    for (std::size_t a = 0; a < v.size(); ++a) spatial_[static_cast<Eigen::Index>(dof(k, v[a], nv))] += w[a];
  }
  ball_measure_ = spatial_.sum();
  require(ball_measure_ > 0.0, ErrorCode::invalid_argument, "averaging ball misses the mesh");
  t_begin_ = Y.t - epsilon * epsilon;
  t_end_ = Y.t;
}

Vector CylinderLoad::operator()(double t_lo, double t_hi) const {
  const double overlap = std::max(0.0, std::min(t_hi, t_end_) - std::max(t_lo, t_begin_));
  if (overlap == 0.0) return Vector::Zero(spatial_.size());
  const double duration = t_end_ - t_begin_;
  return spatial_ * (overlap / ((t_hi - t_lo) * duration * ball_measure_));
}

GreenColumn averaged_green(const Problem& problem, const SpaceTimePoint& Y, double epsilon, Index k,
                           const TimeGrid& grid) {
  grid.validate();
  const Mesh& mesh = *problem.mesh;
  require(epsilon >= mesh.mesh_size(), ErrorCode::invalid_argument,
          "averaging radius is below the mesh size; the indicator is not resolved");
  const double slack = 1e-12 * (grid.t1 - grid.t0);
  require(Y.t - epsilon * epsilon >= grid.t0 - slack && Y.t <= grid.t1 + slack, ErrorCode::invalid_argument,
          "the averaging cylinder leaves the time window");
  auto cyl = std::make_shared<CylinderLoad>(mesh, problem.m(), Y, epsilon, k);
  StepLoad load = [cyl](double lo, double hi) { return (*cyl)(lo, hi); };

  GreenColumn col;
  col.source = Y;
  col.column = static_cast<int>(k);
  col.epsilon = epsilon;
  double total = 0.0;
  for (std::size_t j = 0; j < grid.steps; ++j) {
    const double lo = grid.time(j), hi = grid.time(j + 1);
    total += (hi - lo) * load(lo, hi).sum();
  }
  col.load_mass = total;
  require(std::abs(total - 1.0) <= 1e-10, ErrorCode::internal, "averaged load is not normalized");
  col.trajectory = solve_forward(problem, Vector::Zero(static_cast<Eigen::Index>(problem.ndof())), load, grid);
  return col;
}

DualityProbe averaged_green_duality(const Problem& problem, const SpaceTimePoint& Y, double epsilon, Index k,
                                    const SourceFn& f, const TimeGrid& grid) {
  require(static_cast<bool>(f), ErrorCode::invalid_argument, "duality probe needs a source");
  const GreenColumn col = averaged_green(problem, Y, epsilon, k, grid);
  const CylinderLoad cyl(*problem.mesh, problem.m(), Y, epsilon, k);
  const StepLoad fb = pointwise_load(problem, f, grid.scheme, Direction::backward);
  const Trajectory v =
      solve_backward_adjoint(problem, Vector::Zero(static_cast<Eigen::Index>(problem.ndof())), fb, grid);
  DualityProbe out;
  for (std::size_t j = 0; j < grid.steps; ++j) {
    const double lo = grid.time(j), hi = grid.time(j + 1), dt = hi - lo;
    out.forward += dt * fb(lo, hi).dot(col.trajectory.snapshots[j + 1]);
    out.backward += dt * cyl(lo, hi).dot(v.snapshots[j]);
  }
  const double scale = std::max({std::abs(out.forward), std::abs(out.backward), 1e-300});
  out.relative_error = std::abs(out.forward - out.backward) / scale;
  return out;
}

Vector discrete_delta(const Problem& problem, Index vertex, Index k) {
  const Mesh& mesh = *problem.mesh;
  require(vertex < mesh.num_vertices(), ErrorCode::invalid_argument, "source vertex out of range");
  require(static_cast<int>(k) < problem.m(), ErrorCode::invalid_argument, "column index out of range");
  const SparseMatrix M = assemble_mass(mesh, problem.m(), problem.lumped_mass);
  Vector e = Vector::Zero(static_cast<Eigen::Index>(problem.ndof()));
  e[static_cast<Eigen::Index>(dof(k, vertex, mesh.num_vertices()))] = 1.0;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(M);
  require(ldlt.info() == Eigen::Success, ErrorCode::not_converged, "mass matrix factorization failed");
  Vector x = ldlt.solve(e);
  require((M * x - e).norm() <= 1e-12, ErrorCode::not_converged, "mass solve residual too large");
  return x;
}

GreenColumn heat_kernel_column(const Problem& problem, Index y_vertex, Index k, const TimeGrid& grid) {
  require(problem.time_independent(), ErrorCode::precondition,
          "heat kernel requires time-independent data; use green_eval with an explicit source time");
  require(grid.t0 == 0.0, ErrorCode::invalid_argument, "heat kernel grids start at t = 0");
  GreenColumn col;
  col.source = {problem.mesh->vertex(y_vertex), 0.0};
  col.source_vertex = y_vertex;
  col.column = static_cast<int>(k);
  col.trajectory = solve_forward(problem, discrete_delta(problem, y_vertex, k), {}, grid);
  return col;
}

std::vector<KernelSample> column_vertex_samples(const std::vector<GreenColumn>& cols, Index y, double s,
                                                std::size_t max_times) {
  const Trajectory& first = cols.front().trajectory;
  const Mesh& mesh = *first.mesh;
  const std::size_t nv = mesh.num_vertices();
  const int m = first.m;
  std::vector<std::size_t> picks;
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k <= first.grid.steps; ++k)
    if (first.grid.time(k) > s) eligible.push_back(k);
  const std::size_t count = std::min(max_times, eligible.size());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t idx = count == 1 ? eligible.size() - 1 : i * (eligible.size() - 1) / (count - 1);
    if (picks.empty() || picks.back() != eligible[idx]) picks.push_back(eligible[idx]);
  }
  std::vector<KernelSample> out;
  for (std::size_t k : picks)
    for (Index v = 0; v < nv; ++v) {
      if (v == y) continue;
      KernelSample smp;
      smp.x = mesh.vertex(v);
      smp.t = first.grid.time(k);
      smp.y = mesh.vertex(y);
      smp.s = s;
      smp.value.resize(m, m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
          smp.value(r, c) = cols[static_cast<std::size_t>(c)].trajectory.snapshots[k][static_cast<Eigen::Index>(
              dof(static_cast<Index>(r), v, nv))];
      out.push_back(std::move(smp));
    }
  return out;
}

Matrix sample_columns(const std::vector<GreenColumn>& columns, const Point& x, double t) {
  require(!columns.empty(), ErrorCode::invalid_argument, "no columns to sample");
  const Trajectory& first = columns.front().trajectory;
  const int m = first.m;
  require(static_cast<int>(columns.size()) == m, ErrorCode::invalid_argument, "need one column per component");
  const TimeGrid& g = first.grid;
  Matrix out = Matrix::Zero(m, m);
  if (t < g.t0) return out;
  require(t <= g.t1 * (1.0 + 1e-14) + 1e-300, ErrorCode::invalid_argument, "sample time beyond the window");
  double pos = (t - g.t0) / g.dt();
  pos = std::clamp(pos, 0.0, static_cast<double>(g.steps));
  std::size_t j = static_cast<std::size_t>(std::floor(pos));
  if (j >= g.steps) j = g.steps - 1;
  double w = pos - static_cast<double>(j);
  if (std::abs(w - 1.0) < 1e-12) w = 1.0;
  if (w < 1e-12) w = 0.0;
  for (int r = 0; r < m; ++r) {
    const Vector pf = point_functional(*first.mesh, m, x, static_cast<Index>(r));
    for (int k = 0; k < m; ++k) {
      const Trajectory& tr = columns[static_cast<std::size_t>(k)].trajectory;
      const double a = pf.dot(tr.snapshots[j]);
      const double b = w == 0.0 ? a : pf.dot(tr.snapshots[j + 1]);
      out(r, k) = w == 0.0 ? a : (w == 1.0 ? b : (1.0 - w) * a + w * b);
    }
  }
  return out;
}

namespace {

std::size_t steps_between(double from, double to, double dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::abs(to - from) / dt)));
}

}  // namespace

KernelSample green_eval(const Problem& problem, const Point& x, double t, Index y_vertex, double s,
                        const TimeGrid& grid) {
  const Mesh& mesh = *problem.mesh;
  require(y_vertex < mesh.num_vertices(), ErrorCode::invalid_argument, "source vertex out of range");
  KernelSample out;
  out.x = x;
  out.t = t;
  out.y = mesh.vertex(y_vertex);
  out.s = s;
  const int m = problem.m();
  out.value = Matrix::Zero(m, m);
  if (t < s) return out;
  require(t > s || distance(x, out.y, mesh.dimension()) > 0.0, ErrorCode::invalid_argument,
          "the kernel is singular at (x,t) = (y,s)");
  std::vector<Vector> pf;
  for (int r = 0; r < m; ++r) pf.push_back(point_functional(mesh, m, x, static_cast<Index>(r)));
  if (t == s) {
    for (int k = 0; k < m; ++k) {
      const Vector d = discrete_delta(problem, y_vertex, static_cast<Index>(k));
      for (int r = 0; r < m; ++r) out.value(r, k) = pf[static_cast<std::size_t>(r)].dot(d);
    }
    return out;
  }
  TimeGrid sub{s, t, steps_between(s, t, grid.dt()), grid.scheme};
  Stepper stepper(problem, grid.scheme, Direction::forward);
  Matrix U(static_cast<Eigen::Index>(problem.ndof()), m);
  for (int k = 0; k < m; ++k) U.col(k) = discrete_delta(problem, y_vertex, static_cast<Index>(k));
  for (std::size_t j = 0; j < sub.steps; ++j) U = stepper.step_block(U, sub.time(j), sub.time(j + 1));
  for (int r = 0; r < m; ++r)
    for (int k = 0; k < m; ++k) out.value(r, k) = pf[static_cast<std::size_t>(r)].dot(U.col(k));
  return out;
}

KernelSample adjoint_green_eval(const Problem& problem, Index x_vertex, double t, const Point& y, double s,
                                const TimeGrid& grid) {
  const Mesh& mesh = *problem.mesh;
  require(x_vertex < mesh.num_vertices(), ErrorCode::invalid_argument, "source vertex out of range");
  KernelSample out;
  out.x = y;
  out.t = s;
  out.y = mesh.vertex(x_vertex);
  out.s = t;
  out.source = "adjoint";
  const int m = problem.m();
  out.value = Matrix::Zero(m, m);
  if (s > t) return out;
  require(s < t || distance(y, out.y, mesh.dimension()) > 0.0, ErrorCode::invalid_argument,
          "the kernel is singular at (y,s) = (x,t)");
  std::vector<Vector> pf;
  for (int r = 0; r < m; ++r) pf.push_back(point_functional(mesh, m, y, static_cast<Index>(r)));
  Matrix W(static_cast<Eigen::Index>(problem.ndof()), m);
  for (int k = 0; k < m; ++k) W.col(k) = discrete_delta(problem, x_vertex, static_cast<Index>(k));
  if (s < t) {
    TimeGrid sub{s, t, steps_between(s, t, grid.dt()), grid.scheme};
    Stepper stepper(problem, grid.scheme, Direction::backward);
    for (std::size_t j = sub.steps; j > 0; --j) W = stepper.step_block(W, sub.time(j), sub.time(j - 1));
  }
  for (int r = 0; r < m; ++r)
    for (int k = 0; k < m; ++k) out.value(r, k) = pf[static_cast<std::size_t>(r)].dot(W.col(k));
  return out;
}

EllipticGreen elliptic_green(const Problem& problem, Index y_vertex, double theta0, const EllipticOptions& opts) {
  require(problem.time_independent(), ErrorCode::precondition, "elliptic Green's function needs time-independent data");
  require(theta0 > 0.0, ErrorCode::precondition,
          "theta0 must be positive; the time integral of the heat kernel may diverge");
  require(opts.tol > 0.0 && opts.steps_per_level >= 1, ErrorCode::invalid_argument, "invalid elliptic options");
  const Mesh& mesh = *problem.mesh;
  require(y_vertex < mesh.num_vertices(), ErrorCode::invalid_argument, "source vertex out of range");
  const int m = problem.m();
  Stepper stepper(problem, Scheme::implicit_euler, Direction::forward);
  const SparseMatrix& M = stepper.forms().mass();

  Matrix U(static_cast<Eigen::Index>(problem.ndof()), m);
  for (int k = 0; k < m; ++k) U.col(k) = discrete_delta(problem, y_vertex, static_cast<Index>(k));
  Matrix integral = Matrix::Zero(U.rows(), m);

  EllipticGreen out;
  out.source_vertex = y_vertex;
  out.theta0 = theta0;
  double dt = 0.25 * mesh.mesh_size() * mesh.mesh_size();
  double t = 0.0;
  bool done = false;
  for (std::size_t level = 0; level < opts.max_levels && !done; ++level, dt *= 2.0) {
    for (std::size_t i = 0; i < opts.steps_per_level; ++i) {
      U = stepper.step_block(U, t, t + dt);
      t += dt;
      integral += dt * U;
      ++out.steps;
      double worst = 0.0;
      done = true;
      for (int k = 0; k < m; ++k) {
        const double tail = mass_norm(M, U.col(k)) / theta0;
        const double acc = mass_norm(M, integral.col(k));
        worst = std::max(worst, acc > 0.0 ? tail / acc : INFINITY);
        done = done && tail <= opts.tol * acc;
      }
      out.tail_bound = worst;
      if (done) break;
    }
    stepper.clear_cache();
  }
  require(done, ErrorCode::not_converged, "heat-kernel integral did not reach the truncation tolerance");
  out.truncation_time = t;
  out.values = std::move(integral);
  return out;
}

Matrix steady_green(const Problem& problem, Index y_vertex) {
  require(problem.time_independent(), ErrorCode::precondition, "steady Green's function needs time-independent data");
  const Mesh& mesh = *problem.mesh;
  require(y_vertex < mesh.num_vertices(), ErrorCode::invalid_argument, "source vertex out of range");
  const Forms forms(problem);
  Matrix E = Matrix::Zero(static_cast<Eigen::Index>(problem.ndof()), problem.m());
  for (int k = 0; k < problem.m(); ++k)
    E(static_cast<Eigen::Index>(dof(static_cast<Index>(k), y_vertex, mesh.num_vertices())), k) = 1.0;
  return sparse_solve_columns(forms.operator_at(0.0), E);
}

Representation represent_solution(const Problem& problem, const SourceFn& f, const TimeGrid& grid) {
  grid.validate();
  const auto n = static_cast<Eigen::Index>(problem.ndof());
  const StepLoad load = pointwise_load(problem, f, grid.scheme, Direction::forward);
  Representation rep;
  rep.direct = solve_forward(problem, Vector::Zero(n), load, grid);

  const std::size_t N = grid.steps;
  std::vector<Vector> F(N);
  for (std::size_t j = 0; j < N; ++j) {
    const double step = grid.time(j + 1) - grid.time(j);
    F[j] = load ? Vector(step * load(grid.time(j), grid.time(j + 1))) : Vector(Vector::Zero(n));
  }

  std::vector<Vector> u(N + 1, Vector::Zero(n));
  const Matrix identity = Matrix::Identity(n, n);
  if (problem.time_independent()) {
    // Column block of unit nodal impulses on the first step, carried to
    // every later level; translation gives the response to later impulses.
    Stepper stepper(problem, grid.scheme, Direction::forward);
    std::vector<Matrix> Z(N + 1);
    Z[1] = stepper.impulse_block(identity, grid.time(0), grid.time(1));
    for (std::size_t k = 1; k < N; ++k) Z[k + 1] = stepper.step_block(Z[k], grid.time(k), grid.time(k + 1));
    // The scheme's step matrices depend only on dt, so Z[k - j] is the
    // response at level k to an impulse on step j.
    parallel_for(N, [&](std::size_t idx) {
      const std::size_t k = idx + 1;
      Vector acc = Vector::Zero(n);
      for (std::size_t j = 0; j < k; ++j)
        if (F[j].squaredNorm() > 0.0) acc += Z[k - j] * F[j];
      u[k] = std::move(acc);
    });
  } else {
    Stepper stepper(problem, grid.scheme, Direction::forward);
    for (std::size_t j = 0; j < N; ++j) {
      if (F[j].squaredNorm() == 0.0) continue;
      Matrix Z = stepper.impulse_block(identity, grid.time(j), grid.time(j + 1));
      u[j + 1] += Z * F[j];
      for (std::size_t k = j + 1; k < N; ++k) {
        Z = stepper.step_block(Z, grid.time(k), grid.time(k + 1));
        u[k + 1] += Z * F[j];
      }
    }
  }
  rep.superposed.mesh = problem.mesh;
  rep.superposed.m = problem.m();
  rep.superposed.grid = grid;
  rep.superposed.direction = Direction::forward;
  rep.superposed.snapshots = std::move(u);
  fill_energy_log(problem, rep.superposed);

  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k <= N; ++k) {
    num = std::max(num, (rep.superposed.snapshots[k] - rep.direct.snapshots[k]).norm());
    den = std::max(den, rep.direct.snapshots[k].norm());
  }
  rep.relative_error = den > 0.0 ? num / den : num;
  return rep;
}

}  // namespace rg
