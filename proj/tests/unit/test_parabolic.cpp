#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "error.hpp"
#include "parabolic.hpp"

namespace rg {
namespace {

std::shared_ptr<const Mesh> interval(std::size_t n) {
  return std::make_shared<const Mesh>(build_interval_mesh(0.0, 1.0, n));
}

Problem problem(std::shared_ptr<const Mesh> mesh, const std::string& coeff, const std::string& theta, int m = 1,
                bool lumped = false) {
  return make_problem(mesh, coefficient_from_name(coeff, m, mesh->dimension()), theta_from_name(theta, m, *mesh),
                      0.0, lumped);
}

struct Mode {
  double mu;
  Vector phi;
};

Mode slowest(const Problem& p) {
  Forms f(p);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Matrix(f.operator_at(0.0)), Matrix(f.mass()));
  return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

double mass_norm2(const Problem& p, const Vector& u) {
  Forms f(p);
  return u.dot(f.mass() * u);
}

TEST(Step, ZeroStaysZero) {
  const Problem p = problem(interval(16), "laplace", "theta_const(1)");
  const Stepper s(p, Scheme::implicit_euler, Direction::forward);
  const Vector z = Vector::Zero(static_cast<Eigen::Index>(p.ndof()));
  EXPECT_EQ(s.step(z, 0.0, 0.1, nullptr).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Step, EigenfunctionScales) {
  const Problem p = problem(interval(64), "laplace", "theta_const(1)");
  const Mode mode = slowest(p);
  const Stepper s(p, Scheme::implicit_euler, Direction::forward);
  const double dt = 0.01;
  const Vector next = s.step(mode.phi, 0.0, dt, nullptr);
  EXPECT_LE((next - mode.phi / (1.0 + dt * mode.mu)).cwiseAbs().maxCoeff(), 1e-12 * mode.phi.cwiseAbs().maxCoeff());
}

TEST(Step, RepeatedStepsAreDeterministic) {
  const Problem p = problem(interval(32), "laplace", "theta_const(1)");
  const Stepper s(p, Scheme::crank_nicolson, Direction::forward);
  const Vector u0 = Vector::LinSpaced(33, 0.0, 1.0);
  const Vector a = s.step(s.step(u0, 0.0, 0.05, nullptr), 0.05, 0.1, nullptr);
  const Vector b = s.step(s.step(u0, 0.0, 0.05, nullptr), 0.05, 0.1, nullptr);
  EXPECT_EQ(a, b);
  const Trajectory t = solve_forward(p, u0, {}, {0.0, 0.1, 2, Scheme::crank_nicolson});
  EXPECT_EQ(t.snapshots[2], a);
}

TEST(Forward, ZeroDataZeroTrajectory) {
  const Problem p = problem(interval(16), "laplace", "theta_const(1)");
  const Trajectory t = solve_forward(p, Vector::Zero(17), {}, {0.0, 1.0, 10});
  ASSERT_EQ(t.snapshots.size(), 11u);
  for (const auto& s : t.snapshots) EXPECT_EQ(s.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(tri_norm(t), 0.0);
  EXPECT_EQ(energy_ratio(p, t, {}, Vector::Zero(17)), 0.0);
}

TEST(Forward, ConstantDataLosesMass) {
  const Problem p = problem(interval(32), "laplace", "theta_const(1)");
  const Trajectory t = solve_forward(p, Vector::Constant(33, 1.0), {}, {0.0, 1.0, 50});
  Forms f(p);
  const Vector w = f.mass() * Vector::Ones(33);
  double prev = INFINITY;
  for (const auto& s : t.snapshots) {
    const double mass = w.dot(s);
    EXPECT_LT(mass, prev);
    prev = mass;
  }
}

TEST(Forward, EigenmodeNormDecay) {
  const Problem p = problem(interval(64), "laplace", "theta_const(1)");
  const Mode mode = slowest(p);
  const TimeGrid g{0.0, 0.5, 25};
  const Trajectory t = solve_forward(p, mode.phi, {}, g);
  const double n0 = std::sqrt(mass_norm2(p, mode.phi));
  for (std::size_t k = 0; k <= g.steps; ++k) {
    const double expected = n0 * std::pow(1.0 + g.dt() * mode.mu, -static_cast<double>(k));
    EXPECT_NEAR(std::sqrt(t.energy_log[k].mass), expected, 1e-10 * n0);
  }
  EXPECT_NEAR(decay_rate(t), std::log1p(g.dt() * mode.mu) / g.dt(), 1e-6);
}

TEST(Forward, EnergyIdentity) {
  const auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(1.0, 1.0, 6, 6));
  const Problem p = problem(mesh, "tensor2(1,0.3,-0.3,1)", "theta_const(0.5)");
  const SourceFn f = [](const Point& x, double t) { return Vector::Constant(1, std::sin(3.0 * x[0]) + t); };
  const TimeGrid g{0.0, 0.2, 20};
  const StepLoad load = pointwise_load(p, f, g.scheme);
  const Trajectory t = solve_forward(p, Vector::Zero(static_cast<Eigen::Index>(p.ndof())), load, g);
  for (double r : energy_identity_residuals(p, t, load)) EXPECT_LE(r, 1e-10);
  EXPECT_GT(energy_ratio(p, t, f, Vector::Zero(static_cast<Eigen::Index>(p.ndof()))), 0.0);
}

TEST(Forward, Causality) {
  const Problem p = problem(interval(32), "laplace", "theta_const(1)");
  const TimeGrid g{0.0, 1.0, 20};
  auto src = [](double cutoff) -> SourceFn {
    return [cutoff](const Point& x, double t) { return Vector::Constant(1, t > cutoff ? 5.0 : x[0]); };
  };
  const Vector u0 = Vector::Zero(33);
  const auto a = solve_forward(p, u0, pointwise_load(p, src(0.5), g.scheme), g);
  const auto b = solve_forward(p, u0, pointwise_load(p, src(2.0), g.scheme), g);
  for (std::size_t k = 0; k <= 10; ++k) EXPECT_EQ(a.snapshots[k], b.snapshots[k]);
  EXPECT_NE(a.snapshots[11], b.snapshots[11]);
}

TEST(Forward, LumpedPositivity) {
  const auto mesh = std::make_shared<const Mesh>(build_lshape_mesh(4));
  const Problem p = problem(mesh, "checkerboard(3,1)", "theta_const(1)", 1, true);
  Vector u0 = Vector::Zero(static_cast<Eigen::Index>(p.ndof()));
  u0[7] = 1.0;
  const Trajectory t = solve_forward(p, u0, {}, {0.0, 0.1, 20});
  for (const auto& s : t.snapshots) EXPECT_GE(s.minCoeff(), 0.0);
}

TEST(Backward, SymmetricMatchesForward) {
  const Problem p = problem(interval(32), "laplace", "theta_const(1)");
  const TimeGrid g{0.0, 0.3, 30};
  const Vector psi = Vector::LinSpaced(33, -1.0, 2.0);
  const auto fwd = solve_forward(p, psi, {}, g);
  const auto bwd = solve_backward_adjoint(p, psi, {}, g);
  EXPECT_EQ(bwd.direction, Direction::backward);
  for (std::size_t k = 0; k <= g.steps; ++k)
    EXPECT_LE((bwd.snapshots[g.steps - k] - fwd.snapshots[k]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Backward, ZeroStaysZero) {
  const Problem p = problem(interval(8), "laplace", "theta_const(1)");
  const auto bwd = solve_backward_adjoint(p, Vector::Zero(9), {}, {0.0, 1.0, 4});
  for (const auto& s : bwd.snapshots) EXPECT_EQ(s.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, TransposeDuality) {
  const auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(1.0, 1.0, 5, 5));
  for (Scheme scheme : {Scheme::implicit_euler, Scheme::crank_nicolson}) {
    const Problem p = problem(mesh, "system2_skew(0.4)", "theta_matrix(1,0.5,-0.5,2)", 2);
    const TimeGrid g{0.0, 0.2, 10, scheme};
    const auto n = static_cast<Eigen::Index>(p.ndof());
    const Vector psi0 = Vector::LinSpaced(n, 0.0, 1.0).array().sin();
    const Vector psiT = Vector::LinSpaced(n, -1.0, 3.0).array().cos();
    Forms f(p);
    const double lhs = solve_forward(p, psi0, {}, g).snapshots.back().dot(f.mass() * psiT);
    const double rhs = psi0.dot(f.mass() * solve_backward_adjoint(p, psiT, {}, g).snapshots.front());
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
  }
}

TEST(Norms, TriNormOfConstantField) {
  const auto mesh = interval(16);
  const Problem p = problem(mesh, "laplace", "theta_const(0)");
  Trajectory t;
  t.mesh = mesh;
  t.grid = {0.0, 2.0, 8};
  Vector w(17);
  for (Index v = 0; v < 17; ++v) w[static_cast<Eigen::Index>(v)] = mesh->vertex(v)[0];
  t.snapshots.assign(9, w);
  fill_energy_log(p, t);
  Forms f(p);
  const double expected = w.dot(f.mass() * w) + 2.0 * p.lambda_tilde * w.dot(f.unit_stiffness() * w);
  EXPECT_NEAR(tri_norm(t) * tri_norm(t), expected, 1e-13);
}

TEST(Norms, NeumannConstantHasNoDecay) {
  const Problem p = problem(interval(16), "laplace", "theta_const(0)");
  EXPECT_NEAR(decay_rate(solve_forward(p, Vector::Constant(17, 2.0), {}, {0.0, 1.0, 20})), 0.0, 1e-12);
}

TEST(Grid, RejectsDegenerateWindow) {
  EXPECT_THROW((TimeGrid{0.5, 0.5, 4}).validate(), Error);
  EXPECT_THROW((TimeGrid{0.0, 1.0, 0}).validate(), Error);
  const Problem p = problem(interval(4), "laplace", "theta_const(1)");
  EXPECT_THROW(solve_forward(p, Vector::Zero(5), {}, {1.0, 1.0, 3}), Error);
}

}  // namespace
}  // namespace rg
