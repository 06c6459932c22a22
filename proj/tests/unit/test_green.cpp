#include <cmath>

#include <gtest/gtest.h>

#include "coercivity.hpp"
#include "error.hpp"
#include "green.hpp"
#include "oracle.hpp"

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

double closed_form(double x, double y) { return (1.0 + std::min(x, y)) * (2.0 - std::max(x, y)) / 3.0; }

TEST(AveragedGreen, LoadMassIsOne) {
  const Problem p = problem(interval(128), "laplace", "theta_const(1)");
  const auto col = averaged_green(p, {{0.4, 0.0}, 0.1}, 0.05, 0, {0.0, 0.2, 200});
  EXPECT_NEAR(col.load_mass, 1.0, 1e-10);
  const auto sq = std::make_shared<const Mesh>(build_rectangle_mesh(1.0, 1.0, 16, 16));
  const auto col2 = averaged_green(problem(sq, "laplace", "theta_const(1)"), {{0.5, 0.5}, 0.1}, 0.2, 0,
                                   {0.0, 0.2, 40});
  EXPECT_NEAR(col2.load_mass, 1.0, 1e-10);
}

TEST(AveragedGreen, ShrinkingRadiusConverges) {
  const auto mesh = interval(256);
  const Problem p = problem(mesh, "laplace", "theta_const(1)");
  const TimeGrid g{0.0, 0.3, 1200};
  const Index far = mesh->nearest_vertex({0.8, 0.0});
  std::vector<double> values;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto col = averaged_green(p, {{0.5, 0.0}, 0.2}, eps, 0, g);
    values.push_back(col.trajectory.snapshots.back()[static_cast<Eigen::Index>(far)]);
  }
  EXPECT_LE(std::abs(values[2] - values[1]), 0.02 * std::abs(values[2]));
  // The sharp column started at s is the limit.
  const auto sharp = green_eval(p, mesh->vertex(far), 0.3, mesh->nearest_vertex({0.5, 0.0}), 0.2, g);
  EXPECT_LE(std::abs(values[2] - sharp.value(0, 0)), 0.02 * std::abs(sharp.value(0, 0)));
}

TEST(AveragedGreen, DualityProbe) {
  const auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(1.0, 1.0, 12, 12));
  const Problem p = problem(mesh, "tensor2(1,0.3,-0.3,1)", "theta_const(1)");
  const SourceFn f = [](const Point& x, double t) { return Vector::Constant(1, std::cos(2.0 * x[0]) + x[1] * t); };
  const auto d = averaged_green_duality(p, {{0.5, 0.5}, 0.15}, 0.2, 0, f, {0.0, 0.2, 40});
  EXPECT_LE(d.relative_error, 1e-8);
}

TEST(HeatKernel, LumpedMassAtMostOne) {
  const auto mesh = interval(64);
  const Problem p = problem(mesh, "laplace", "theta_const(1)", 1, true);
  const auto col = heat_kernel_column(p, 20, 0, {0.0, 0.5, 100});
  Forms f(p);
  const Vector w = f.mass() * Vector::Ones(65);
  for (const auto& s : col.trajectory.snapshots) EXPECT_LE(w.dot(s), 1.0 + 1e-14);
}

TEST(HeatKernel, ShortTimeGaussian) {
  const auto mesh = interval(512);
  const Problem p = problem(mesh, "laplace", "theta_const(1)");
  const Index y = mesh->nearest_vertex({0.5, 0.0});
  const double t = 1e-3;
  const auto col = heat_kernel_column(p, y, 0, {0.0, t, 400});
  const Vector& u = col.trajectory.snapshots.back();
  std::size_t checked = 0;
  for (Index v = 0; v < mesh->num_vertices(); ++v) {
    const double r = std::abs(mesh->vertex(v)[0] - 0.5);
    if (r > 3.0 * std::sqrt(t)) continue;
    const double g = free_space_heat_kernel(1, r, t);
    EXPECT_LE(std::abs(u[static_cast<Eigen::Index>(v)] - g), 0.05 * g) << "r=" << r;
    ++checked;
  }
  EXPECT_GT(checked, 40u);
}

TEST(HeatKernel, DeltaMoment) {
  const auto mesh = interval(256);
  const Problem p = problem(mesh, "laplace", "theta_const(1)");
  const Index y = mesh->nearest_vertex({0.3, 0.0});
  Vector phi(257);
  for (Index v = 0; v < 257; ++v) phi[static_cast<Eigen::Index>(v)] = std::cos(3.0 * mesh->vertex(v)[0]);
  Forms f(p);
  const auto col = heat_kernel_column(p, y, 0, {0.0, 1e-3, 100});
  const auto& snaps = col.trajectory.snapshots;
  const double target = phi[static_cast<Eigen::Index>(y)];
  EXPECT_NEAR(phi.dot(f.mass() * snaps.front()), target, 1e-12);
  const double e_mid = std::abs(phi.dot(f.mass() * snaps[50]) - target);
  const double e_end = std::abs(phi.dot(f.mass() * snaps.back()) - target);
  EXPECT_LT(e_mid, e_end);
  EXPECT_LT(e_end, 1e-2);
}

TEST(GreenEval, ZeroBeforeSource) {
  const auto mesh = interval(32);
  const Problem p = problem(mesh, "laplace", "theta_const(1)");
  const auto g = green_eval(p, {0.3, 0.0}, 0.1, 16, 0.2, {0.0, 0.5, 50});
  EXPECT_EQ(g.value.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(green_eval(p, mesh->vertex(16), 0.2, 16, 0.2, {0.0, 0.5, 50}), Error);
}

TEST(GreenEval, TimeTranslation) {
  const auto mesh = interval(64);
  const Problem p = problem(mesh, "laplace", "theta_const(1)");
  const TimeGrid g{0.0, 0.5, 100};
  const auto a = green_eval(p, {0.7, 0.0}, 0.45, 32, 0.2, g);
  const auto b = green_eval(p, {0.7, 0.0}, 0.25, 32, 0.0, g);
  EXPECT_NEAR(a.value(0, 0), b.value(0, 0), 1e-12 * std::abs(b.value(0, 0)));
}

TEST(GreenEval, CrankNicolsonDuality) {
  const auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(1.0, 1.0, 8, 8));
  const Problem p = problem(mesh, "system2_skew(0.3)", "theta_matrix(1,0.2,-0.2,1)", 2);
  const TimeGrid g{0.0, 0.2, 40, Scheme::crank_nicolson};
  const Index x = mesh->nearest_vertex({0.25, 0.5});
  const Index y = mesh->nearest_vertex({0.75, 0.5});
  const auto fwd = green_eval(p, mesh->vertex(x), 0.15, y, 0.05, g);
  const auto adj = adjoint_green_eval(p, x, 0.15, mesh->vertex(y), 0.05, g);
  EXPECT_LE((fwd.value - adj.value.transpose()).norm(), 1e-8 * fwd.value.norm());
}

TEST(EllipticGreen, ClosedFormInOneDimension) {
  const auto mesh = interval(64);
  const Problem p = problem(mesh, "laplace", "theta_const(1)");
  const Index y = mesh->nearest_vertex({0.5, 0.0});
  const Matrix steady = steady_green(p, y);
  for (Index v = 0; v < mesh->num_vertices(); ++v)
    EXPECT_NEAR(steady(static_cast<Eigen::Index>(v), 0), closed_form(mesh->vertex(v)[0], 0.5), 1e-12);
  const double theta0 = check_h1(p, {0.0}).theta0;
  const EllipticGreen g = elliptic_green(p, y, theta0);
  EXPECT_NEAR(g.values(static_cast<Eigen::Index>(y), 0), 0.75, 0.005 * 0.75);
  EXPECT_LE((g.values - steady).norm(), 1e-3 * steady.norm());
}

TEST(EllipticGreen, SteadySymmetry) {
  const auto mesh = std::make_shared<const Mesh>(build_lshape_mesh(8));
  const Problem p = problem(mesh, "checkerboard(2,1)", "theta_const(1)");
  const Index a = mesh->nearest_vertex({0.25, 0.75});
  const Index b = mesh->nearest_vertex({0.75, 0.25});
  const double gab = steady_green(p, b)(static_cast<Eigen::Index>(a), 0);
  const double gba = steady_green(p, a)(static_cast<Eigen::Index>(b), 0);
  EXPECT_NEAR(gab, gba, 1e-6 * std::abs(gab));
}

TEST(EllipticGreen, RejectsNonPositiveTheta0) {
  const Problem p = problem(interval(16), "laplace", "theta_const(0)");
  EXPECT_THROW(elliptic_green(p, 8, 0.0), Error);
}

TEST(Representation, RandomSourceMatchesDirectSolve) {
  const Problem p = problem(interval(32), "laplace", "theta_const(1)");
  const SourceFn f = [](const Point& x, double t) {
    return Vector::Constant(1, std::sin(7.0 * x[0] + 1.3) * std::cos(11.0 * t) + 0.3);
  };
  for (Scheme scheme : {Scheme::implicit_euler, Scheme::crank_nicolson}) {
    const auto r = represent_solution(p, f, {0.0, 0.5, 64, scheme});
    EXPECT_LE(r.relative_error, 1e-8);
  }
}

TEST(Representation, LateSourceLeavesEarlyTimesZero) {
  const Problem p = problem(interval(16), "laplace", "theta_const(1)");
  const SourceFn f = [](const Point&, double t) { return Vector::Constant(1, t > 0.5 ? 1.0 : 0.0); };
  const TimeGrid g{0.0, 1.0, 20};
  const auto r = represent_solution(p, f, g);
  for (std::size_t k = 0; k <= 10; ++k) EXPECT_EQ(r.superposed.snapshots[k].cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(r.superposed.snapshots.back().cwiseAbs().maxCoeff(), 0.0);
}

}  // namespace
}  // namespace rg
