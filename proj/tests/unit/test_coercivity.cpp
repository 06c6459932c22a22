#include <random>

#include <gtest/gtest.h>

#include "coercivity.hpp"
#include "error.hpp"
#include "oracle.hpp"
#include "problem.hpp"

namespace rg {
namespace {

Problem scalar_problem(std::shared_ptr<const Mesh> mesh, const std::string& theta, int m = 1) {
  return make_problem(mesh, coefficient_from_name("laplace", m, mesh->dimension()),
                      theta_from_name(theta, m, *mesh), 0.5);
}

std::shared_ptr<const Mesh> interval(std::size_t n) {
  return std::make_shared<const Mesh>(build_interval_mesh(0.0, 1.0, n));
}

double dense_min(const Problem& p) {
  Forms f(p);
  const Matrix B = Matrix(f.robin_at(0.0));
  return dense_generalized_eig(Matrix(f.mass()), Matrix(f.unit_stiffness()), B, p.lambda_tilde).front();
}

TEST(Coercivity, RobinIntervalMatchesDense) {
  const Problem p = scalar_problem(interval(64), "theta_const(1)");
  const auto r = check_h1(p, {0.0});
  ASSERT_TRUE(r.converged);
  EXPECT_GT(r.theta0, 0.0);
  EXPECT_NEAR(r.theta0, dense_min(p), 1e-6 * dense_min(p));
  EXPECT_DOUBLE_EQ(r.lambda_tilde, 0.5);
}

TEST(Coercivity, NeumannIsZero) {
  const auto r = check_h1(scalar_problem(interval(64), "theta_const(0)"), {0.0});
  EXPECT_NEAR(r.theta0, 0.0, 1e-10);
  EXPECT_FALSE(r.delta_ok);
}

TEST(Coercivity, RankOneIsPositive) {
  const Problem p = scalar_problem(interval(32), "theta_rank1(1)");
  const auto r = check_h1(p, {0.0});
  EXPECT_GT(r.theta0, 1e-3);
  EXPECT_NEAR(r.theta0, dense_min(p), 1e-6 * dense_min(p));
}

TEST(Coercivity, RayleighQuotientOfEigenvector) {
  const Problem p = scalar_problem(std::make_shared<const Mesh>(build_lshape_mesh(4)), "theta_const(0.7)");
  Forms f(p);
  const auto r = estimate_theta0(f.mass(), f.unit_stiffness(), f.robin_at(0.0), p.lambda_tilde);
  const Vector& u = r.eigvec;
  const SparseMatrix& M = f.mass();
  const SparseMatrix& K = f.unit_stiffness();
  const SparseMatrix B = f.robin_at(0.0);
  const double q = (p.lambda_tilde * u.dot(K * u) + u.dot(B * u)) / (u.dot(M * u) + u.dot(K * u));
  EXPECT_NEAR(q, r.theta0, 1e-8 * r.theta0);
}

TEST(Coercivity, TimeIndependentCachingIsExact) {
  const Problem p = scalar_problem(interval(32), "theta_const(2)");
  Forms f(p);
  const auto single = estimate_theta0(f.mass(), f.unit_stiffness(), f.robin_at(0.0), p.lambda_tilde);
  const auto multi = check_h1(p, {0.0, 0.5, 1.0});
  EXPECT_EQ(single.theta0, multi.theta0);
}

TEST(Coercivity, IncreasingThetaWorstAtStart) {
  const auto r = check_h1(scalar_problem(interval(32), "theta_linear_t(1)"), {0.0, 1.0});
  EXPECT_EQ(r.t_worst, 0.0);
}

TEST(Coercivity, SingularIntegralFlagged) {
  const auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(1.0, 1.0, 6, 6));
  const auto r = check_h1(scalar_problem(mesh, "theta_matrix(1,0,0,0)", 2), {0.0});
  EXPECT_NEAR(r.theta0, 0.0, 1e-8);
  EXPECT_FALSE(r.delta_ok);
  EXPECT_NEAR(r.delta, 0.0, 1e-14);
}

TEST(Coercivity, PsdPerturbationNeverDecreases) {
  const Problem p = scalar_problem(interval(24), "theta_const(0.5)");
  Forms f(p);
  const SparseMatrix B = f.robin_at(0.0);
  const double base = estimate_theta0(f.mass(), f.unit_stiffness(), B, p.lambda_tilde).theta0;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 3; ++trial) {
    Vector w(B.rows());
    for (auto& x : w) x = N(rng);
    const SparseMatrix extra = (0.01 * w * w.transpose()).sparseView();
    const double bigger = estimate_theta0(f.mass(), f.unit_stiffness(), B + extra, p.lambda_tilde).theta0;
    EXPECT_GE(bigger, base - 1e-10);
  }
}

TEST(Coercivity, ScaleLaw) {
  const Problem p = scalar_problem(interval(32), "theta_const(1)");
  Forms f(p);
  const SparseMatrix B = f.robin_at(0.0);
  const double a = estimate_theta0(f.mass(), f.unit_stiffness(), B, 0.25).theta0;
  const double b = estimate_theta0(f.mass(), f.unit_stiffness(), 3.0 * B, 0.75).theta0;
  EXPECT_NEAR(b, 3.0 * a, 1e-9 * b);
}

TEST(Coercivity, RefinementTrend) {
  auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(1.0, 1.0, 4, 4));
  std::vector<double> values;
  for (int level = 0; level < 3; ++level) {
    values.push_back(check_h1(scalar_problem(mesh, "theta_const(1)"), {0.0}).theta0);
    mesh = std::make_shared<const Mesh>(refine(*mesh));
  }
  EXPECT_LE(values[1], values[0] + 1e-8);
  EXPECT_LE(values[2], values[1] + 1e-8);
  EXPECT_LE(std::abs(values[2] - values[1]), 0.02 * values[2]);
}

TEST(Coercivity, LambdaTildeOutOfRange) {
  const Problem p = scalar_problem(interval(8), "theta_const(1)");
  Forms f(p);
  EXPECT_THROW(estimate_theta0(f.mass(), f.unit_stiffness(), f.robin_at(0.0), 1.5), Error);
  EXPECT_THROW(estimate_theta0(f.mass(), f.unit_stiffness(), f.robin_at(0.0), 0.0), Error);
}

}  // namespace
}  // namespace rg
