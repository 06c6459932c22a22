#include <cmath>

#include <gtest/gtest.h>

#include "error.hpp"
#include "oracle.hpp"
#include "problem.hpp"
#include "green.hpp"

namespace rg {
namespace {

TEST(Eigenbasis, MatchingResidualAndOrthonormality) {
  for (const auto& [tl, tr] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {0.0, 3.0}, {0.3, 0.0}, {5.0, 2.0}}) {
    const RobinEigenbasis1D basis(tl, tr);
    basis.ensure(8);
    for (std::size_t k = 0; k < 8; ++k) EXPECT_LE(basis.matching_residual(k), 1e-10);
    // Composite Simpson on a fine grid.
    const int n = 4000;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = i; j < 8; ++j) {
        double sum = 0.0;
        for (int q = 0; q <= n; ++q) {
          const double x = static_cast<double>(q) / n;
          const double w = (q == 0 || q == n) ? 1.0 : (q % 2 ? 4.0 : 2.0);
          sum += w * basis.eigenfunction(i, x) * basis.eigenfunction(j, x);
        }
        sum /= 3.0 * n;
        EXPECT_NEAR(sum, i == j ? 1.0 : 0.0, 1e-10) << tl << "," << tr << " " << i << "," << j;
      }
  }
}

TEST(Eigenbasis, EigenvaluesInterlace) {
  const RobinEigenbasis1D basis(1.0, 1.0);
  for (std::size_t k = 0; k < 20; ++k) {
    const double w = std::sqrt(basis.eigenvalue(k));
    EXPECT_GT(w, static_cast<double>(k) * M_PI);
    EXPECT_LT(w, static_cast<double>(k + 1) * M_PI);
  }
}

TEST(Series, NeumannTendsToOne) {
  EXPECT_NEAR(series_heat_kernel_1d(0.0, 0.0, 0.2, 0.7, 10.0).value, 1.0, 1e-12);
}

TEST(Series, RobinMassBelowOne) {
  const RobinEigenbasis1D basis(1.0, 1.0);
  for (double t : {1e-3, 1e-2, 0.1, 1.0}) {
    const double mass = series_kernel_mass_1d(basis, 0.3, t).value;
    EXPECT_LT(mass, 1.0) << t;
    EXPECT_GT(mass, 0.0) << t;
  }
}

TEST(Series, Symmetric) {
  const RobinEigenbasis1D basis(2.0, 0.5);
  for (double t : {1e-3, 0.05, 0.4})
    EXPECT_EQ(series_heat_kernel_1d(basis, 0.23, 0.71, t).value, series_heat_kernel_1d(basis, 0.71, 0.23, t).value);
}

TEST(Series, ShortTimeFreeSpace) {
  const double t = 1e-4;
  for (double r : {0.0, 0.01, 0.02}) {
    const auto v = series_heat_kernel_1d(1.0, 1.0, 0.5 + r, 0.5, t);
    const double g = free_space_heat_kernel(1, r, t);
    EXPECT_NEAR(v.value, g, 1e-9 * g);
    EXPECT_TRUE(series_resolved(v));
  }
}

TEST(Series, TruncationBoundHolds) {
  const RobinEigenbasis1D basis(1.0, 1.0);
  const double t = 2e-3;
  const auto v = series_heat_kernel_1d(basis, 0.4, 0.45, t);
  double full = 0.0;
  for (std::size_t k = 0; k < v.terms + 200; ++k)
    full += std::exp(-basis.eigenvalue(k) * t) * basis.eigenfunction(k, 0.4) * basis.eigenfunction(k, 0.45);
  EXPECT_LE(std::abs(full - v.value), v.tail_bound + v.roundoff_bound);
  EXPECT_LE(v.tail_bound, 1e-12 * std::abs(v.value));
}

TEST(Series, FarTailIsUnresolved) {
  const auto v = series_heat_kernel_1d(1.0, 1.0, 0.002, 0.5, 1e-3);
  EXPECT_FALSE(series_resolved(v));
}

TEST(Series, Errors) {
  EXPECT_THROW(series_heat_kernel_1d(1.0, 1.0, 0.2, 0.5, 0.0), Error);
  EXPECT_THROW(series_heat_kernel_1d(-1.0, 1.0, 0.2, 0.5, 0.1), Error);
  EXPECT_THROW(series_heat_kernel_1d(1.0, 1.0, 0.2, 0.5, 1e-4, 3), Error);
}

TEST(Series, SampleIsCausal) {
  const RobinEigenbasis1D basis(1.0, 1.0);
  bool resolved = false;
  const auto s = series_sample(basis, 0.3, 0.1, 0.5, 0.2, &resolved);
  EXPECT_EQ(s.value(0, 0), 0.0);
  EXPECT_TRUE(resolved);
  EXPECT_EQ(s.source, "oracle");
}

TEST(DenseEig, TwoByTwo) {
  Matrix M = Matrix::Identity(2, 2), K(2, 2), B = Matrix::Zero(2, 2);
  K << 1.0, 0.0, 0.0, 3.0;
  const auto ev = dense_generalized_eig(M, K, B, 0.5);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_NEAR(ev[0], 0.25, 1e-15);
  EXPECT_NEAR(ev[1], 0.375, 1e-15);
}

TEST(DenseEig, CoupledPencil) {
  Matrix M(2, 2), K = Matrix::Zero(2, 2), B(2, 2);
  M << 2.0, 1.0, 1.0, 2.0;
  B << 1.0, 0.0, 0.0, 0.0;
  // det(B - mu M) = (1 - 2 mu)(-2 mu) - mu^2 = 3 mu^2 - 2 mu, roots 0 and 2/3.
  const auto ev = dense_generalized_eig(M, K, B, 0.5);
  EXPECT_NEAR(ev[0], 0.0, 1e-15);
  EXPECT_NEAR(ev[1], 2.0 / 3.0, 1e-14);
}

Problem fd_problem(const std::string& theta) {
  auto mesh = std::make_shared<const Mesh>(build_interval_mesh(0.0, 1.0, 16));
  return make_problem(mesh, coefficient_from_name("laplace", 1, 1), theta_from_name(theta, 1, *mesh));
}

TEST(FiniteDifference, NeumannConstantIsSteady) {
  const auto fd = dense_reference_solve(fd_problem("theta_const(0)"), 64, {0.0, 1.0, 20},
                                        [](double) { return 2.5; });
  for (const auto& row : fd.values)
    for (double v : row) EXPECT_NEAR(v, 2.5, 1e-13);
}

TEST(FiniteDifference, EigenmodeDecayRate) {
  const RobinEigenbasis1D basis(1.0, 1.0);
  const TimeGrid g{0.0, 0.1, 100};
  const auto fd = dense_reference_solve(fd_problem("theta_const(1)"), 512, g,
                                        [&](double x) { return basis.eigenfunction(0, x); });
  const double ratio = fd.at(g.steps, 0.5) / fd.at(g.steps - 1, 0.5);
  // Undo the implicit Euler distortion 1 / (1 + dt mu).
  const double mu = (1.0 / ratio - 1.0) / g.dt();
  EXPECT_NEAR(mu, basis.eigenvalue(0), 1e-4 * basis.eigenvalue(0));
}

TEST(FiniteDifference, RejectsTwoDimensions) {
  auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(1.0, 1.0, 2, 2));
  const Problem p =
      make_problem(mesh, coefficient_from_name("laplace", 1, 2), theta_from_name("theta_const(1)", 1, *mesh));
  EXPECT_THROW(dense_reference_solve(p, 64, {0.0, 1.0, 2}, [](double) { return 1.0; }), Error);
}

}  // namespace
}  // namespace rg
