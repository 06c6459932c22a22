#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "error.hpp"
#include "verify.hpp"

namespace rg {
namespace {

KernelSample sample1d(double x, double t, double y, double s, double value) {
  KernelSample k;
  k.x = {x, 0.0};
  k.t = t;
  k.y = {y, 0.0};
  k.s = s;
  k.value = Matrix::Constant(1, 1, value);
  return k;
}

std::vector<KernelSample> gaussian_samples(double C, double kappa) {
  std::vector<KernelSample> out;
  for (double tau : {1e-3, 2e-3, 5e-3, 1e-2})
    for (int i = 1; i <= 12; ++i) {
      const double r = 0.02 * i;
      out.push_back(sample1d(0.5 + r, tau, 0.5, 0.0, C / std::sqrt(tau) * std::exp(-kappa * r * r / tau)));
    }
  return out;
}

std::shared_ptr<const Mesh> interval(std::size_t n) {
  return std::make_shared<const Mesh>(build_interval_mesh(0.0, 1.0, n));
}

Problem problem(std::shared_ptr<const Mesh> mesh, const std::string& coeff, const std::string& theta) {
  return make_problem(mesh, coefficient_from_name(coeff, 1, mesh->dimension()), theta_from_name(theta, 1, *mesh));
}

TEST(GaussianFit, RecoversSyntheticModel) {
  const GaussianFit fit = fit_gaussian_bound(gaussian_samples(1.0, 0.25), 1, 1.0, 1.0);
  EXPECT_NEAR(fit.C_fit, 1.0, 1e-10);
  EXPECT_NEAR(fit.kappa, 0.25, 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-10);
  EXPECT_EQ(fit.violations, 0u);
  EXPECT_TRUE(fit.pass);
}

TEST(GaussianFit, EnvelopeHoldsAfterInflation) {
  auto samples = gaussian_samples(2.0, 0.3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.5, 3.0);
  for (auto& s : samples) s.value *= U(rng);
  const GaussianFit fit = fit_gaussian_bound(samples, 1, 1.0, 2.0);
  EXPECT_EQ(fit.violations, 0u);
  EXPECT_EQ(count_envelope_violations(fit, samples, 1, 1.0), 0u);
  EXPECT_GE(fit.C, fit.C_fit);
}

TEST(GaussianFit, OrderIndependent) {
  auto samples = gaussian_samples(1.5, 0.2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.8, 1.2);
  for (auto& s : samples) s.value *= U(rng);
  const GaussianFit a = fit_gaussian_bound(samples, 1, 1.0, 2.0);
  std::shuffle(samples.begin(), samples.end(), rng);
  const GaussianFit b = fit_gaussian_bound(samples, 1, 1.0, 2.0);
  EXPECT_NEAR(a.kappa, b.kappa, 1e-12);
  EXPECT_NEAR(a.C, b.C, 1e-12 * a.C);
}

TEST(GaussianFit, Preconditions) {
  auto samples = gaussian_samples(1.0, 0.25);
  samples.push_back(sample1d(0.6, 0.1, 0.5, 0.2, 1.0));
  EXPECT_THROW(fit_gaussian_bound(samples, 1, 1.0, 2.0), Error);
  const auto all = gaussian_samples(1.0, 0.25);
  const std::vector<KernelSample> few(all.begin(), all.begin() + 5);
  EXPECT_THROW(fit_gaussian_bound(few, 1, 1.0, 2.0), Error);
  EXPECT_THROW(fit_gaussian_bound(gaussian_samples(1.0, 0.25), 1, 1.0, 0.5), Error);
}

TEST(OffDiagonal, SyntheticPowerLaw) {
  std::vector<KernelSample> samples;
  for (int k = 0; k < 6; ++k) {
    const double d = 0.004 * std::pow(2.0, k);
    samples.push_back(sample1d(0.5 + d, d * d, 0.5, 0.0, 1.0 / d));
  }
  samples.push_back(sample1d(0.501, 1e-6, 0.5, 0.0, 1000.0));
  samples.push_back(sample1d(0.9, 0.01, 0.5, 0.0, 2.5));
  const BoundReport r = check_offdiagonal_decay(samples, 1, 0.001, 0.2);
  EXPECT_NEAR(r.exponent_fitted, 1.0, 1e-10);
  EXPECT_EQ(r.excluded, 2u);
  EXPECT_TRUE(r.pass);
}

TEST(OffDiagonal, ShortLadderRejected) {
  std::vector<KernelSample> samples;
  for (int k = 0; k < 2; ++k) {
    const double d = 0.01 * std::pow(2.0, k);
    samples.push_back(sample1d(0.5 + d, d * d, 0.5, 0.0, 1.0 / d));
  }
  EXPECT_THROW(check_offdiagonal_decay(samples, 1, 0.001, 0.2), Error);
}

TEST(Symmetry, SelfAdjointCrankNicolson) {
  const auto mesh = interval(32);
  const Problem p = problem(mesh, "laplace", "theta_const(1)");
  const std::vector<SymmetryPair> pairs{{8, 0.3, 20, 0.1}, {24, 0.25, 16, 0.05}};
  const BoundReport r = check_symmetry(p, pairs, {0.0, 0.4, 80, Scheme::crank_nicolson}, 1e-8);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.kind, BoundKind::symmetry);
  EXPECT_THROW(check_symmetry(p, {{8, 0.2, 20, 0.2}}, {0.0, 0.4, 80}, 1e-8), Error);
  EXPECT_THROW(check_symmetry(p, {}, {0.0, 0.4, 80}, 1e-8), Error);
}

TEST(EllipticBounds, SyntheticLogPasses) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 32, 32);
  const Index y = mesh.nearest_vertex({0.5, 0.5});
  Matrix G(static_cast<Eigen::Index>(mesh.num_vertices()), 1);
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    const double r = distance(mesh.vertex(v), mesh.vertex(y), 2);
    G(static_cast<Eigen::Index>(v), 0) = r > 0.0 ? 1.0 + std::log(mesh.diameter() / r) : 10.0;
  }
  const BoundReport r = check_elliptic_bounds(G, mesh, y);
  EXPECT_EQ(r.kind, BoundKind::elliptic_log);
  EXPECT_TRUE(r.pass);
}

TEST(EllipticBounds, OneDimensionDowngraded) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 64);
  Matrix G(65, 1);
  for (Index v = 0; v < 65; ++v) {
    const double x = mesh.vertex(v)[0];
    G(static_cast<Eigen::Index>(v), 0) = (1.0 + std::min(x, 0.5)) * (2.0 - std::max(x, 0.5)) / 3.0;
  }
  const BoundReport r = check_elliptic_bounds(G, mesh, 32);
  EXPECT_EQ(r.kind, BoundKind::elliptic_bounded);
  EXPECT_TRUE(r.pass);
}

TEST(LocalBoundedness, RescalingInvariance) {
  const auto mesh = interval(64);
  const Problem p = problem(mesh, "laplace", "theta_const(1)");
  Vector u0(65);
  for (Index v = 0; v < 65; ++v) {
    const double d = mesh->vertex(v)[0] - 0.4;
    u0[static_cast<Eigen::Index>(v)] = std::exp(-d * d / 0.02);
  }
  const Trajectory t = solve_forward(p, u0, {}, {0.0, 0.25, 128});
  Trajectory scaled = t;
  for (auto& s : scaled.snapshots) s *= 4.0;
  const double a = check_local_boundedness(t, {0.5, 0.0}, 0.25).constants.at("ratio");
  const double b = check_local_boundedness(scaled, {0.5, 0.0}, 0.25).constants.at("ratio");
  EXPECT_EQ(a, b);
  EXPECT_THROW(check_local_boundedness(t, {0.5, 0.0}, 0.6), Error);
}

TEST(Decay, ConservedModeHoldsWithEquality) {
  const Problem p = problem(interval(16), "laplace", "theta_const(0)");
  const Trajectory t = solve_forward(p, Vector::Constant(17, 1.0), {}, {0.0, 1.0, 10});
  const DecayCheck d = check_decay_vs_theta0(t, 0.0);
  EXPECT_TRUE(d.pass);
  EXPECT_NEAR(d.worst_log_excess, 0.0, 1e-12);
}

TEST(Decay, InflatedRateFailsOnSlowestMode) {
  const Problem p = problem(interval(64), "laplace", "theta_const(1)");
  Forms f(p);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Matrix(f.operator_at(0.0)), Matrix(f.mass()));
  const double mu = es.eigenvalues()[0];
  const Trajectory t = solve_forward(p, es.eigenvectors().col(0), {}, {0.0, 1.0, 200});
  EXPECT_TRUE(check_decay_vs_theta0(t, mu).pass);
  EXPECT_FALSE(check_decay_vs_theta0(t, 1.1 * mu).pass);
}

}  // namespace
}  // namespace rg
