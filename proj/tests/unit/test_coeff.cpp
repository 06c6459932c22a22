#include <cmath>

#include <gtest/gtest.h>

#include "coeff.hpp"
#include "error.hpp"
#include "mesh.hpp"

namespace rg {
namespace {

const Mesh& square() {
  static const Mesh m = build_rectangle_mesh(1.0, 1.0, 4, 4);
  return m;
}

TEST(Ellipticity, Laplacian) {
  const auto r = validate_ellipticity(coefficient_from_name("laplace", 1, 2), square(), {0.0});
  EXPECT_NEAR(r.lambda_lower, 1.0, 1e-12);
  EXPECT_TRUE(r.lambda_upper_ok);
  EXPECT_TRUE(r.ok);
}

TEST(Ellipticity, Diagonal) {
  const auto f = coefficient_from_name("diag(2,0.5)", 1, 2);
  EXPECT_DOUBLE_EQ(f.lambda, 0.5);
  const auto r = validate_ellipticity(f, square(), {0.0});
  EXPECT_NEAR(r.lambda_lower, 0.5, 1e-9);
  EXPECT_TRUE(r.lambda_upper_ok);
}

TEST(Ellipticity, SkewCouplingDropsOut) {
  const auto r = validate_ellipticity(coefficient_from_name("system2_skew(0.3)", 2, 2), square(), {0.0});
  EXPECT_NEAR(r.lambda_lower, 1.0, 1e-12);
}

TEST(Ellipticity, AdjointGivesSameLowerBound) {
  for (const char* name : {"tensor2(1,0.3,-0.3,1)", "checkerboard(2,0.5)", "skew_osc(0.5,20)"}) {
    const auto f = coefficient_from_name(name, 1, 2);
    const std::vector<double> ts{0.0, 0.1, 0.37};
    const auto a = validate_ellipticity(f, square(), ts);
    const auto b = validate_ellipticity(f.adjoint(), square(), ts);
    EXPECT_NEAR(a.lambda_lower, b.lambda_lower, 1e-10) << name;
  }
}

TEST(Ellipticity, LowerBoundNotAboveClaim) {
  for (const char* name : {"laplace", "diag(3,0.7)", "checkerboard(4,1)", "tensor2(1,0.5,-0.5,1)"}) {
    const auto f = coefficient_from_name(name, 1, 2);
    const auto r = validate_ellipticity(f, square(), {0.0});
    EXPECT_GE(r.lambda_lower, f.lambda - 1e-10) << name;
    EXPECT_TRUE(r.ok) << name;
  }
}

TEST(Theta, ConstantOnInterval) {
  const Mesh m = build_interval_mesh(0.0, 1.0, 8);
  const auto r = validate_theta(theta_from_name("theta_const(1)", 1, m), m, {0.0});
  EXPECT_NEAR(r.delta, 2.0, 1e-14);
  EXPECT_TRUE(r.nonneg_ok);
}

TEST(Theta, HalfIdentityOnSquare) {
  const auto r = validate_theta(theta_from_name("theta_matrix(0.5,0,0,0.5)", 2, square()), square(), {0.0});
  EXPECT_NEAR(r.delta, 2.0, 1e-12);
}

TEST(Theta, RankDeficientIntegral) {
  const auto r = validate_theta(theta_from_name("theta_matrix(1,0,0,0)", 2, square()), square(), {0.0});
  EXPECT_NEAR(r.delta, 0.0, 1e-14);
  EXPECT_TRUE(r.nonneg_ok);
}

TEST(Theta, ScalingScalesDelta) {
  const auto th = theta_from_name("theta_matrix(1,0.2,0.2,0.5)", 2, square());
  const double d = validate_theta(th, square(), {0.0}).delta;
  EXPECT_NEAR(validate_theta(th.scaled(3.0), square(), {0.0}).delta, 3.0 * d, 1e-12);
}

TEST(Theta, TimeDependentWorstTime) {
  const Mesh m = build_interval_mesh(0.0, 1.0, 4);
  const auto r = validate_theta(theta_from_name("theta_linear_t(1)", 1, m), m, {0.0, 0.5, 1.0});
  EXPECT_NEAR(r.delta, 2.0, 1e-14);
  EXPECT_EQ(r.worst_time, 0.0);
}

TEST(Theta, NegativeFlagged) {
  const Mesh m = build_interval_mesh(0.0, 1.0, 4);
  EXPECT_FALSE(validate_theta(theta_from_name("theta_const(-1)", 1, m), m, {0.0}).nonneg_ok);
}

TEST(Catalog, UnknownNames) {
  const Mesh m = build_interval_mesh(0.0, 1.0, 4);
  try {
    coefficient_from_name("laplacian", 1, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_name);
    EXPECT_NE(std::string(e.what()).find("laplacian"), std::string::npos);
  }
  EXPECT_THROW(theta_from_name("theta_nope(1)", 1, m), Error);
  EXPECT_THROW(coefficient_from_name("diag(1)", 1, 2), Error);
  EXPECT_THROW(coefficient_from_name("system2_skew(0.1)", 1, 1), Error);
}

TEST(Catalog, TimeIndependentEvaluationIsExact) {
  const auto f = coefficient_from_name("checkerboard(2,0.5)", 1, 2);
  ASSERT_TRUE(f.time_independent);
  const Point x{0.3, 0.7};
  EXPECT_EQ(f.tensor(x, 0.0), f.tensor(x, 12.5));
}

}  // namespace
}  // namespace rg
