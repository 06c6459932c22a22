#include <random>

#include <gtest/gtest.h>

#include "assembly.hpp"
#include "error.hpp"

namespace rg {
namespace {

Matrix dense(const SparseMatrix& A) { return Matrix(A); }

Vector coordinate(const Mesh& mesh, int axis) {
  Vector u(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (Index v = 0; v < mesh.num_vertices(); ++v) u[static_cast<Eigen::Index>(v)] = mesh.vertex(v)[axis];
  return u;
}

TEST(Mass, SingleCellConsistent) {
  const Matrix M = dense(assemble_mass(build_interval_mesh(0.0, 1.0, 1), 1));
  Matrix expected(2, 2);
  expected << 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0;
  EXPECT_LE((M - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mass, SingleCellLumped) {
  const Matrix M = dense(assemble_mass(build_interval_mesh(0.0, 1.0, 1), 1, true));
  Matrix expected = Matrix::Zero(2, 2);
  expected.diagonal() << 0.5, 0.5;
  EXPECT_LE((M - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mass, PartitionOfUnity) {
  for (const Mesh& mesh : {build_interval_mesh(-1.0, 2.0, 7), build_rectangle_mesh(2.0, 1.0, 3, 4),
                           build_lshape_mesh(3)}) {
    for (int m : {1, 2}) {
      const SparseMatrix M = assemble_mass(mesh, m);
      const SparseMatrix L = assemble_mass(mesh, m, true);
      const Vector one = Vector::Ones(M.rows());
      EXPECT_NEAR(one.dot(M * one), m * mesh.measure(), 1e-12);
      EXPECT_LE(((M - L) * one).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_TRUE(is_symmetric(M));
    }
  }
}

TEST(Stiffness, SingleCellLaplacian) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 1);
  const Matrix K = dense(assemble_stiffness(mesh, coefficient_from_name("laplace", 1, 1), 0.0));
  Matrix expected(2, 2);
  expected << 1.0, -1.0, -1.0, 1.0;
  EXPECT_LE((K - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Stiffness, ConstantsInKernel) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 5, 3);
  for (const char* name : {"laplace", "tensor2(1,0.3,-0.3,1)", "checkerboard(3,0.5)"}) {
    const SparseMatrix K = assemble_stiffness(mesh, coefficient_from_name(name, 1, 2), 0.0);
    EXPECT_LE((K * Vector::Constant(K.cols(), 2.5)).cwiseAbs().maxCoeff(), 1e-13) << name;
  }
}

TEST(Stiffness, LinearFieldEnergy) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 6, 6);
  const SparseMatrix K = assemble_stiffness(mesh, coefficient_from_name("diag(2,2)", 1, 2), 0.0);
  const Vector u = coordinate(mesh, 0);
  EXPECT_NEAR(u.dot(K * u), 2.0, 1e-13);
}

TEST(Stiffness, AdjointIsTranspose) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 4, 4);
  for (const auto& [name, m] : std::vector<std::pair<std::string, int>>{{"tensor2(1,0.4,-0.2,1)", 1},
                                                                        {"system2_skew(0.3)", 2},
                                                                        {"skew_osc(0.5,20)", 1}}) {
    const auto f = coefficient_from_name(name, m, 2);
    const Matrix K = dense(assemble_stiffness(mesh, f, 0.1));
    const Matrix Ks = dense(assemble_stiffness(mesh, f.adjoint(), 0.1));
    EXPECT_EQ(K.transpose(), Ks) << name;
  }
}

TEST(Stiffness, LinearInCoefficient) {
  const Mesh mesh = build_lshape_mesh(3);
  const auto f = coefficient_from_name("checkerboard(2,0.5)", 1, 2);
  const Matrix K = dense(assemble_stiffness(mesh, f, 0.0));
  const Matrix K2 = dense(assemble_stiffness(mesh, f.scaled(2.0), 0.0));
  EXPECT_LE((K2 - 2.0 * K).cwiseAbs().maxCoeff(), 1e-14 * K.cwiseAbs().maxCoeff());
  EXPECT_TRUE(is_symmetric(assemble_stiffness(mesh, f, 0.0)));
}

TEST(Robin, EndpointsOfInterval) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 5);
  const Matrix B = dense(assemble_robin(mesh, theta_from_name("theta_const(1)", 1, mesh), 0.0));
  Matrix expected = Matrix::Zero(6, 6);
  expected(0, 0) = 1.0;
  expected(5, 5) = 1.0;
  EXPECT_EQ(B, expected);
}

TEST(Robin, PerimeterOfSquare) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 3, 5);
  const SparseMatrix B = assemble_robin(mesh, theta_from_name("theta_const(2.5)", 1, mesh), 0.0);
  const Vector one = Vector::Ones(B.rows());
  EXPECT_NEAR(one.dot(B * one), 10.0, 1e-13);
  const auto& bd = mesh.boundary_vertices();
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it)
      if (it.value() != 0.0) EXPECT_TRUE(bd[static_cast<Index>(it.row())] && bd[static_cast<Index>(it.col())]);
}

TEST(Robin, RankOneForm) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 4);
  LowRankForm factors;
  const SparseMatrix B = assemble_robin(mesh, theta_from_name("theta_rank1(1)", 1, mesh), 0.0, &factors);
  EXPECT_EQ(factors.core.rows(), 1);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Vector u(5);
    for (auto& x : u) x = U(rng);
    const double ends = u[0] + u[4];
    EXPECT_NEAR(u.dot(B * u), ends * ends, 1e-14);
  }
}

TEST(Robin, AdjointIsTranspose) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 3, 3);
  const auto th = theta_from_name("theta_matrix(1,0.5,-0.5,2)", 2, mesh);
  EXPECT_EQ(dense(assemble_robin(mesh, th, 0.0)).transpose(), dense(assemble_robin(mesh, th.adjoint(), 0.0)));
  const auto sym = theta_from_name("theta_matrix(1,0.5,0.5,2)", 2, mesh);
  EXPECT_TRUE(is_symmetric(assemble_robin(mesh, sym, 0.0)));
  const Matrix B = dense(assemble_robin(mesh, sym, 0.0));
  EXPECT_LE((dense(assemble_robin(mesh, sym.scaled(2.0), 0.0)) - 2.0 * B).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Load, Sums) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  const Vector one = assemble_load(mesh, 1, [](const Point&, double) { return Vector::Ones(1); }, 0.0);
  EXPECT_NEAR(one.sum(), 1.0, 1e-14);
  const Vector zero = assemble_load(mesh, 1, [](const Point&, double) { return Vector::Zero(1); }, 0.0);
  EXPECT_EQ(zero.cwiseAbs().maxCoeff(), 0.0);
  const double lo = mesh.vertex(3)[0], hi = mesh.vertex(4)[0];
  const Vector cell = assemble_load(
      mesh, 1,
      [&](const Point& x, double) { return Vector::Constant(1, x[0] > lo && x[0] < hi ? 1.0 / (hi - lo) : 0.0); },
      0.0);
  EXPECT_NEAR(cell.sum(), 1.0, 1e-14);
}

TEST(Load, PointFunctional) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 4, 4);
  const Vector w = point_functional(mesh, 2, {0.3, 0.55}, 1);
  Vector u = Vector::Zero(2 * static_cast<Eigen::Index>(mesh.num_vertices()));
  u.tail(static_cast<Eigen::Index>(mesh.num_vertices())) = coordinate(mesh, 1);
  EXPECT_NEAR(w.dot(u), 0.55, 1e-14);
}

TEST(SolveSpd, Identity) {
  SparseMatrix I(4, 4);
  I.setIdentity();
  Vector b(4);
  b << 1.0, -2.0, 3.0, 0.5;
  EXPECT_LE((solve_spd(I, b, 1e-12) - b).norm(), 1e-14);
}

TEST(SolveSpd, Diagonal) {
  SparseMatrix A(2, 2);
  A.insert(0, 0) = 2.0;
  A.insert(1, 1) = 4.0;
  Vector b(2);
  b << 2.0, 4.0;
  const Vector x = solve_spd(A, b, 1e-12);
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 1.0, 1e-14);
}

TEST(SolveSpd, RandomResidual) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> N;
  Matrix R(50, 50);
  for (auto& x : R.reshaped()) x = N(rng);
  const Matrix D = R * R.transpose() + 50.0 * Matrix::Identity(50, 50);
  const SparseMatrix A = D.sparseView();
  Vector b(50);
  for (auto& x : b) x = N(rng);
  const Vector x1 = solve_spd(A, b, 1e-10);
  EXPECT_LE((A * x1 - b).norm(), 1e-10 * b.norm());
  EXPECT_EQ(x1, solve_spd(A, b, 1e-10));
}

TEST(SolveSpd, Errors) {
  SparseMatrix A(2, 2);
  A.setIdentity();
  EXPECT_THROW(solve_spd(A, Vector::Ones(3), 1e-10), Error);
  SparseMatrix Z(2, 2);
  Z.insert(0, 1) = 1.0;
  Z.insert(1, 0) = 1.0;
  EXPECT_THROW(solve_spd(Z, Vector::Unit(2, 0), 1e-10), Error);
}

}  // namespace
}  // namespace rg
