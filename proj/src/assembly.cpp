#include "assembly.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include <Eigen/IterativeLinearSolvers>

#include "error.hpp"
#include "quadrature.hpp"

namespace rg {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Gradients of the P1 basis functions of cell c (constant per cell).
std::array<std::array<double, 2>, 3> basis_gradients(const Mesh& mesh, Index c) {
  auto v = mesh.cell(c);
  std::array<std::array<double, 2>, 3> g{};
  if (mesh.dimension() == 1) {
    const double h = mesh.cell_measure(c);
    g[0] = {-1.0 / h, 0.0};
    g[1] = {1.0 / h, 0.0};
    return g;
  }
  const Point& a = mesh.vertex(v[0]);
  const Point& b = mesh.vertex(v[1]);
  const Point& d = mesh.vertex(v[2]);
  const double twice_area = 2.0 * mesh.cell_measure(c);
  g[0] = {(b[1] - d[1]) / twice_area, (d[0] - b[0]) / twice_area};
  g[1] = {(d[1] - a[1]) / twice_area, (a[0] - d[0]) / twice_area};
  g[2] = {(a[1] - b[1]) / twice_area, (b[0] - a[0]) / twice_area};
  return g;
}

SparseMatrix from_triplets(std::size_t n, const Triplets& t) {
  SparseMatrix A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

}  // namespace

SparseMatrix assemble_mass(const Mesh& mesh, int m, bool lumped) {
  const std::size_t nv = mesh.num_vertices();
  const int nloc = mesh.dimension() + 1;
  Triplets trip;
  trip.reserve(mesh.num_cells() * static_cast<std::size_t>(nloc * nloc * m));
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    auto v = mesh.cell(c);
    double local[3][3] = {};
    for (const auto& q : quad::mass_rule(mesh, c))
      for (int a = 0; a < nloc; ++a)
        for (int b = 0; b < nloc; ++b) local[a][b] += q.weight * q.basis[a] * q.basis[b];
    for (int k = 0; k < m; ++k)
      for (int a = 0; a < nloc; ++a) {
        const Index row = dof(k, v[a], nv);
        if (lumped) {
          double s = 0.0;
          for (int b = 0; b < nloc; ++b) s += local[a][b];
          trip.emplace_back(row, row, s);
        } else {
          for (int b = 0; b < nloc; ++b) trip.emplace_back(row, dof(k, v[b], nv), local[a][b]);
        }
      }
  }
  return from_triplets(nv * static_cast<std::size_t>(m), trip);
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const CoefficientField& field, double t) {
  require(field.n == mesh.dimension(), ErrorCode::invalid_argument,
          "coefficient dimension does not match mesh dimension");
  const std::size_t nv = mesh.num_vertices();
  const int n = mesh.dimension();
  const int m = field.m;
  const int nloc = n + 1;
  Triplets trip;
  trip.reserve(mesh.num_cells() * static_cast<std::size_t>(nloc * nloc * m * m));
  std::vector<Matrix> blocks(static_cast<std::size_t>(n * n));
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    auto v = mesh.cell(c);
    const auto grad = basis_gradients(mesh, c);
    for (const auto& q : quad::stiffness_rule(mesh, c)) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) blocks[static_cast<std::size_t>(a * n + b)] = field.evaluate(q.x, t, a, b);
      for (int la = 0; la < nloc; ++la)      // test basis
        for (int lb = 0; lb < nloc; ++lb) {  // trial basis
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
              // Terms (a,b) and (b,a) are added as a pair and the gradient
              // product is formed first, so the adjoint data assembles to the
              // exact transpose.
              double s = 0.0;
              for (int a = 0; a < n; ++a) {
                s += blocks[static_cast<std::size_t>(a * n + a)](i, j) * (grad[la][a] * grad[lb][a]);
                for (int b = a + 1; b < n; ++b)
                  s += blocks[static_cast<std::size_t>(a * n + b)](i, j) * (grad[la][a] * grad[lb][b]) +
                       blocks[static_cast<std::size_t>(b * n + a)](i, j) * (grad[la][b] * grad[lb][a]);
              }
              if (s != 0.0) trip.emplace_back(dof(i, v[la], nv), dof(j, v[lb], nv), q.weight * s);
            }
        }
    }
  }
  return from_triplets(nv * static_cast<std::size_t>(m), trip);
}

SparseMatrix assemble_robin(const Mesh& mesh, const RobinOperator& theta, double t, LowRankForm* factors) {
  require(mesh.num_facets() > 0, ErrorCode::precondition, "mesh has an empty boundary");
  const std::size_t nv = mesh.num_vertices();
  const int m = theta.m;
  const std::size_t ndof = nv * static_cast<std::size_t>(m);
  const int nloc = mesh.dimension();
  Triplets trip;

  if (theta.kind == RobinOperator::Kind::multiplier) {
    for (Index f = 0; f < mesh.num_facets(); ++f) {
      auto v = mesh.facet(f);
      for (const auto& q : quad::facet_rule(mesh, f)) {
        const Matrix th = theta.theta(q.x, t);
        require(th.rows() == m && th.cols() == m, ErrorCode::internal, "theta returned a block of the wrong size");
        for (int a = 0; a < nloc; ++a)
          for (int b = 0; b < nloc; ++b)
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < m; ++j) {
                const double val = q.weight * th(i, j) * (q.basis[a] * q.basis[b]);
                if (val != 0.0) trip.emplace_back(dof(i, v[a], nv), dof(j, v[b], nv), val);
              }
      }
    }
    return from_triplets(ndof, trip);
  }

  const int r = theta.rank();
  Matrix wphi = Matrix::Zero(static_cast<Eigen::Index>(ndof), r);
  Matrix wpsi = Matrix::Zero(static_cast<Eigen::Index>(ndof), r);
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    auto v = mesh.facet(f);
    for (const auto& q : quad::facet_rule(mesh, f))
      for (int k = 0; k < r; ++k) {
        const Vector ph = theta.phi[k](q.x);
        const Vector ps = theta.psi[k](q.x);
        for (int a = 0; a < nloc; ++a)
          for (int j = 0; j < m; ++j) {
            wphi(static_cast<Eigen::Index>(dof(j, v[a], nv)), k) += q.weight * ph[j] * q.basis[a];
            wpsi(static_cast<Eigen::Index>(dof(j, v[a], nv)), k) += q.weight * ps[j] * q.basis[a];
          }
      }
  }
  // v^T B u = sum_kl c_kl (wphi_k . u)(wpsi_l . v)  =>  B = wpsi c^T wphi^T
  const Matrix core = theta.coupling.transpose();
  std::vector<Index> rows;
  for (Index i = 0; i < ndof; ++i)
    if (wphi.row(static_cast<Eigen::Index>(i)).squaredNorm() > 0.0 ||
        wpsi.row(static_cast<Eigen::Index>(i)).squaredNorm() > 0.0)
      rows.push_back(i);
  for (Index i : rows) {
    const Eigen::RowVectorXd left = wpsi.row(static_cast<Eigen::Index>(i)) * core;
    for (Index j : rows) {
      const double val = left.dot(wphi.row(static_cast<Eigen::Index>(j)));
      if (val != 0.0) trip.emplace_back(i, j, val);
    }
  }
  if (factors) *factors = LowRankForm{wpsi, core, wphi};
  return from_triplets(ndof, trip);
}

Vector assemble_load(const Mesh& mesh, int m, const SourceFn& f, double t) {
  const std::size_t nv = mesh.num_vertices();
  Vector F = Vector::Zero(static_cast<Eigen::Index>(nv * static_cast<std::size_t>(m)));
  if (!f) return F;
  const int nloc = mesh.dimension() + 1;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    auto v = mesh.cell(c);
    for (const auto& q : quad::mass_rule(mesh, c)) {
      const Vector val = f(q.x, t);
      require(val.size() == m, ErrorCode::invalid_argument, "source returned a vector of the wrong size");
      require(val.allFinite(), ErrorCode::internal, "source evaluation produced non-finite values");
      for (int a = 0; a < nloc; ++a)
        for (int k = 0; k < m; ++k) F[static_cast<Eigen::Index>(dof(k, v[a], nv))] += q.weight * val[k] * q.basis[a];
    }
  }
  return F;
}

Vector point_functional(const Mesh& mesh, int m, const Point& x, Index component) {
  require(static_cast<int>(component) < m, ErrorCode::invalid_argument, "component index out of range");
  const auto loc = mesh.locate(x, 1e-10);
  require(loc.has_value(), ErrorCode::invalid_argument, "point lies outside the mesh");
  const std::size_t nv = mesh.num_vertices();
  Vector w = Vector::Zero(static_cast<Eigen::Index>(nv * static_cast<std::size_t>(m)));
  auto v = mesh.cell(loc->cell);
  for (std::size_t a = 0; a < v.size(); ++a) w[static_cast<Eigen::Index>(dof(component, v[a], nv))] = loc->weights[a];
  return w;
}

Vector solve_spd(const SparseMatrix& A, const Vector& b, double tol, int max_iterations) {
  require(tol > 0.0, ErrorCode::invalid_argument, "solver tolerance must be positive");
  require(A.rows() == A.cols() && A.rows() == b.size(), ErrorCode::invalid_argument,
          "dimension mismatch in solve_spd");
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(max_iterations > 0 ? max_iterations : static_cast<int>(10 * A.rows() + 100));
  cg.compute(A);
  Vector x = cg.solve(b);
  const double res = (A * x - b).norm();
  require(cg.info() == Eigen::Success && res <= tol * bnorm * (1.0 + 1e-6), ErrorCode::not_converged,
          "conjugate gradients did not converge (relative residual " + std::to_string(res / bnorm) +
              ", iterations " + std::to_string(cg.iterations()) + ")");
  return x;
}

bool is_symmetric(const SparseMatrix& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  const SparseMatrix At = A.transpose();
  double scale = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  const SparseMatrix diff = A - At;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
      if (std::abs(it.value()) > rel_tol * scale) return false;
  return true;
}

void write_coordinate(const SparseMatrix& A, const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "w"), &std::fclose);
  require(fp != nullptr, ErrorCode::io, "cannot open '" + path + "' for writing");
  std::fprintf(fp.get(), "%% rows %ld cols %ld nnz %ld\n", static_cast<long>(A.rows()), static_cast<long>(A.cols()),
               static_cast<long>(A.nonZeros()));
  // Row-major listing regardless of storage order.
  const Eigen::SparseMatrix<double, Eigen::RowMajor> R = A;
  for (int k = 0; k < R.outerSize(); ++k)
    for (decltype(R)::InnerIterator it(R, k); it; ++it)
      std::fprintf(fp.get(), "%ld %ld %.17g\n", static_cast<long>(it.row()), static_cast<long>(it.col()), it.value());
}

}  // namespace rg
