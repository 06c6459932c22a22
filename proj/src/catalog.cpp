#include <algorithm>
#include <cmath>
#include <sstream>

#include "coeff.hpp"
#include "names.hpp"
#include "error.hpp"

namespace rg {

namespace {

using ParsedName = CatalogName;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

CatalogName parse_catalog_name(const std::string& spec) {
  ParsedName out;
  const std::string s = trim(spec);
  const auto open = s.find('(');
  if (open == std::string::npos) {
    out.name = s;
    return out;
  }
  require(s.back() == ')', ErrorCode::invalid_argument, "malformed catalog entry '" + spec + "'");
  out.name = trim(s.substr(0, open));
  std::stringstream body(s.substr(open + 1, s.size() - open - 2));
  std::string tok;
  while (std::getline(body, tok, ',')) {
    tok = trim(tok);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == tok.size() && !tok.empty() && std::isfinite(v), ErrorCode::invalid_argument,
            "bad numeric argument '" + tok + "' in '" + spec + "'");
    out.args.push_back(v);
  }
  return out;
}

namespace {

ParsedName parse(const std::string& spec) { return parse_catalog_name(spec); }

void expect_args(const ParsedName& p, std::size_t count) {
  require(p.args.size() == count, ErrorCode::invalid_argument,
          "'" + p.name + "' expects " + std::to_string(count) + " argument(s)");
}

/// Largest lambda in (0,1] with lambda <= min eig(sym T) and |T| <= 1/lambda.
double ellipticity_of(const Matrix& T) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (T + T.transpose()), Eigen::EigenvaluesOnly);
  const double lower = es.eigenvalues()[0];
  const double norm = Eigen::JacobiSVD<Matrix>(T).singularValues()[0];
  require(lower > 0.0, ErrorCode::invalid_argument, "coefficient tensor is not strongly elliptic");
  return std::min({1.0, lower, 1.0 / norm});
}

/// A^{ab} = S(a,b) * I_m for an n x n matrix S.
CoefficientField spatial_tensor_field(const std::string& name, int m, const Matrix& S) {
  CoefficientField f;
  f.m = m;
  f.n = static_cast<int>(S.rows());
  f.name = name;
  f.lambda = ellipticity_of(S);
  f.evaluate = [S, m](const Point&, double, int a, int b) -> Matrix { return S(a, b) * Matrix::Identity(m, m); };
  return f;
}

int checker_parity(const Point& x, int n) {
  auto cell = [](double v) { return static_cast<long>(std::floor(4.0 * v)); };
  long s = cell(x[0]);
  if (n > 1) s += cell(x[1]);
  return static_cast<int>(((s % 2) + 2) % 2);
}

}  // namespace

std::vector<std::string> coefficient_catalog() {
  return {"laplace", "diag(a1,...,an)", "system2_skew(eps)", "tensor2(a11,a12,a21,a22)", "skew_osc(eps,omega)",
          "checkerboard(a,b)"};
}

std::vector<std::string> theta_catalog() {
  return {"theta_const(c)", "theta_matrix(c11,...,cmm)", "theta_rank1(c)", "theta_ends(left,right)",
          "theta_linear_t(c)"};
}

CoefficientField coefficient_from_name(const std::string& spec, int m, int n) {
  require(m >= 1, ErrorCode::invalid_argument, "component count m must be >= 1");
  require(n == 1 || n == 2, ErrorCode::invalid_argument, "spatial dimension must be 1 or 2");
  const ParsedName p = parse(spec);

  if (p.name == "laplace") {
    expect_args(p, 0);
    CoefficientField f = unit_coefficients(m, n);
    f.name = "laplace";
    return f;
  }
  if (p.name == "diag") {
    expect_args(p, static_cast<std::size_t>(n));
    for (double a : p.args) require(a > 0.0, ErrorCode::invalid_argument, "diag entries must be positive");
    Matrix S = Matrix::Zero(n, n);
    for (int a = 0; a < n; ++a) S(a, a) = p.args[a];
    return spatial_tensor_field(spec, m, S);
  }
  if (p.name == "tensor2") {
    expect_args(p, 4);
    require(n == 2, ErrorCode::invalid_argument, "tensor2 requires a 2D mesh");
    Matrix S(2, 2);
    S << p.args[0], p.args[1], p.args[2], p.args[3];
    return spatial_tensor_field(spec, m, S);
  }
  if (p.name == "system2_skew") {
    expect_args(p, 1);
    require(m == 2, ErrorCode::invalid_argument, "system2_skew requires m = 2");
    const double eps = p.args[0];
    Matrix block(2, 2);
    block << 1.0, eps, -eps, 1.0;
    CoefficientField f;
    f.m = 2;
    f.n = n;
    f.name = spec;
    f.lambda = std::min(1.0, 1.0 / std::sqrt(1.0 + eps * eps));
    f.evaluate = [block](const Point&, double, int a, int b) -> Matrix {
      return a == b ? block : Matrix::Zero(2, 2);
    };
    return f;
  }
  if (p.name == "skew_osc") {
    // Scalar 2D tensor [[1, e(t)], [-e(t), 1]] with e(t) = eps cos(omega t):
    // nonsymmetric and time dependent.
    expect_args(p, 2);
    require(n == 2, ErrorCode::invalid_argument, "skew_osc requires a 2D mesh");
    const double eps = p.args[0], omega = p.args[1];
    CoefficientField f;
    f.m = m;
    f.n = 2;
    f.name = spec;
    f.lambda = std::min(1.0, 1.0 / std::sqrt(1.0 + eps * eps));
    f.time_independent = omega == 0.0;
    f.evaluate = [eps, omega, m](const Point&, double t, int a, int b) -> Matrix {
      const double e = eps * std::cos(omega * t);
      const double v = a == b ? 1.0 : (a == 0 ? e : -e);
      return v * Matrix::Identity(m, m);
    };
    return f;
  }
  if (p.name == "checkerboard") {
    expect_args(p, 2);
    const double a = p.args[0], b = p.args[1];
    require(a > 0.0 && b > 0.0, ErrorCode::invalid_argument, "checkerboard values must be positive");
    CoefficientField f;
    f.m = m;
    f.n = n;
    f.name = spec;
    f.lambda = std::min({1.0, a, b, 1.0 / a, 1.0 / b});
    f.evaluate = [a, b, m, n](const Point& x, double, int alpha, int beta) -> Matrix {
      if (alpha != beta) return Matrix::Zero(m, m);
      return (checker_parity(x, n) == 0 ? a : b) * Matrix::Identity(m, m);
    };
    return f;
  }
  fail(ErrorCode::unknown_name, "unknown coefficient '" + p.name + "'");
}

RobinOperator theta_from_name(const std::string& spec, int m, const Mesh& mesh) {
  require(m >= 1, ErrorCode::invalid_argument, "component count m must be >= 1");
  const ParsedName p = parse(spec);
  RobinOperator r;
  r.m = m;
  r.name = spec;

  if (p.name == "theta_const") {
    expect_args(p, 1);
    const double c = p.args[0];
    r.theta = [c, m](const Point&, double) -> Matrix { return c * Matrix::Identity(m, m); };
    r.claimed_nonneg = c >= 0.0;
    return r;
  }
  if (p.name == "theta_linear_t") {
    expect_args(p, 1);
    const double c = p.args[0];
    r.theta = [c, m](const Point&, double t) -> Matrix { return c * (1.0 + t) * Matrix::Identity(m, m); };
    r.time_independent = false;
    r.claimed_nonneg = c >= 0.0;
    return r;
  }
  if (p.name == "theta_matrix") {
    expect_args(p, static_cast<std::size_t>(m * m));
    Matrix th(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) th(i, j) = p.args[static_cast<std::size_t>(i * m + j)];
    r.theta = [th](const Point&, double) -> Matrix { return th; };
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (th + th.transpose()), Eigen::EigenvaluesOnly);
    r.claimed_nonneg = es.eigenvalues()[0] >= 0.0;
    return r;
  }
  if (p.name == "theta_ends") {
    expect_args(p, 2);
    require(mesh.dimension() == 1, ErrorCode::invalid_argument, "theta_ends requires a 1D mesh");
    double lo = mesh.vertex(0)[0], hi = lo;
    for (const auto& v : mesh.vertices()) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    const double mid = 0.5 * (lo + hi);
    const double left = p.args[0], right = p.args[1];
    r.theta = [=](const Point& x, double) -> Matrix {
      return (x[0] < mid ? left : right) * Matrix::Identity(m, m);
    };
    r.claimed_nonneg = left >= 0.0 && right >= 0.0;
    return r;
  }
  if (p.name == "theta_rank1") {
    expect_args(p, 1);
    r.kind = RobinOperator::Kind::finite_rank;
    auto ones = [m](const Point&) -> Vector { return Vector::Ones(m); };
    r.phi = {ones};
    r.psi = {ones};
    r.coupling = Matrix::Constant(1, 1, p.args[0]);
    r.claimed_nonneg = p.args[0] >= 0.0;
    return r;
  }
  fail(ErrorCode::unknown_name, "unknown theta '" + p.name + "'");
}

}  // namespace rg
