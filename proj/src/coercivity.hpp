#pragma once

#include <vector>

#include "assembly.hpp"

namespace rg {

struct Problem;

struct CoercivityReport {
  double theta0 = 0.0;
  double lambda_tilde = 0.0;
  Vector eigvec;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  double t_worst = 0.0;
  /// Boundary hypothesis: smallest eigenvalue of the integrated theta.
  double delta = 0.0;
  bool delta_ok = true;
};

struct CoercivityOptions {
  double tol = 1e-10;
  int max_iterations = 10000;
  /// Small positive shift keeps the factored pencil nonsingular when the
  /// numerator form has a kernel (pure Neumann data).
  double shift = 1e-6;
  /// Upper end of the admissible lambda_tilde interval (the ellipticity constant).
  double lambda = 1.0;
  std::uint64_t seed = 0xc0e2c1;
};

/// Best constant theta0 in
///   theta0 (u^T M u + u^T K_unit u) <= lambda_tilde u^T K_unit u + u^T B u,
/// i.e. the smallest eigenvalue of the pencil (lambda_tilde K_unit + sym B,
/// M + K_unit), computed by shifted inverse power iteration.
CoercivityReport estimate_theta0(const SparseMatrix& M, const SparseMatrix& K_unit, const SparseMatrix& B,
                                 double lambda_tilde, const CoercivityOptions& opts = {});

/// Worst estimate over the sampled times for a problem; time-independent
/// data is solved once.
CoercivityReport check_h1(const Problem& problem, const std::vector<double>& t_samples,
                          const CoercivityOptions& opts = {});

}  // namespace rg
