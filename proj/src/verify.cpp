#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "error.hpp"
#include "parallel.hpp"

namespace rg {

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

// Least squares on (x, y) pairs, sorted beforehand so that the sums do not
// depend on the caller's ordering.
LineFit fit_line(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  require(sxx > 0.0, ErrorCode::invalid_argument, "all samples share one abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (f.intercept + f.slope * x);
    ssr += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

double time_scale(const KernelSample& s, double diam) { return std::min(std::sqrt(s.t - s.s), diam); }

int sample_dim(const KernelSample& s) { return s.x[1] == 0.0 && s.y[1] == 0.0 ? 1 : 2; }

Matrix vertex_block(const Matrix& G, Index v, std::size_t nv) {
  const auto m = G.cols();
  Matrix b(m, m);
  for (Eigen::Index r = 0; r < m; ++r) b.row(r) = G.row(static_cast<Eigen::Index>(dof(static_cast<Index>(r), v, nv)));
  return b;
}

}  // namespace

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::offdiag_power: return "offdiag_power";
    case BoundKind::elliptic_log: return "elliptic_log";
    case BoundKind::elliptic_power: return "elliptic_power";
    case BoundKind::elliptic_bounded: return "elliptic_bounded";
    case BoundKind::local_bound: return "local_bound";
    case BoundKind::symmetry: return "symmetry";
  }
  return "unknown";
}

double sample_magnitude(const KernelSample& s) { return s.value.norm(); }

double gaussian_envelope(double C, double kappa, int n, double diam, const KernelSample& s) {
  const double tau = s.t - s.s;
  const double r = distance(s.x, s.y, 2);
  return C * std::pow(time_scale(s, diam), -n) * std::exp(-kappa * r * r / tau);
}

GaussianFit fit_gaussian_bound(const std::vector<KernelSample>& samples, int n, double diam, double slack) {
  require(slack >= 1.0, ErrorCode::invalid_argument, "slack must be at least 1");
  require(diam > 0.0, ErrorCode::invalid_argument, "diameter must be positive");
  std::size_t separated = 0;
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : samples) {
    require(s.t > s.s, ErrorCode::precondition, "Gaussian fit needs samples with t > s");
    const double r = distance(s.x, s.y, 2);
    if (r > 0.0) ++separated;
    const double mag = sample_magnitude(s);
    if (!(mag > 0.0) || !std::isfinite(mag)) continue;
    pts.emplace_back(r * r / (s.t - s.s), std::log(mag * std::pow(time_scale(s, diam), n)));
  }
  require(2 * separated >= samples.size(), ErrorCode::precondition,
          "fewer than half of the samples have x != y");
  require(pts.size() >= 8, ErrorCode::invalid_argument, "fewer than 8 usable samples");
  std::sort(pts.begin(), pts.end());
  const LineFit line = fit_line(pts);

  GaussianFit fit;
  fit.slack = slack;
  fit.n_samples = pts.size();
  fit.kappa = -line.slope;
  fit.C_fit = std::exp(line.intercept);
  fit.r_squared = line.r_squared;
  double worst = 0.0;
  for (const auto& [xi, eta] : pts) worst = std::max(worst, std::exp(eta + fit.kappa * xi));
  fit.C = std::max(fit.C_fit, worst / slack);
  fit.violations = count_envelope_violations(fit, samples, n, diam);
  fit.pass = fit.kappa > 0.0 && fit.violations == 0;
  return fit;
}

std::size_t count_envelope_violations(const GaussianFit& fit, const std::vector<KernelSample>& samples, int n,
                                      double diam) {
  std::size_t count = 0;
  for (const auto& s : samples) {
    if (s.t <= s.s) {
      if (sample_magnitude(s) > 0.0) ++count;
      continue;
    }
    if (sample_magnitude(s) > fit.slack * gaussian_envelope(fit.C, fit.kappa, n, diam, s) * (1.0 + 1e-12)) ++count;
  }
  return count;
}

BoundReport check_offdiagonal_decay(const std::vector<KernelSample>& samples, int n, double h, double max_distance,
                                    double slack) {
  BoundReport rep;
  rep.kind = BoundKind::offdiag_power;
  rep.exponent_target = n;
  std::vector<std::pair<double, double>> pts;
  // Largest magnitude per dyadic level; the bound is an upper envelope, so
  // the power law is fitted to these.
  std::map<long, std::pair<double, double>> top;
  for (const auto& s : samples) {
    const double d = parabolic_distance({s.x, s.t}, {s.y, s.s}, sample_dim(s));
    const double mag = sample_magnitude(s);
    if (d < 4.0 * h || d > max_distance || !(mag > 0.0)) {
      ++rep.excluded;
      continue;
    }
    const std::pair<double, double> pt{std::log(d), std::log(mag)};
    pts.push_back(pt);
    const long level = std::lround(std::floor(std::log2(d) + 1e-9));
    auto it = top.find(level);
    if (it == top.end() || pt.second > it->second.second || (pt.second == it->second.second && pt < it->second))
      top[level] = pt;
  }
  rep.n_samples = pts.size();
  require(top.size() >= 4, ErrorCode::invalid_argument,
          "dyadic ladder too short: " + std::to_string(top.size()) + " levels after filtering");
  std::vector<std::pair<double, double>> envelope;
  for (const auto& [level, pt] : top) envelope.push_back(pt);
  const LineFit line = fit_line(envelope);
  const double p = -line.slope;
  const double C = std::exp(line.intercept);
  double excess = 0.0;
  for (const auto& [ld, lm] : pts) excess = std::max(excess, std::exp(lm + p * ld) / C);
  rep.exponent_fitted = p;
  rep.constants = {{"C", C}, {"C_envelope", C * std::max(1.0, excess)}, {"envelope_excess", excess},
                   {"r_squared", line.r_squared}, {"levels", static_cast<double>(top.size())}};
  rep.pass = p >= n - 0.3 && excess <= slack;
  return rep;
}

BoundReport check_symmetry(const Problem& problem, const std::vector<SymmetryPair>& pairs, const TimeGrid& grid,
                           double tolerance) {
  require(!pairs.empty(), ErrorCode::invalid_argument, "symmetry check needs at least one pair");
  for (const auto& p : pairs) require(p.t != p.s, ErrorCode::precondition, "symmetry pairs need t != s");
  const Mesh& mesh = *problem.mesh;
  std::vector<double> errors(pairs.size(), 0.0);
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto& p = pairs[i];
    const Matrix g = green_eval(problem, mesh.vertex(p.x_vertex), p.t, p.y_vertex, p.s, grid).value;
    const Matrix a = adjoint_green_eval(problem, p.x_vertex, p.t, mesh.vertex(p.y_vertex), p.s, grid).value;
    const double diff = (g - a.transpose()).norm();
    const double gn = g.norm();
    errors[i] = gn > 0.0 ? diff / gn : (diff == 0.0 ? 0.0 : INFINITY);
  });
  BoundReport rep;
  rep.kind = BoundKind::symmetry;
  rep.n_samples = pairs.size();
  const double worst = *std::max_element(errors.begin(), errors.end());
  rep.constants = {{"max_relative_error", worst}, {"tolerance", tolerance}, {"mesh_size", mesh.mesh_size()}};
  rep.pass = worst <= tolerance;
  return rep;
}

BoundReport symmetry_under_refinement(const BoundReport& base, const BoundReport& refined) {
  BoundReport rep;
  rep.kind = BoundKind::symmetry;
  rep.n_samples = base.n_samples + refined.n_samples;
  const double e0 = base.constants.at("max_relative_error");
  const double e1 = refined.constants.at("max_relative_error");
  rep.constants = {{"base_error", e0}, {"refined_error", e1}, {"base_tolerance", base.constants.at("tolerance")}};
  rep.pass = base.pass && e1 < e0;
  rep.note = "base mesh within tolerance and error decreasing under refinement";
  return rep;
}

BoundReport check_elliptic_bounds(const Matrix& G, const Mesh& mesh, Index y_vertex, double slack) {
  const std::size_t nv = mesh.num_vertices();
  require(static_cast<std::size_t>(G.rows()) == nv * static_cast<std::size_t>(G.cols()), ErrorCode::invalid_argument,
          "Green's function has the wrong shape");
  const Point& y = mesh.vertex(y_vertex);
  const int n = mesh.dimension();
  BoundReport rep;
  if (n == 1) {
    rep.kind = BoundKind::elliptic_bounded;
    double C = 0.0;
    for (Index v = 0; v < nv; ++v) C = std::max(C, vertex_block(G, v, nv).norm());
    rep.n_samples = nv;
    rep.constants = {{"C", C}};
    rep.pass = std::isfinite(C);
    rep.note = "one-dimensional Green's function: checked for boundedness only";
    return rep;
  }
  rep.kind = BoundKind::elliptic_log;
  const double h = mesh.mesh_size();
  const double diam = mesh.diameter();
  std::vector<std::pair<double, double>> pts;
  std::map<long, double> level_max;
  double C = 0.0;
  for (Index v = 0; v < nv; ++v) {
    const double r = distance(mesh.vertex(v), y, n);
    if (r < 4.0 * h) {
      ++rep.excluded;
      continue;
    }
    const double L = 1.0 + std::log(diam / r);
    const double mag = vertex_block(G, v, nv).norm();
    pts.emplace_back(L, mag);
    C = std::max(C, mag / L);
    auto& lm = level_max[std::lround(std::floor(std::log2(r) + 1e-9))];
    lm = std::max(lm, mag / L);
  }
  rep.n_samples = pts.size();
  require(pts.size() >= 2, ErrorCode::invalid_argument, "too few vertices at distance >= 4h");
  const LineFit line = fit_line(pts);
  double lo = INFINITY, hi = 0.0;
  for (const auto& [lvl, val] : level_max) {
    lo = std::min(lo, val);
    hi = std::max(hi, val);
  }
  const double spread = lo > 0.0 ? hi / lo : INFINITY;
  rep.exponent_target = 0.0;
  rep.exponent_fitted = line.slope;
  rep.constants = {{"C", C},           {"fit_slope", line.slope}, {"fit_intercept", line.intercept},
                   {"level_spread", spread}, {"levels", static_cast<double>(level_max.size())}};
  rep.pass = std::isfinite(C) && spread <= slack;
  return rep;
}

double log_remainder_bound(const Matrix& G, const Mesh& mesh, Index y_vertex, double r_min, double r_max) {
  require(mesh.dimension() == 2 && G.cols() == 1, ErrorCode::invalid_argument,
          "log remainder applies to scalar two-dimensional Green's functions");
  const Point& y = mesh.vertex(y_vertex);
  double worst = 0.0;
  std::size_t count = 0;
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    const double r = distance(mesh.vertex(v), y, 2);
    if (r < r_min || r > r_max) continue;
    const double remainder = G(static_cast<Eigen::Index>(v), 0) - std::log(1.0 / r) / (2.0 * M_PI);
    worst = std::max(worst, std::abs(remainder));
    ++count;
  }
  require(count > 0, ErrorCode::invalid_argument, "no vertices in the requested distance band");
  return worst;
}

BoundReport check_local_boundedness(const Trajectory& traj, const Point& x0, double R) {
  require(traj.mesh != nullptr && traj.snapshots.size() == traj.grid.steps + 1, ErrorCode::precondition,
          "trajectory is not populated");
  const TimeGrid& g = traj.grid;
  const double window = g.t1 - g.t0;
  require(R > 0.0 && R * R <= window * (1.0 + 1e-12), ErrorCode::precondition, "slab leaves the time window");
  const Mesh& mesh = *traj.mesh;
  const int n = mesh.dimension();
  const std::size_t nv = mesh.num_vertices();
  const double b = g.t1;
  const double eps_t = 1e-12 * window;

  std::vector<Index> ball;
  for (Index v = 0; v < nv; ++v)
    if (distance(mesh.vertex(v), x0, n) <= 0.5 * R * (1.0 + 1e-12)) ball.push_back(v);
  require(!ball.empty(), ErrorCode::invalid_argument, "no mesh vertex inside the half-radius ball");

  const SparseMatrix M = assemble_mass(mesh, traj.m, false);
  double sup = 0.0, slab = 0.0;
  for (std::size_t k = 0; k <= g.steps; ++k) {
    const double t = g.time(k);
    const Vector& u = traj.snapshots[k];
    if (t >= b - 0.25 * R * R - eps_t) {
      for (Index v : ball) {
        double s2 = 0.0;
        for (int c = 0; c < traj.m; ++c) {
          const double val = u[static_cast<Eigen::Index>(dof(static_cast<Index>(c), v, nv))];
          s2 += val * val;
        }
        sup = std::max(sup, std::sqrt(s2));
      }
    }
    if (k >= 1 && t > b - R * R + eps_t) slab += (t - g.time(k - 1)) * u.dot(M * u);
  }
  const double l2 = std::sqrt(slab);
  BoundReport rep;
  rep.kind = BoundKind::local_bound;
  rep.exponent_target = -(n + 2.0) / 2.0;
  rep.n_samples = ball.size();
  const double ratio = l2 > 0.0 ? sup / (std::pow(R, rep.exponent_target) * l2) : 0.0;
  rep.constants = {{"ratio", ratio}, {"R", R}, {"sup", sup}, {"slab_l2", l2}};
  rep.pass = std::isfinite(ratio);
  return rep;
}

BoundReport local_boundedness_ladder(const Trajectory& traj, const Point& x0, const std::vector<double>& radii,
                                     double factor) {
  require(radii.size() >= 2, ErrorCode::invalid_argument, "ladder needs at least two radii");
  std::vector<double> rs = radii;
  std::sort(rs.begin(), rs.end());
  BoundReport rep;
  rep.kind = BoundKind::local_bound;
  std::vector<double> ratios;
  for (double R : rs) ratios.push_back(check_local_boundedness(traj, x0, R).constants.at("ratio"));
  double step = 1.0;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    const double a = ratios[i - 1], b = ratios[i];
    step = std::max(step, (a > 0.0 && b > 0.0) ? std::max(a / b, b / a) : INFINITY);
  }
  rep.n_samples = rs.size();
  rep.exponent_target = -(traj.mesh->dimension() + 2.0) / 2.0;
  rep.constants = {{"min_ratio", *std::min_element(ratios.begin(), ratios.end())},
                   {"max_ratio", *std::max_element(ratios.begin(), ratios.end())},
                   {"max_step_factor", step}};
  rep.pass = step <= factor;
  return rep;
}

DecayCheck check_decay_vs_theta0(const Trajectory& traj, double theta0, double tol) {
  require(traj.energy_log.size() == traj.snapshots.size() && !traj.energy_log.empty(), ErrorCode::precondition,
          "trajectory energy log is not populated");
  const TimeGrid& g = traj.grid;
  DecayCheck out;
  out.tol = tol < 0.0 ? 0.05 + g.dt() * theta0 : tol;
  const std::size_t n = traj.energy_log.size();
  out.pairs = n * (n - 1) / 2;
  // I_j e^{2 theta0 t_j} <= (1+tol) I_i e^{2 theta0 t_i} for all i < j, so it
  // suffices to compare against the running minimum of the left side.
  double running_min = INFINITY;
  double worst = -INFINITY;
  bool seen_zero = false;
  for (std::size_t k = 0; k < n; ++k) {
    const double I = traj.energy_log[k].mass;
    double gk;
    if (I > 0.0) {
      gk = std::log(I) + 2.0 * theta0 * g.time(k);
      if (k > 0) worst = std::max(worst, seen_zero ? INFINITY : gk - running_min);
      running_min = std::min(running_min, gk);
    } else {
      seen_zero = true;
      running_min = -INFINITY;
    }
  }
  out.worst_log_excess = n > 1 ? worst : 0.0;
  if (out.worst_log_excess == -INFINITY) out.worst_log_excess = 0.0;
  out.pass = out.worst_log_excess <= std::log1p(out.tol);
  return out;
}

}  // namespace rg
