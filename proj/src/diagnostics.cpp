#include "qcurv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qcurv/errors.hpp"

namespace qcurv {

WeightSpec::WeightSpec(double alpha_, double mu_) : alpha(alpha_), mu(mu_) {
  if (!(alpha > -1.0)) throw DomainError("WeightSpec: alpha must exceed -1");
  if (!(mu >= 0.0)) throw DomainError("WeightSpec: mu must be >= 0");
}

std::string WeightSpec::description() const {
  std::ostringstream os;
  os << "|y|^(n*" << alpha << ") * exp(-" << mu << "*|y|^2)";
  return os.str();
}

PohozaevResult pohozaev_residual(std::span<const double> eta, const WeightSpec& weight, int n,
                                 const RadialGrid& grid, double tail_tol) {
  if (eta.size() != grid.size()) throw UsageError("pohozaev_residual: profile does not match the grid");
  const std::vector<double> meas = radial_measure(grid, n);
  const std::size_t tail_first = grid.panels.back().first;
  double lam = 0.0;
  double lam_tail = 0.0;
  double second = 0.0;
  double second_tail = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes[i];
    const double f = meas[i] * std::exp(n * weight.alpha * std::log(r) - weight.mu * r * r + n * eta[i]);
    if (!std::isfinite(f)) throw NumericError("pohozaev_residual: non-finite density", i);
    lam += f;
    second += r * r * f;
    if (i >= tail_first) {
      lam_tail += f;
      second_tail += r * r * f;
    }
  }
  if (!(lam > 0.0)) throw DiagnosticError("pohozaev_residual: vanishing total curvature");
  if (lam_tail > tail_tol * lam) throw DiagnosticError("pohozaev_residual: total curvature not settled at r_max");
  if (weight.mu > 0.0 && second_tail > tail_tol * second)
    throw DiagnosticError("pohozaev_residual: second moment not settled at r_max");

  const double g = gamma_n(n);
  PohozaevResult p;
  p.lambda = lam;
  p.lhs = lam * (lam - 2.0 * g) / g;
  p.mu_term = weight.mu > 0.0 ? 4.0 * weight.mu / n * second : 0.0;
  p.rhs = 2.0 * weight.alpha * lam - p.mu_term;
  p.residual = std::abs(p.lhs - p.rhs);
  p.relative_residual = p.residual / (lam * lam / g);
  return p;
}

double log_slope(std::span<const double> v, const RadialGrid& grid, double r_lo, double r_hi) {
  if (v.size() != grid.size()) throw UsageError("log_slope: profile does not match the grid");
  if (!(r_lo > 0.0) || !(r_hi > r_lo) || r_hi > grid.r_max || r_lo < grid.nodes.front())
    throw UsageError("log_slope: fit window lies outside the grid");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes[i];
    if (r < r_lo || r > r_hi) continue;
    const double x = std::log(r);
    sx += x;
    sy += v[i];
    sxx += x * x;
    sxy += x * v[i];
    ++count;
  }
  if (count < 8) throw UsageError("log_slope: fewer than 8 nodes in the fit window");
  const double c = static_cast<double>(count);
  const double slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  return -slope;
}

double log_slope(std::span<const double> v, const RadialGrid& grid) {
  return log_slope(v, grid, 0.3 * grid.r_max, 0.8 * grid.r_max);
}

std::size_t lower_bound_check(std::span<const double> v, const RadialGrid& grid, double beta, double slack_scale) {
  if (v.size() != grid.size()) throw UsageError("lower_bound_check: profile does not match the grid");
  std::size_t violations = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes[i];
    if (r < 1.0) continue;
    const double lr = std::log(r);
    if (v[i] < -beta * lr - slack_scale * (1.0 + std::abs(lr))) ++violations;
  }
  return violations;
}

std::vector<double> shifted_potential(std::span<const double> v, std::span<const double> density,
                                      const RadialGrid& grid, int n) {
  if (v.size() != grid.size() || density.size() != grid.size())
    throw UsageError("shifted_potential: samples do not match the grid");
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = std::log1p(grid.nodes[i]) * density[i];
  const double shift = integrate_radial(f, grid, n) / gamma_n(n);
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x += shift;
  return out;
}

DiagnosticsReport diagnose_radial(const RadialSolution& s) {
  const int n = s.params.n();
  DiagnosticsReport d;
  d.lambda_measured = integrate_radial(s.density, s.grid, n);
  d.beta_expected = d.lambda_measured / gamma_n(n);
  d.fit_lo = 0.3 * s.grid.r_max;
  d.fit_hi = 0.8 * s.grid.r_max;
  d.beta_estimate = log_slope(s.v, s.grid, d.fit_lo, d.fit_hi);

  double peak = 0.0;
  double edge = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    peak = std::max(peak, s.density[i]);
    if (s.grid.nodes[i] <= d.fit_hi) edge = s.density[i];
  }
  d.window_density_ratio = peak > 0.0 ? edge / peak : 0.0;

  std::vector<double> eta(s.v.size());
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = s.v[i] + s.c_v;
  const PohozaevResult p = pohozaev_residual(eta, WeightSpec(s.params.alpha(), s.params.mu()), n, s.grid);
  d.pohozaev_lhs = p.lhs;
  d.pohozaev_rhs = p.rhs;
  d.pohozaev_residual = p.residual;
  d.pohozaev_relative = p.relative_residual;
  d.pohozaev_mu_term = p.mu_term;

  const std::vector<double> vn = shifted_potential(s.v, s.density, s.grid, n);
  d.lower_bound_violations = lower_bound_check(vn, s.grid, d.beta_expected);
  return d;
}

ThresholdScan threshold_scan(const ProblemParams& base, std::span<const double> fractions, const RadialGrid& grid,
                             const SolverConfig& config, KernelCache* cache) {
  ThresholdScan scan;
  scan.threshold = critical_lambda(base.n(), base.alpha());
  scan.beyond_proposition = base.n() != 3 && base.n() != 4;
  KernelCache local;
  if (!cache) cache = &local;
  SolverConfig cfg = config;
  cfg.initial_v.clear();
  for (double frac : fractions) {
    ScanRow row;
    row.fraction = frac;
    row.lambda = frac * scan.threshold;
    try {
      const RadialSolution s = solve_fixed_point(base.with_lambda(row.lambda), grid, cfg, cache);
      row.converged = s.converged;
      row.w0 = s.w0();
      row.residual = s.residual_sup;
      row.iterations = s.iterations;
      row.status = to_string(s.status);
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    scan.rows.push_back(row);
  }
  scan.consistent = !scan.rows.empty();
  for (const auto& row : scan.rows) {
    if (row.lambda < scan.threshold) {
      if (row.converged) scan.last_converged = std::max(scan.last_converged.value_or(row.lambda), row.lambda);
      else scan.consistent = false;
    } else {
      if (!row.converged) scan.first_failed = std::min(scan.first_failed.value_or(row.lambda), row.lambda);
      else scan.consistent = false;
    }
  }
  return scan;
}

}  // namespace qcurv
