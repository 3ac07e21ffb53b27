#include "qcurv/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcurv/errors.hpp"

namespace qcurv {

namespace {

constexpr double kLogMax = 709.78;

std::vector<double> log_mass(const ProblemParams& p, const RadialGrid& grid) {
  const std::vector<double> meas = radial_measure(grid, p.n());
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes[i];
    out[i] = std::log(meas[i]) + p.weight_exponent() * std::log(r) - p.mu() * r * r;
  }
  return out;
}

double normalize_with(std::span<const double> v, const std::vector<double>& lm, const ProblemParams& p) {
  if (v.size() != lm.size())
    throw UsageError("normalize_c: v has " + std::to_string(v.size()) + " samples, grid has " +
                     std::to_string(lm.size()));
  const int n = p.n();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw NumericError("normalize_c: non-finite iterate", i);
    top = std::max(top, lm[i] + n * v[i]);
  }
  if (top == -std::numeric_limits<double>::infinity()) throw DomainError("normalize_c: volume integral vanishes");
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += std::exp(lm[i] + n * v[i] - top);
  const double log_i = top + std::log(sum);
  if (log_i > kLogMax) throw BlowupSignal("normalize_c: volume integral overflows");
  if (log_i < -kLogMax) throw DomainError("normalize_c: volume integral underflows");
  return (std::log(p.lambda()) - log_i) / n;
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "ok";
    case SolveStatus::max_iterations: return "not_converged";
    case SolveStatus::blowup: return "blowup";
  }
  return "unknown";
}

RadialOperator::RadialOperator(const ProblemParams& params, const RadialGrid& grid, KernelCache* cache)
    : params_(params), grid_(grid), log_mass_(log_mass(params, grid)) {
  const std::vector<double> origin{0.0};
  if (cache) {
    kernel_ = cache->get(grid_, grid_.nodes, params_.n(), KernelVariant::plain);
    origin_ = cache->get(grid_, origin, params_.n(), KernelVariant::plain);
  } else {
    kernel_ = std::make_shared<const KernelMatrix>(
        assemble_kernel_matrix(grid_, grid_.nodes, params_.n(), KernelVariant::plain));
    origin_ = std::make_shared<const KernelMatrix>(
        assemble_kernel_matrix(grid_, origin, params_.n(), KernelVariant::plain));
  }
}

double RadialOperator::normalize(std::span<const double> v) const { return normalize_with(v, log_mass_, params_); }

std::vector<double> RadialOperator::density(std::span<const double> v, double c_v) const {
  std::vector<double> out(v.size());
  const int n = params_.n();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = grid_.nodes[i];
    out[i] = std::exp(params_.weight_exponent() * std::log(r) - params_.mu() * r * r + n * (v[i] + c_v));
  }
  return out;
}

RadialOperator::Result RadialOperator::apply(std::span<const double> v) const {
  Result res;
  res.c_v = normalize(v);
  const std::vector<double> f = density(v, res.c_v);
  res.v_bar = apply_potential(*kernel_, f);
  res.v_bar_origin = apply_potential(*origin_, f).front();
  return res;
}

double normalize_c(std::span<const double> v, const ProblemParams& params, const RadialGrid& grid) {
  return normalize_with(v, log_mass(params, grid), params);
}

std::vector<double> apply_T(std::span<const double> v, const ProblemParams& params, const RadialGrid& grid,
                            const KernelMatrix& kernel) {
  if (kernel.variant != KernelVariant::plain || kernel.n != params.n() || kernel.cols() != grid.size())
    throw UsageError("apply_T: kernel does not match the grid and dimension");
  const double c = normalize_c(v, params, grid);
  std::vector<double> f(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = grid.nodes[i];
    f[i] = std::exp(params.weight_exponent() * std::log(r) - params.mu() * r * r + params.n() * (v[i] + c));
  }
  return apply_potential(kernel, f);
}

RadialSolution solve_fixed_point(const ProblemParams& params, const RadialGrid& grid, const SolverConfig& config,
                                 KernelCache* cache) {
  if (!(config.damping > 0.0 && config.damping <= 1.0)) throw UsageError("solve_fixed_point: damping must lie in (0, 1]");
  if (!(config.tol > 0.0)) throw UsageError("solve_fixed_point: tol must be positive");
  if (!config.initial_v.empty() && config.initial_v.size() != grid.size())
    throw UsageError("solve_fixed_point: initial iterate does not match the grid");

  const RadialOperator op(params, grid, cache);
  double ceiling = config.blowup_ceiling;
  if (config.resolution_guard)
    ceiling = std::min(ceiling, (1.0 + params.alpha()) * std::log(1.0 / grid.resolution_radius()));

  RadialSolution sol{params, grid, {}, 0.0, 0.0, {}, {}};
  sol.v = config.initial_v.empty() ? std::vector<double>(grid.size(), 0.0) : config.initial_v;
  double theta = config.damping;
  double prev = std::numeric_limits<double>::infinity();
  RadialOperator::Result last;
  bool have_last = false;

  for (std::size_t it = 1; it <= config.max_iter; ++it) {
    RadialOperator::Result t;
    try {
      t = op.apply(sol.v);
    } catch (const BlowupSignal&) {
      sol.status = SolveStatus::blowup;
      break;
    }
    const double res = sup_diff(t.v_bar, sol.v);
    last = t;
    have_last = true;
    sol.iterations = it;
    sol.residual_sup = res;
    const double w0 = t.v_bar_origin + t.c_v;
    if (config.trace) config.trace({it, res, t.c_v, w0, theta});
    if (!std::isfinite(res)) throw NumericError("solve_fixed_point: non-finite residual", it);
    if (w0 > ceiling) {
      sol.status = SolveStatus::blowup;
      break;
    }
    if (res < config.tol) {
      sol.status = SolveStatus::converged;
      sol.update_sup = theta * res;
      break;
    }
    if (res > prev) theta = std::max(0.5 * theta, config.min_damping);
    prev = res;
    for (std::size_t i = 0; i < sol.v.size(); ++i) sol.v[i] += theta * (t.v_bar[i] - sol.v[i]);
    sol.update_sup = theta * res;
  }

  sol.converged = sol.status == SolveStatus::converged;
  sol.damping = theta;
  if (have_last && sol.status == SolveStatus::converged) {
    sol.c_v = last.c_v;
    sol.v_origin = last.v_bar_origin;
  } else {
    try {
      const auto t = op.apply(sol.v);
      sol.c_v = t.c_v;
      sol.v_origin = t.v_bar_origin;
    } catch (const BlowupSignal&) {
      sol.status = SolveStatus::blowup;
      sol.c_v = std::numeric_limits<double>::quiet_NaN();
      sol.v_origin = std::numeric_limits<double>::quiet_NaN();
    }
  }
  sol.u.resize(grid.size());
  const double k = params.mu() / params.n();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes[i];
    sol.u[i] = sol.v[i] - k * r * r + sol.c_v;
  }
  sol.density = op.density(sol.v, sol.c_v);
  return sol;
}

std::vector<SweepStep> continuation_sweep(const ProblemParams& base, std::span<const double> lambdas,
                                          const RadialGrid& grid, const SolverConfig& config, KernelCache* cache) {
  const double crit = critical_lambda(base.n(), base.alpha());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || !(lambdas[i] < crit))
      throw PreconditionError("continuation_sweep: every Lambda must lie in (0, Lambda_1 (1 + alpha))");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw PreconditionError("continuation_sweep: Lambda values must increase strictly");
  }
  KernelCache local;
  if (!cache) cache = &local;

  std::vector<SweepStep> out;
  SolverConfig cfg = config;
  for (double lambda : lambdas) {
    SweepStep step;
    step.lambda = lambda;
    try {
      step.solution = solve_fixed_point(base.with_lambda(lambda), grid, cfg, cache);
      if (step.solution->converged) cfg.initial_v = step.solution->v;
      else step.error = to_string(step.solution->status);
    } catch (const std::exception& e) {
      step.error = e.what();
    }
    out.push_back(std::move(step));
  }
  return out;
}

std::vector<double> BlowupProfile::sample(std::span<const double> xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back((*this)(x));
  return out;
}

void BlowupProfile::build_interpolant() {
  std::vector<double> x{0.0};
  std::vector<double> y{0.0};
  x.insert(x.end(), grid.nodes.begin(), grid.nodes.end());
  y.insert(y.end(), eta.begin(), eta.end());
  interp_ = std::make_shared<const MonotoneCubic>(std::move(x), std::move(y));
}

BlowupProfile rescale_blowup(const RadialSolution& solution) {
  const double w0 = solution.w0();
  if (!(w0 > 0.0) || !std::isfinite(w0)) throw PreconditionError("rescale_blowup: needs a finite peak w(0) > 0");
  BlowupProfile p;
  p.n = solution.params.n();
  p.alpha = solution.params.alpha();
  p.source_peak = w0;
  p.r_k = std::exp(-w0 / (1.0 + p.alpha));
  p.grid = solution.grid.rescaled(p.r_k);
  p.eta.resize(solution.v.size());
  for (std::size_t i = 0; i < p.eta.size(); ++i) p.eta[i] = solution.v[i] - solution.v_origin;
  p.build_interpolant();
  return p;
}

NormalityFit normality_fit(std::span<const double> eta, std::span<const double> density, const RadialGrid& grid,
                           int n, double test_radius) {
  if (eta.size() != grid.size() || density.size() != grid.size())
    throw UsageError("normality_fit: samples do not match the grid");
  NormalityFit fit;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.nodes[i] <= test_radius) {
      idx.push_back(i);
      fit.radii.push_back(grid.nodes[i]);
    }
  if (idx.empty()) throw UsageError("normality_fit: no grid node inside the test radius");
  const KernelMatrix k = assemble_kernel_matrix(grid, fit.radii, n, KernelVariant::shifted);
  const std::vector<double> pot = apply_potential(k, density);
  fit.errors.resize(idx.size());
  double mean = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    fit.errors[a] = eta[idx[a]] - pot[a];
    mean += fit.errors[a];
  }
  fit.c = mean / static_cast<double>(idx.size());
  for (double& e : fit.errors) {
    e -= fit.c;
    fit.residual = std::max(fit.residual, std::abs(e));
  }
  return fit;
}

NormalProfile extract_normal_solution(std::span<const SweepStep> sweep, const NormalExtractionOptions& options) {
  const RadialSolution* last = nullptr;
  double lambda = 0.0;
  for (const auto& step : sweep)
    if (step.converged()) {
      last = &*step.solution;
      lambda = step.lambda;
    }
  if (!last) throw DiagnosticError("extract_normal_solution: sweep has no converged step");
  if (!(last->w0() >= options.min_peak))
    throw DiagnosticError("extract_normal_solution: sweep too short, peak w(0) = " + std::to_string(last->w0()));

  NormalProfile out;
  out.profile = rescale_blowup(*last);
  out.lambda_source = lambda;
  const auto& g = out.profile.grid;
  const int n = out.profile.n;
  const double na = n * out.profile.alpha;
  std::vector<double> rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) rho[i] = std::exp(na * std::log(g.nodes[i]) + n * out.profile.eta[i]);
  out.total_curvature = integrate_radial(rho, g, n);
  NormalityFit fit = normality_fit(out.profile.eta, rho, g, n, options.test_radius);
  out.c = fit.c;
  out.normality_residual = fit.residual;
  out.test_radii = std::move(fit.radii);
  out.residuals = std::move(fit.errors);
  return out;
}

}  // namespace qcurv
