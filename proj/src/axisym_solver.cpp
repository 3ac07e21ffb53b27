#include "qcurv/axisym_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qcurv/errors.hpp"
#include "qcurv/nystrom.hpp"
#include "qcurv/radial_kernel.hpp"

namespace qcurv {

namespace {

constexpr double kLogMax = 709.78;

// Composite rule on [0, pi]: uniform Gauss-Legendre panels, the first one replaced
// by panels shrinking towards theta = 0 where log((1-rho)^2 + 4 rho sin^2(theta/2))
// is singular at rho = 1.
GaussRule theta_rule() {
  const GaussRule base = gauss_legendre(12);
  const int panels = 48;
  const double h = std::numbers::pi / panels;
  GaussRule out = graded_rule(0.0, h, 0.0, 23, base);
  for (int p = 1; p < panels; ++p) {
    const double a = p * h;
    for (std::size_t k = 0; k < base.size(); ++k) {
      out.nodes.push_back(a + 0.5 * h * (base.nodes[k] + 1.0));
      out.weights.push_back(0.5 * h * base.weights[k]);
    }
  }
  return out;
}

// Normalised Gegenbauer polynomials p_l(t), p_l(1) = 1, for lambda = (n-2)/2.
void gegenbauer(double t, int n, std::size_t count, double* out) {
  const double lam = 0.5 * (n - 2);
  out[0] = 1.0;
  if (count > 1) out[1] = t;
  for (std::size_t l = 1; l + 1 < count; ++l) {
    const double ld = static_cast<double>(l);
    out[l + 1] = (2.0 * (ld + lam) * t * out[l] - ld * out[l - 1]) / (ld + 2.0 * lam);
  }
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> log_mass(const ProblemParams& p, const AxisymGrid& g) {
  const std::vector<double> meas = g.measure();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.radial_size(); ++i) {
    const double r = g.radial.nodes[i];
    const double base = p.weight_exponent() * std::log(r) - p.n() * r * r;
    for (std::size_t k = 0; k < g.angular_size(); ++k) out[g.index(i, k)] = std::log(meas[g.index(i, k)]) + base;
  }
  return out;
}

double normalize(std::span<const double> v, const std::vector<double>& lm, const ProblemParams& p) {
  const int n = p.n();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw NumericError("solve_axisym: non-finite iterate", i);
    top = std::max(top, lm[i] + n * v[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += std::exp(lm[i] + n * v[i] - top);
  const double log_i = top + std::log(sum);
  if (log_i > kLogMax) throw BlowupSignal("solve_axisym: volume integral overflows");
  if (!(log_i > -kLogMax)) throw DomainError("solve_axisym: volume integral vanishes");
  return (std::log(p.lambda()) - log_i) / n;
}

std::vector<double> density_of(std::span<const double> v, double c, const ProblemParams& p, const AxisymGrid& g) {
  std::vector<double> f(g.size());
  const int n = p.n();
  for (std::size_t i = 0; i < g.radial_size(); ++i) {
    const double r = g.radial.nodes[i];
    const double base = p.weight_exponent() * std::log(r) - n * r * r;
    for (std::size_t k = 0; k < g.angular_size(); ++k) {
      const std::size_t j = g.index(i, k);
      f[j] = std::exp(base + n * (v[j] + c));
    }
  }
  return f;
}

}  // namespace

double axisym_kernel_mean(double s1, double sigma, double t1, double tau, int n) {
  if (n < 3) throw DomainError("axisym_kernel_mean: needs n >= 3");
  if (!(sigma >= 0.0) || !(tau >= 0.0)) throw DomainError("axisym_kernel_mean: distances to the axis must be >= 0");
  const double dx = s1 - t1;
  const double c = dx * dx + sigma * sigma + tau * tau;
  if (!(c > 0.0)) throw DomainError("axisym_kernel_mean: coincident points on the axis");
  const double d = 2.0 * sigma * tau;
  const double a = std::sqrt(0.5 * (c + std::sqrt(std::max(0.0, c * c - d * d))));
  const double b = d / (2.0 * a);
  return angular_log_mean(a, b, n - 1);
}

double AxisymGrid::rho(std::size_t i, std::size_t k) const {
  const double t = angular.nodes[k];
  return radial.nodes[i] * std::sqrt(std::max(0.0, (1.0 - t) * (1.0 + t)));
}

std::vector<double> AxisymGrid::measure() const {
  const std::vector<double> rm = radial_measure(radial, n);
  // radial_measure carries |S^{n-1}|; the Gegenbauer weights integrate to |S^{n-1}| / |S^{n-2}|.
  const double ratio = sphere_area(n - 2) / sphere_area(n - 1);
  std::vector<double> out(size());
  for (std::size_t i = 0; i < radial_size(); ++i)
    for (std::size_t k = 0; k < angular_size(); ++k) out[index(i, k)] = rm[i] * ratio * angular.weights[k];
  return out;
}

AxisymGrid build_axisym_grid(const ProblemParams& params, std::size_t radial_nodes, std::size_t angular_nodes,
                             std::optional<double> r_max, std::optional<double> grading) {
  if (params.n() < 3) throw DomainError("build_axisym_grid: the axisymmetric reduction needs n >= 3");
  if (angular_nodes < 2) throw ConfigError("build_axisym_grid: need at least two angular nodes");
  AxisymGrid g;
  g.n = params.n();
  g.radial = build_radial_grid(params, radial_nodes, r_max.value_or(default_r_max(params) + 3.0), grading);
  const double a = 0.5 * (params.n() - 3);
  g.angular = gauss_jacobi(angular_nodes, a, a);
  return g;
}

AxisymOperator::AxisymOperator(const AxisymGrid& grid) : grid_(grid) {
  const int n = grid.n;
  const std::size_t L = grid.angular_size();
  const GaussRule th = theta_rule();
  const std::size_t Q = th.size();

  // table(l - 1, q) = p_l(cos theta_q) sin^{n-2}(theta_q) w_q for l >= 1.
  Eigen::MatrixXd table(static_cast<Eigen::Index>(L - 1), static_cast<Eigen::Index>(Q));
  std::vector<double> p(L);
  std::vector<double> half_sin2(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    const double theta = th.nodes[q];
    gegenbauer(std::cos(theta), n, L, p.data());
    const double w = std::pow(std::sin(theta), n - 2) * th.weights[q];
    for (std::size_t l = 1; l < L; ++l) table(static_cast<Eigen::Index>(l - 1), static_cast<Eigen::Index>(q)) = p[l] * w;
    const double sh = std::sin(0.5 * theta);
    half_sin2[q] = 4.0 * sh * sh;
  }

  const double g = gamma_n(n);
  const double f0 = sphere_area(n - 1) / g;
  const double fl = -0.5 * sphere_area(n - 2) / g;
  Eigen::VectorXd logs(static_cast<Eigen::Index>(Q));
  Eigen::VectorXd modes(static_cast<Eigen::Index>(L - 1));
  auto eval = [&](double s, double r, std::span<double> out) {
    out[0] = f0 * (std::log1p(r) - angular_log_mean(s, r, n));
    const double hi = std::max(s, r);
    const double rho = hi > 0.0 ? std::min(s, r) / hi : 0.0;
    if (rho == 0.0) {
      std::fill(out.begin() + 1, out.end(), 0.0);
      return;
    }
    const double d = (1.0 - rho) * (1.0 - rho);
    for (std::size_t q = 0; q < Q; ++q) logs[static_cast<Eigen::Index>(q)] = std::log(d + rho * half_sin2[q]);
    modes.noalias() = table * logs;
    for (std::size_t l = 1; l < L; ++l) out[l] = fl * modes[static_cast<Eigen::Index>(l - 1)];
  };
  blocks_ = detail::assemble_nystrom(grid.radial, grid.radial.nodes, n, L, eval);

  poly_.resize(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(L));
  proj_.resize(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(L));
  for (std::size_t k = 0; k < L; ++k) {
    gegenbauer(grid.angular.nodes[k], n, L, p.data());
    for (std::size_t l = 0; l < L; ++l) poly_(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = p[l];
  }
  for (std::size_t l = 0; l < L; ++l) {
    double h = 0.0;
    for (std::size_t k = 0; k < L; ++k) {
      const double pk = poly_(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k));
      h += grid.angular.weights[k] * pk * pk;
    }
    for (std::size_t k = 0; k < L; ++k)
      proj_(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) =
          grid.angular.weights[k] * poly_(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) / h;
  }
}

std::vector<double> AxisymOperator::potential(std::span<const double> density) const {
  if (density.size() != grid_.size()) throw UsageError("AxisymOperator::potential: density does not match the grid");
  const auto m = static_cast<Eigen::Index>(grid_.radial_size());
  const auto L = static_cast<Eigen::Index>(grid_.angular_size());
  // Rows are radii, columns angular nodes.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> f(density.data(), m, L);
  const Eigen::MatrixXd coeff = f * proj_.transpose();  // m x L, column l = mode l
  Eigen::MatrixXd pot(m, L);
  for (Eigen::Index l = 0; l < L; ++l) pot.col(l).noalias() = blocks_[static_cast<std::size_t>(l)] * coeff.col(l);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out = pot * poly_;
  return {out.data(), out.data() + out.size()};
}

double compute_v_star(std::span<const double> v, double c_v, double alpha, const AxisymGrid& grid) {
  if (!(alpha > -1.0)) throw DomainError("compute_v_star: alpha must exceed -1");
  if (v.size() != grid.size()) throw UsageError("compute_v_star: samples do not match the grid");
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.radial_size() && grid.radial.nodes[i] <= 1.0; ++i)
    for (std::size_t k = 0; k < grid.angular_size(); ++k) top = std::max(top, v[grid.index(i, k)]);
  if (top == -std::numeric_limits<double>::infinity())
    throw ConfigError("compute_v_star: no grid node inside the unit ball");
  return std::exp(2.0 / (1.0 + alpha) * (top + c_v));
}

AxisymStep apply_T_axisym(std::span<const double> v, const ProblemParams& params, const AxisymOperator& op,
                          bool tilt) {
  const AxisymGrid& g = op.grid();
  if (v.size() != g.size()) throw UsageError("apply_T_axisym: samples do not match the grid");
  AxisymStep out;
  out.c_v = normalize(v, log_mass(params, g), params);
  out.v_star = compute_v_star(v, out.c_v, params.alpha(), g);
  out.v_bar = op.potential(density_of(v, out.c_v, params, g));
  if (tilt)
    for (std::size_t i = 0; i < g.radial_size(); ++i)
      for (std::size_t k = 0; k < g.angular_size(); ++k) out.v_bar[g.index(i, k)] += out.v_star * g.x1(i, k);
  return out;
}

AxisymField solve_axisym(const ProblemParams& params, const AxisymConfig& config) {
  if (!(params.lambda() < lambda_1(params.n())))
    throw PreconditionError("solve_axisym: Lambda must lie below Lambda_1");
  if (params.mu() != params.n()) throw PreconditionError("solve_axisym: the tilted ansatz uses mu = n");
  if (!(config.damping > 0.0 && config.damping <= 1.0)) throw UsageError("solve_axisym: damping must lie in (0, 1]");

  AxisymGrid grid = build_axisym_grid(params, config.radial_nodes, config.angular_nodes, config.r_max, config.grading);
  if (!config.initial_v.empty() && config.initial_v.size() != grid.size())
    throw UsageError("solve_axisym: initial iterate does not match the grid");
  const AxisymOperator op(grid);
  const std::size_t L = grid.angular_size();

  AxisymField f{params, grid, {}, 0.0, 0.0, {}, {}};
  f.tilt = config.tilt;
  f.v = config.initial_v.empty() ? std::vector<double>(grid.size(), 0.0) : config.initial_v;
  double theta = config.damping;

  // The tilt v* = e^{(2/(1+alpha))(v + c_v)} reacts exponentially to the iterate, so
  // a trial step that overflows or more than doubles the residual is rejected and
  // retried from the accepted iterate with half the damping.
  auto evaluate = [&](std::span<const double> v, AxisymStep& t, double& res, double& w0) {
    try {
      t = apply_T_axisym(v, params, op, config.tilt);
    } catch (const BlowupSignal&) {
      return false;
    }
    res = sup_diff(t.v_bar, v);
    w0 = 0.0;
    for (std::size_t k = 0; k < L; ++k) w0 += t.v_bar[grid.index(0, k)];
    w0 = w0 / static_cast<double>(L) + t.c_v;
    return std::isfinite(res);
  };

  AxisymStep last;
  double res = 0.0;
  double w0 = 0.0;
  if (!evaluate(f.v, last, res, w0)) throw NumericError("solve_axisym: initial iterate is not admissible", 0);
  std::vector<double> trial(f.v.size());
  for (std::size_t it = 1;; ++it) {
    f.iterations = it;
    f.residual_sup = res;
    if (config.trace) config.trace({it, res, last.c_v, w0, theta});
    if (w0 > config.blowup_ceiling) {
      f.status = SolveStatus::blowup;
      break;
    }
    if (res < config.tol) {
      f.status = SolveStatus::converged;
      break;
    }
    if (it >= config.max_iter) break;
    AxisymStep next;
    double next_res = 0.0;
    double next_w0 = 0.0;
    bool accepted = false;
    while (!accepted) {
      for (std::size_t i = 0; i < f.v.size(); ++i) trial[i] = f.v[i] + theta * (last.v_bar[i] - f.v[i]);
      accepted = evaluate(trial, next, next_res, next_w0) && next_res <= 2.0 * res;
      if (!accepted) {
        if (theta <= config.min_damping) break;
        theta = std::max(0.5 * theta, config.min_damping);
      }
    }
    if (!accepted) break;
    if (next_res > res)
      theta = std::max(0.5 * theta, config.min_damping);
    else
      theta = std::min(1.1 * theta, config.damping);
    f.v.swap(trial);
    last = std::move(next);
    res = next_res;
    w0 = next_w0;
  }
  f.converged = f.status == SolveStatus::converged;
  f.damping = theta;
  f.c_v = last.c_v;
  f.v_star = last.v_star;

  f.density = density_of(f.v, f.c_v, params, grid);
  const std::vector<double> meas = grid.measure();
  f.u.resize(grid.size());
  double peak = 0.0;
  double tail = 0.0;
  const std::size_t tail_first = grid.radial.panels.back().first;
  for (std::size_t i = 0; i < grid.radial_size(); ++i) {
    const double r = grid.radial.nodes[i];
    for (std::size_t k = 0; k < L; ++k) {
      const std::size_t j = grid.index(i, k);
      f.u[j] = f.v[j] - r * r + f.c_v;
      f.volume += meas[j] * f.density[j];
      f.norm = std::max(f.norm, std::abs(f.v[j]) / (1.0 + r));
      f.asymmetry = std::max(f.asymmetry, std::abs(f.v[j] - f.v[grid.index(i, L - 1 - k)]));
      peak = std::max(peak, f.density[j]);
      if (i >= tail_first) tail = std::max(tail, f.density[j]);
    }
  }
  f.tail_ratio = peak > 0.0 ? tail / peak : 0.0;
  return f;
}

TiltedPohozaev tilted_pohozaev(const AxisymField& field) {
  const AxisymGrid& g = field.grid;
  const std::vector<double> meas = g.measure();
  const double vs = field.tilt ? field.v_star : 0.0;
  TiltedPohozaev p;
  double r2 = 0.0;
  double x1 = 0.0;
  for (std::size_t i = 0; i < g.radial_size(); ++i) {
    const double r = g.radial.nodes[i];
    for (std::size_t k = 0; k < g.angular_size(); ++k) {
      const std::size_t j = g.index(i, k);
      const double m = meas[j] * field.density[j];
      p.lambda += m;
      r2 += r * r * m;
      x1 += g.x1(i, k) * m;
    }
  }
  const double gn = gamma_n(g.n);
  p.lhs = p.lambda * (p.lambda - 2.0 * gn) / gn;
  p.alpha_term = 2.0 * field.params.alpha() * p.lambda;
  p.gaussian_term = -4.0 * r2;
  p.tilt_term = 2.0 * vs * x1;
  p.rhs = p.alpha_term + p.gaussian_term + p.tilt_term;
  p.residual = std::abs(p.lhs - p.rhs);
  p.relative_residual = p.residual / (p.lambda * p.lambda / gn);
  return p;
}

}  // namespace qcurv
