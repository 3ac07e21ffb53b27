#include "qcurv/oracle2d.hpp"

#include <cmath>
#include <numbers>

#include "qcurv/errors.hpp"
#include "qcurv/gauss.hpp"

namespace qcurv {

namespace {

bool nonnegative_integer(double a) { return a >= 0.0 && std::floor(a) == a; }

double radial_curvature(const ExplicitSolution2D& sol, std::size_t m) {
  const OracleProfile p = oracle_profile(sol, m);
  return integrate_radial(p.density, p.grid, 2);
}

// Polar tensor rule: Gauss-Legendre panels in r refined towards the peak radius
// |zeta|^{1/(alpha+1)}, trapezoid rule in the angle (the integrand is periodic).
double tensor_curvature(const ExplicitSolution2D& sol, std::size_t radial_panels, std::size_t angular) {
  const double a1 = sol.alpha + 1.0;
  const double peak = std::pow(std::abs(sol.zeta), 1.0 / a1);
  const double width = 1.0 / std::pow(sol.lambda_scale, 1.0 / a1);
  const double r_max = std::max(2.0 * peak, oracle_r_max(sol));
  const GaussRule base = gauss_legendre(16);
  GaussRule rule = graded_rule(0.0, 2.0 * peak, peak, radial_panels / 4, base);
  for (double lo = 2.0 * peak; lo < r_max;) {
    const double hi = std::min(r_max, std::max(lo + width, 2.0 * lo));
    for (std::size_t k = 0; k < base.size(); ++k) {
      rule.nodes.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * base.nodes[k]);
      rule.weights.push_back(0.5 * (hi - lo) * base.weights[k]);
    }
    lo = hi;
  }
  const double h = 2.0 * std::numbers::pi / static_cast<double>(angular);
  double total = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double r = rule.nodes[q];
    double ring = 0.0;
    for (std::size_t k = 0; k < angular; ++k) {
      const double phi = h * static_cast<double>(k);
      const double u = eval_u(sol, r * std::cos(phi), r * std::sin(phi));
      ring += std::exp(2.0 * sol.alpha * std::log(r) + 2.0 * u);
    }
    total += rule.weights[q] * r * h * ring;
  }
  return total;
}

}  // namespace

ExplicitSolution2D::ExplicitSolution2D(double alpha_, double lambda_scale_, std::complex<double> zeta_)
    : alpha(alpha_), lambda_scale(lambda_scale_), zeta(zeta_) {
  if (!(alpha > -1.0)) throw DomainError("ExplicitSolution2D: alpha must exceed -1");
  if (!(lambda_scale > 0.0)) throw DomainError("ExplicitSolution2D: lambda must be positive");
  if (zeta != std::complex<double>{} && !nonnegative_integer(alpha))
    throw DomainError("ExplicitSolution2D: a nonzero zeta needs alpha to be a nonnegative integer");
}

double eval_u(const ExplicitSolution2D& sol, double x1, double x2) {
  const double lam = sol.lambda_scale;
  const double a1 = sol.alpha + 1.0;
  double q = 0.0;
  if (sol.radial()) {
    q = std::pow(std::hypot(x1, x2), 2.0 * a1);
  } else {
    const std::complex<double> z(x1, x2);
    q = std::norm(std::pow(z, static_cast<int>(a1)) - sol.zeta);
  }
  return std::log(2.0 * a1 * lam) - std::log1p(lam * lam * q);
}

double eval_u_radial(const ExplicitSolution2D& sol, double r) {
  if (!sol.radial()) throw PreconditionError("eval_u_radial: needs zeta = 0");
  return eval_u(sol, r, 0.0);
}

double oracle_r_max(const ExplicitSolution2D& sol, double tail) {
  // Outside radius R the radial member keeps 4 pi (1+alpha) / (1 + lambda^2 R^{2(1+alpha)}).
  const double a1 = sol.alpha + 1.0;
  const double base = std::pow(1.0 / tail, 1.0 / (2.0 * a1)) / std::pow(sol.lambda_scale, 1.0 / a1);
  if (sol.radial()) return base;
  return base + 2.0 * std::pow(std::abs(sol.zeta), 1.0 / a1);
}

RadialGrid oracle_grid(const ExplicitSolution2D& sol, std::size_t m) {
  const double scale = std::pow(sol.lambda_scale, 1.0 / (sol.alpha + 1.0));
  const ExplicitSolution2D unit(sol.alpha);
  const ProblemParams params(2, sol.alpha, 4.0 * std::numbers::pi * (1.0 + sol.alpha), 0.0);
  return build_radial_grid(params, m, oracle_r_max(unit)).rescaled(scale);
}

OracleProfile oracle_profile(const ExplicitSolution2D& sol, std::size_t m) {
  if (!sol.radial()) throw PreconditionError("oracle_profile: needs zeta = 0");
  OracleProfile p;
  p.grid = oracle_grid(sol, m);
  p.u.resize(p.grid.size());
  p.density.resize(p.grid.size());
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const double r = p.grid.nodes[i];
    p.u[i] = eval_u_radial(sol, r);
    p.density[i] = std::exp(2.0 * sol.alpha * std::log(r) + 2.0 * p.u[i]);
  }
  return p;
}

CurvatureResult total_curvature(const ExplicitSolution2D& sol, const Oracle2DGridSpec& spec) {
  CurvatureResult c;
  if (sol.radial()) {
    c.value = radial_curvature(sol, spec.radial_nodes);
    c.coarse = radial_curvature(sol, spec.radial_nodes / 2);
  } else {
    const std::size_t panels = std::max<std::size_t>(spec.radial_nodes / 16, 8);
    c.value = tensor_curvature(sol, panels, spec.angular_nodes);
    c.coarse = tensor_curvature(sol, panels / 2, spec.angular_nodes / 2);
  }
  c.disagreement = std::abs(c.value - c.coarse) / std::abs(c.value);
  if (!(c.disagreement <= spec.refinement_tol))
    throw DiagnosticError("total_curvature: density peak not resolved (refinement changes the value by " +
                          std::to_string(c.disagreement) + ")");
  return c;
}

NormalityFit normality_residual_2d(const ExplicitSolution2D& sol, std::size_t m, double test_radius) {
  const OracleProfile p = oracle_profile(sol, m);
  return normality_fit(p.u, p.density, p.grid, 2, test_radius);
}

}  // namespace qcurv
