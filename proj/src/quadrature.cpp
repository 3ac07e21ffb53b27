#include "qcurv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "qcurv/errors.hpp"
#include "qcurv/gauss.hpp"

namespace qcurv {

double RadialPanel::radius(double t) const { return power == 1.0 ? scale * t : scale * std::pow(t, power); }

double RadialPanel::dradius(double t) const {
  return power == 1.0 ? scale : scale * power * std::pow(t, power - 1.0);
}

double RadialPanel::param(double r) const {
  const double x = r / scale;
  return power == 1.0 ? x : std::pow(x, 1.0 / power);
}

RadialGrid RadialGrid::rescaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("RadialGrid::rescaled: factor must be positive");
  RadialGrid g = *this;
  for (auto& r : g.nodes) r /= factor;
  for (auto& w : g.weights) w /= factor;
  for (auto& p : g.panels) p.scale /= factor;
  g.r_max /= factor;
  return g;
}

double RadialGrid::resolution_radius() const {
  if (panels.size() < 2) return panels.empty() ? 0.0 : panels.front().r_hi();
  return panels[1].r_hi();
}

std::size_t RadialGrid::panel_of(double r) const {
  for (std::size_t p = 0; p < panels.size(); ++p)
    if (r <= panels[p].r_hi()) return p;
  return panels.size() - 1;
}

std::uint64_t RadialGrid::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  mix(nodes.data(), nodes.size() * sizeof(double));
  mix(weights.data(), weights.size() * sizeof(double));
  mix(&r_max, sizeof r_max);
  return h;
}

double default_r_max(const ProblemParams& params) {
  if (!(params.mu() > 0.0)) throw ConfigError("default_r_max: Gaussian tail rule needs mu > 0");
  const double n = params.n();
  const double growth = n + n * std::abs(params.alpha());
  auto log_tail = [&](double r) { return -params.mu() * r * r + growth * std::log(r); };
  const double target = std::log(1e-12);
  double r = 1.0;
  while (log_tail(r) >= target) r += 1e-3;
  return 2.0 * r;
}

RadialGrid build_radial_grid(const ProblemParams& params, std::size_t m, double r_max,
                             std::optional<double> grading) {
  if (m < 16) throw ConfigError("build_radial_grid: need at least 16 nodes, got " + std::to_string(m));
  if (!(r_max > 1.0)) throw ConfigError("build_radial_grid: r_max must exceed 1");
  const std::size_t order = m < 32 ? 8 : 16;
  if (m % order != 0)
    throw ConfigError("build_radial_grid: node count " + std::to_string(m) + " is not a multiple of the panel order " +
                      std::to_string(order));

  const double alpha = params.alpha();
  const double q = grading.value_or(std::max(1.0, 2.0 / (1.0 + alpha)));
  if (!(q >= 1.0)) throw ConfigError("build_radial_grid: grading exponent must be >= 1");

  const std::size_t npanels = m / order;
  const std::size_t inner = (npanels + 1) / 2;
  const std::size_t outer = npanels - inner;
  const GaussRule gl = gauss_legendre(order);

  RadialGrid grid;
  grid.r_max = r_max;
  grid.grading_exponent = q;
  grid.panel_order = order;
  grid.nodes.reserve(m);
  grid.weights.reserve(m);
  grid.t_nodes.reserve(m);

  auto add_panel = [&](double t_lo, double t_hi, double power) {
    RadialPanel panel{t_lo, t_hi, power, 1.0, grid.nodes.size(), order};
    const double half = 0.5 * (t_hi - t_lo);
    const double mid = 0.5 * (t_hi + t_lo);
    for (std::size_t k = 0; k < order; ++k) {
      const double t = mid + half * gl.nodes[k];
      grid.t_nodes.push_back(t);
      grid.nodes.push_back(panel.radius(t));
      grid.weights.push_back(half * gl.weights[k] * panel.dradius(t));
    }
    grid.panels.push_back(panel);
  };

  // Dyadic panels in t on (0, 1], innermost first.
  for (std::size_t k = 0; k < inner; ++k) {
    const double t_lo = k == 0 ? 0.0 : std::ldexp(1.0, static_cast<int>(k) - static_cast<int>(inner));
    const double t_hi = std::ldexp(1.0, static_cast<int>(k + 1) - static_cast<int>(inner));
    add_panel(t_lo, t_hi, q);
  }
  for (std::size_t k = 0; k < outer; ++k) {
    const double a = std::pow(r_max, static_cast<double>(k) / static_cast<double>(outer));
    const double b = k + 1 == outer ? r_max : std::pow(r_max, static_cast<double>(k + 1) / static_cast<double>(outer));
    add_panel(a, b, 1.0);
  }

  // The graded panel must integrate the origin weight r^{n-1+n alpha}.
  const double expo = params.n() - 1.0 + params.weight_exponent();
  double approx = 0.0;
  for (std::size_t i = 0; i < grid.size() && grid.nodes[i] <= 1.0; ++i)
    approx += grid.weights[i] * std::pow(grid.nodes[i], expo);
  const double exact = 1.0 / (expo + 1.0);
  if (std::abs(approx - exact) > 1e-8 * exact)
    throw ConfigError("build_radial_grid: graded panel misses the origin weight (relative error " +
                      std::to_string(std::abs(approx - exact) / exact) + "); raise the node count or grading");
  return grid;
}

RadialGrid build_radial_grid(const ProblemParams& params, const GridSpec& spec) {
  const double r_max = spec.r_max ? *spec.r_max : default_r_max(params);
  return build_radial_grid(params, spec.nodes, r_max, spec.grading);
}

std::vector<double> radial_measure(const RadialGrid& grid, int n) {
  const double area = sphere_area(n - 1);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = area * grid.weights[i] * std::pow(grid.nodes[i], n - 1);
  return out;
}

double integrate_radial(std::span<const double> f, const RadialGrid& grid, int n) {
  if (f.size() != grid.size())
    throw UsageError("integrate_radial: " + std::to_string(f.size()) + " samples for a grid of " +
                     std::to_string(grid.size()) + " nodes");
  const double area = sphere_area(n - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) throw NumericError("integrate_radial: non-finite sample", i);
    sum += grid.weights[i] * f[i] * std::pow(grid.nodes[i], n - 1);
  }
  return area * sum;
}

}  // namespace qcurv
