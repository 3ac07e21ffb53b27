#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qcurv/core.hpp"

namespace qcurv {

// One Gauss-Legendre panel of a radial grid, laid out in a panel variable t
// with r = scale * t^power.
struct RadialPanel {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double power = 1.0;
  double scale = 1.0;
  std::size_t first = 0;
  std::size_t count = 0;

  double radius(double t) const;
  double dradius(double t) const;
  // Inverse map; only meaningful for r >= 0.
  double param(double r) const;
  double r_lo() const { return radius(t_lo); }
  double r_hi() const { return radius(t_hi); }
};

// Composite quadrature on (0, r_max]: sum_i weights[i] g(nodes[i]) ~ int_0^r_max g(r) dr.
// The origin is never a node.
struct RadialGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> t_nodes;
  std::vector<RadialPanel> panels;
  double r_max = 0.0;
  double grading_exponent = 1.0;
  std::size_t panel_order = 0;

  std::size_t size() const noexcept { return nodes.size(); }

  // Grid for x = r / factor, i.e. every radius divided by `factor`.
  RadialGrid rescaled(double factor) const;

  // Smallest radius the grid still resolves with at least two panels: the outer
  // edge of the second-innermost panel.
  double resolution_radius() const;

  // Index of the panel containing radius r (clamped to the grid).
  std::size_t panel_of(double r) const;

  std::uint64_t fingerprint() const;
};

struct GridSpec {
  std::size_t nodes = 512;
  std::optional<double> r_max;
  std::optional<double> grading;
};

/// Default truncation radius: twice the smallest R >= 1 with
/// e^{-mu R^2} R^{n + n|alpha|} < 1e-12 (requires mu > 0).
double default_r_max(const ProblemParams& params);

/// Power-graded dyadic panels on (0, 1] (r = t^q, q = max(1, 2/(1+alpha)) unless
/// overridden) followed by geometric panels on [1, r_max]; Gauss-Legendre on each.
/// m must be a multiple of the panel order (16, or 8 when m < 32).
RadialGrid build_radial_grid(const ProblemParams& params, std::size_t m, double r_max,
                             std::optional<double> grading = std::nullopt);

RadialGrid build_radial_grid(const ProblemParams& params, const GridSpec& spec);

/// |S^{n-1}| sum_i w_i f(r_i) r_i^{n-1}, approximating int_{R^n} f(|y|) dy.
double integrate_radial(std::span<const double> f, const RadialGrid& grid, int n);

/// Integration measure |S^{n-1}| r_i^{n-1} w_i per node.
std::vector<double> radial_measure(const RadialGrid& grid, int n);

}  // namespace qcurv
