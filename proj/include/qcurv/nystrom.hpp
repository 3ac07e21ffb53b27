#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "qcurv/gauss.hpp"
#include "qcurv/quadrature.hpp"

namespace qcurv::detail {

// Assembles `blocks` Nystrom matrices sharing one radial grid. `eval(s, r, out)`
// writes the kernel values k_b(s, r) for every block b; the assembled entry is
// k_b(s_i, r_j) r_j^{n-1} w_j away from the target and a product-integration
// weight on the panel holding s_i and on its two neighbours.
template <class Eval>
std::vector<Eigen::MatrixXd> assemble_nystrom(const RadialGrid& grid, std::span<const double> targets, int n,
                                              std::size_t blocks, Eval&& eval) {
  const auto rows = static_cast<Eigen::Index>(targets.size());
  const auto cols = static_cast<Eigen::Index>(grid.size());
  std::vector<Eigen::MatrixXd> out(blocks, Eigen::MatrixXd(rows, cols));
  std::vector<double> values(blocks);

  std::vector<double> jac(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) jac[j] = std::pow(grid.nodes[j], n - 1);

  for (Eigen::Index i = 0; i < rows; ++i) {
    const double s = targets[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      eval(s, grid.nodes[jj], std::span<double>(values));
      const double w = jac[jj] * grid.weights[jj];
      for (std::size_t b = 0; b < blocks; ++b) out[b](i, j) = values[b] * w;
    }
  }

  const GaussRule base = gauss_legendre(16);
  std::vector<double> basis(grid.panel_order);
  std::vector<double> local(blocks * grid.panel_order);
  for (const auto& panel : grid.panels) {
    std::span<const double> t_nodes(grid.t_nodes.data() + panel.first, panel.count);
    const std::vector<double> bary = barycentric_weights(t_nodes);
    const double r_lo = panel.r_lo();
    const double r_hi = panel.r_hi();
    const double width = r_hi - r_lo;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double s = targets[static_cast<std::size_t>(i)];
      if (s < r_lo - width || s > r_hi + width) continue;
      const double focus = s <= 0.0 ? panel.t_lo : panel.param(s);
      const GaussRule sub = graded_rule(panel.t_lo, panel.t_hi, focus, 12, base);
      std::fill(local.begin(), local.end(), 0.0);
      for (std::size_t q = 0; q < sub.size(); ++q) {
        const double t = sub.nodes[q];
        const double r = panel.radius(t);
        if (!(r > 0.0)) continue;
        eval(s, r, std::span<double>(values));
        lagrange_basis(t_nodes, bary, t, basis);
        for (std::size_t b = 0; b < blocks; ++b) {
          const double wv = sub.weights[q] * values[b];
          for (std::size_t k = 0; k < panel.count; ++k) local[b * panel.count + k] += wv * basis[k];
        }
      }
      for (std::size_t k = 0; k < panel.count; ++k) {
        const std::size_t j = panel.first + k;
        const double scale = jac[j] * panel.dradius(grid.t_nodes[j]);
        for (std::size_t b = 0; b < blocks; ++b)
          out[b](i, static_cast<Eigen::Index>(j)) = local[b * panel.count + k] * scale;
      }
    }
  }
  return out;
}

}  // namespace qcurv::detail
