#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qcurv {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// p-point Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(std::size_t p);

/// p-point Gauss-Jacobi rule on [-1, 1] for the weight (1-t)^a (1+t)^b, a, b > -1.
/// Golub-Welsch eigenvalue construction followed by Newton polishing of the nodes.
GaussRule gauss_jacobi(std::size_t p, double a, double b);

/// Composite Gauss-Legendre rule on [lo, hi] whose panels shrink geometrically
/// (ratio 1/4) towards `focus`, which may lie inside, at, or outside [lo, hi].
/// Used to integrate integrands with a log-type kink or near-singularity at `focus`.
GaussRule graded_rule(double lo, double hi, double focus, std::size_t levels, const GaussRule& base);

/// Barycentric weights for Lagrange interpolation on the given nodes.
std::vector<double> barycentric_weights(std::span<const double> nodes);

/// Values of all Lagrange basis polynomials ell_k(x), k = 0..nodes.size()-1.
void lagrange_basis(std::span<const double> nodes, std::span<const double> bary, double x,
                    std::span<double> out);

}  // namespace qcurv
