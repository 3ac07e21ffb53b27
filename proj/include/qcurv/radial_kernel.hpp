#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "qcurv/quadrature.hpp"

namespace qcurv {

/// Average of log|a e_1 - b w| over w in S^{n-1}.
///
/// Evaluated in closed form: with M = max(a, b) and rho = min(a, b)/M the mean is
/// log M - sum_k rho^k c_k / k, where c_k are the cosine moments of sin^{n-2}.
/// The sum terminates for even n; for odd n it is used while rho <= 1/2 and an
/// exact antiderivative of the polynomial-weighted logarithm takes over above.
double angular_log_mean(double a, double b, int n);

/// angular_log_mean(a, b, n) - log max(a, b), as a function of rho = min/max in [0, 1].
double angular_log_offset(double rho, int n);

enum class KernelVariant {
  // log((1 + |y|) / |x - y|): the kernel of the normal-solution integral equation.
  shifted,
  // log(1 / |x - y|): the kernel of the Gaussian ansatz equation.
  plain,
};

const char* to_string(KernelVariant v);

// Nystrom matrix mapping a radial density sampled on the grid nodes to its
// potential (1/gamma_n) int log(.../|x-y|) f(|y|) dy at the target radii.
struct KernelMatrix {
  Eigen::MatrixXd entries;
  KernelVariant variant = KernelVariant::plain;
  int n = 0;
  std::vector<double> targets;
  std::uint64_t key = 0;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(entries.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(entries.cols()); }
};

std::uint64_t kernel_key(const RadialGrid& grid, std::span<const double> targets, int n, KernelVariant variant);

/// Entries (1/gamma_n) (shift(r_j) - S_n(s_i, r_j)) |S^{n-1}| r_j^{n-1} w_j, with the
/// panels next to each target replaced by product-integration weights that resolve
/// the kink of S_n at r = s.
KernelMatrix assemble_kernel_matrix(const RadialGrid& grid, std::span<const double> targets, int n,
                                    KernelVariant variant);

std::vector<double> apply_potential(const KernelMatrix& kernel, std::span<const double> density);

}  // namespace qcurv
