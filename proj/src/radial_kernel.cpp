#include "qcurv/radial_kernel.hpp"

#include <cmath>
#include <string>

#include "qcurv/errors.hpp"
#include "qcurv/nystrom.hpp"

namespace qcurv {

namespace {

// Cosine-moment series -sum_{k even} rho^k c_k / k with c_{k+2} = c_k (k - p)/(k + p + 2),
// p = n - 2. Terminates for even p.
double offset_series(double rho, int n) {
  const double p = n - 2;
  const double rho2 = rho * rho;
  double c = 1.0;
  double power = 1.0;
  double sum = 0.0;
  for (int k = 0; k < 4000; k += 2) {
    c *= (k - p) / (k + p + 2.0);
    if (c == 0.0) break;
    power *= rho2;
    const double term = -power * c / (k + 2.0);
    sum += term;
    if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// Odd n = 2m + 3: (1/2) <log(1 - 2 rho t + rho^2)> under (1 - t^2)^m, through the
// substitution u = 1 - 2 rho t + rho^2 and exact antiderivatives of u^j log u.
double offset_odd_closed(double rho, int n) {
  const int m = (n - 3) / 2;
  const double a = (1.0 - rho) * (1.0 - rho);
  const double b = (1.0 + rho) * (1.0 + rho);
  // (u - a)^m (b - u)^m = sum_j coef[j] u^j
  std::vector<double> left(static_cast<std::size_t>(m) + 1);
  std::vector<double> right(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) {
    left[static_cast<std::size_t>(j)] = binomial(m, j) * std::pow(-a, m - j);
    right[static_cast<std::size_t>(j)] = binomial(m, j) * std::pow(b, m - j) * ((j % 2) ? -1.0 : 1.0);
  }
  std::vector<double> coef(static_cast<std::size_t>(2 * m) + 1, 0.0);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      coef[static_cast<std::size_t>(i + j)] += left[static_cast<std::size_t>(i)] * right[static_cast<std::size_t>(j)];

  auto antideriv = [](int j, double u) {
    if (u == 0.0) return 0.0;
    const double jp = j + 1.0;
    return std::pow(u, jp) * (std::log(u) / jp - 1.0 / (jp * jp));
  };
  double integral = 0.0;
  for (int j = 0; j <= 2 * m; ++j)
    integral += coef[static_cast<std::size_t>(j)] * (antideriv(j, b) - antideriv(j, a));

  // int_{-1}^{1} (1 - t^2)^m dt = 2^{2m+1} (m!)^2 / (2m+1)!
  double norm = std::ldexp(1.0, 2 * m + 1);
  for (int i = 1; i <= m; ++i) norm *= static_cast<double>(i) / (m + i);
  norm /= (2.0 * m + 1.0);
  const double mean = integral / (std::pow(2.0 * rho, 2 * m + 1) * norm);
  return 0.5 * mean;
}

}  // namespace

double angular_log_offset(double rho, int n) {
  if (n < 2) throw DomainError("angular_log_offset: dimension must be >= 2");
  if (!(rho >= 0.0) || rho > 1.0) throw DomainError("angular_log_offset: rho must lie in [0, 1]");
  if (rho == 0.0 || n == 2) return 0.0;
  if (n % 2 == 0 || rho <= 0.5) return offset_series(rho, n);
  return offset_odd_closed(rho, n);
}

double angular_log_mean(double a, double b, int n) {
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("angular_log_mean: radii must be finite and non-negative");
  if (a == 0.0 && b == 0.0) throw DomainError("angular_log_mean: kernel undefined for a = b = 0");
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return std::log(hi) + angular_log_offset(lo / hi, n);
}

const char* to_string(KernelVariant v) { return v == KernelVariant::shifted ? "shifted" : "plain"; }

std::uint64_t kernel_key(const RadialGrid& grid, std::span<const double> targets, int n, KernelVariant variant) {
  std::uint64_t h = grid.fingerprint();
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  mix(targets.data(), targets.size() * sizeof(double));
  mix(&n, sizeof n);
  const int v = static_cast<int>(variant);
  mix(&v, sizeof v);
  return h;
}

KernelMatrix assemble_kernel_matrix(const RadialGrid& grid, std::span<const double> targets, int n,
                                    KernelVariant variant) {
  for (double s : targets)
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("assemble_kernel_matrix: targets must be finite and >= 0");
  const double factor = sphere_area(n - 1) / gamma_n(n);
  const bool shifted = variant == KernelVariant::shifted;
  auto eval = [&](double s, double r, std::span<double> out) {
    const double shift = shifted ? std::log1p(r) : 0.0;
    out[0] = factor * (shift - angular_log_mean(s, r, n));
  };
  KernelMatrix k;
  k.entries = std::move(detail::assemble_nystrom(grid, targets, n, 1, eval).front());
  k.variant = variant;
  k.n = n;
  k.targets.assign(targets.begin(), targets.end());
  k.key = kernel_key(grid, targets, n, variant);
  return k;
}

std::vector<double> apply_potential(const KernelMatrix& kernel, std::span<const double> density) {
  if (density.size() != kernel.cols())
    throw UsageError("apply_potential: density has " + std::to_string(density.size()) + " samples, kernel expects " +
                     std::to_string(kernel.cols()));
  Eigen::Map<const Eigen::VectorXd> f(density.data(), static_cast<Eigen::Index>(density.size()));
  std::vector<double> out(kernel.rows());
  Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())).noalias() = kernel.entries * f;
  return out;
}

}  // namespace qcurv
