#include "qcurv/core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qcurv/errors.hpp"

namespace qcurv {

double sphere_area(int k) {
  if (k < 1) throw DomainError("sphere_area: k must be >= 1, got " + std::to_string(k));
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double gamma_n(int n) {
  if (n < 2) throw DomainError("gamma_n: dimension must be >= 2, got " + std::to_string(n));
  double factorial = 1.0;
  for (int i = 2; i <= n - 1; ++i) factorial *= i;
  return 0.5 * factorial * sphere_area(n);
}

double lambda_1(int n) { return 2.0 * gamma_n(n); }

double critical_lambda(int n, double alpha) {
  if (!(alpha > -1.0)) throw DomainError("critical_lambda: alpha must exceed -1");
  return lambda_1(n) * (1.0 + alpha);
}

ProblemParams::ProblemParams(int n, double alpha, double lambda, double mu)
    : n_(n), alpha_(alpha), lambda_(lambda), mu_(mu) {
  if (n < 2) throw DomainError("ProblemParams: n must be >= 2, got " + std::to_string(n));
  if (!(alpha > -1.0) || !std::isfinite(alpha))
    throw DomainError("ProblemParams: alpha must be finite and > -1, got " + std::to_string(alpha));
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw DomainError("ProblemParams: lambda must be finite and > 0, got " + std::to_string(lambda));
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw DomainError("ProblemParams: mu must be finite and >= 0, got " + std::to_string(mu));
}

ProblemParams::ProblemParams(int n, double alpha, double lambda)
    : ProblemParams(n, alpha, lambda, static_cast<double>(n)) {}

Constants Constants::for_dimension(int n) {
  Constants c;
  c.n = n;
  c.gamma_n = qcurv::gamma_n(n);
  c.lambda_1 = 2.0 * c.gamma_n;
  for (int k = 1; k <= n; ++k) c.sphere_area[k] = qcurv::sphere_area(k);
  return c;
}

}  // namespace qcurv
