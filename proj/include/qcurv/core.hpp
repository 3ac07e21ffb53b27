#pragma once

#include <map>

namespace qcurv {

/// Surface measure of the unit k-sphere in R^{k+1}.
double sphere_area(int k);

/// gamma_n = (n-1)!/2 |S^n|, so that (1/gamma_n) log(1/|x|) is the
/// fundamental solution of (-Delta)^{n/2} on R^n.
double gamma_n(int n);

/// Critical total curvature Lambda_1 = (n-1)! |S^n| = 2 gamma_n.
double lambda_1(int n);

/// Radial/normal threshold Lambda_1 (1 + alpha).
double critical_lambda(int n, double alpha);

// Problem data for (-Delta)^{n/2} u = |x|^{n alpha} e^{n u} with total curvature
// lambda, together with the Gaussian exponent mu of the ansatz weight
// |y|^{n alpha} e^{-mu |y|^2}. Validated on construction.
class ProblemParams {
 public:
  ProblemParams(int n, double alpha, double lambda, double mu);
  // mu defaults to n, the exponent of the radial ansatz u = v - |x|^2 + c.
  ProblemParams(int n, double alpha, double lambda);

  int n() const noexcept { return n_; }
  double alpha() const noexcept { return alpha_; }
  double lambda() const noexcept { return lambda_; }
  double mu() const noexcept { return mu_; }

  // Exponent of the origin weight, n * alpha.
  double weight_exponent() const noexcept { return n_ * alpha_; }

  ProblemParams with_lambda(double lambda) const { return {n_, alpha_, lambda, mu_}; }

  bool operator==(const ProblemParams&) const = default;

 private:
  int n_;
  double alpha_;
  double lambda_;
  double mu_;
};

struct Constants {
  int n = 0;
  double gamma_n = 0.0;
  double lambda_1 = 0.0;
  // |S^k| for k = 1 .. n.
  std::map<int, double> sphere_area;

  static Constants for_dimension(int n);
};

}  // namespace qcurv
