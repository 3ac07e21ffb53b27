#include "qcurv/gauss.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "qcurv/errors.hpp"

namespace qcurv {

namespace {

// Jacobi polynomial P_p^{(a,b)}(x) and its derivative by three-term recurrence.
void jacobi_eval(std::size_t p, double a, double b, double x, double& value, double& deriv) {
  double p0 = 1.0;
  double p1 = 0.5 * (a - b + (a + b + 2.0) * x);
  if (p == 0) {
    value = 1.0;
    deriv = 0.0;
    return;
  }
  for (std::size_t k = 2; k <= p; ++k) {
    const double kk = static_cast<double>(k);
    const double c = 2.0 * kk + a + b;
    const double a1 = 2.0 * kk * (kk + a + b) * (c - 2.0);
    const double a2 = (c - 1.0) * (a * a - b * b);
    const double a3 = (c - 2.0) * (c - 1.0) * c;
    const double a4 = 2.0 * (kk + a - 1.0) * (kk + b - 1.0) * c;
    const double p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
    p0 = p1;
    p1 = p2;
  }
  value = p1;
  // d/dx P_p^{(a,b)} = (p + a + b + 1)/2 * P_{p-1}^{(a+1,b+1)}
  if (p == 1) {
    deriv = 0.5 * (a + b + 2.0);
    return;
  }
  double q0 = 1.0;
  double q1 = 0.5 * ((a + 1.0) - (b + 1.0) + (a + b + 4.0) * x);
  const double aa = a + 1.0;
  const double bb = b + 1.0;
  for (std::size_t k = 2; k <= p - 1; ++k) {
    const double kk = static_cast<double>(k);
    const double c = 2.0 * kk + aa + bb;
    const double a1 = 2.0 * kk * (kk + aa + bb) * (c - 2.0);
    const double a2 = (c - 1.0) * (aa * aa - bb * bb);
    const double a3 = (c - 2.0) * (c - 1.0) * c;
    const double a4 = 2.0 * (kk + aa - 1.0) * (kk + bb - 1.0) * c;
    const double q2 = ((a2 + a3 * x) * q1 - a4 * q0) / a1;
    q0 = q1;
    q1 = q2;
  }
  deriv = 0.5 * (static_cast<double>(p) + a + b + 1.0) * q1;
}

}  // namespace

GaussRule gauss_legendre(std::size_t p) { return gauss_jacobi(p, 0.0, 0.0); }

GaussRule gauss_jacobi(std::size_t p, double a, double b) {
  if (p == 0) throw UsageError("gauss_jacobi: need at least one node");
  if (!(a > -1.0) || !(b > -1.0)) throw DomainError("gauss_jacobi: exponents must exceed -1");

  // Jacobi matrix of the monic recurrence.
  Eigen::VectorXd diag(static_cast<Eigen::Index>(p));
  Eigen::VectorXd off(static_cast<Eigen::Index>(p > 1 ? p - 1 : 1));
  for (std::size_t k = 0; k < p; ++k) {
    const double kk = static_cast<double>(k);
    const double c = 2.0 * kk + a + b;
    diag[static_cast<Eigen::Index>(k)] =
        (c == 0.0 || c + 2.0 == 0.0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (c * (c + 2.0));
    if (k + 1 < p) {
      const double k1 = kk + 1.0;
      const double c1 = 2.0 * k1 + a + b;
      // The general formula is 0/0 at k = 0 when a + b = -1.
      const double beta = k == 0 ? 4.0 * (1.0 + a) * (1.0 + b) / (c1 * c1 * (c1 + 1.0))
                                 : 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b) / (c1 * c1 * (c1 + 1.0) * (c1 - 1.0));
      off[static_cast<Eigen::Index>(k)] = std::sqrt(beta);
    }
  }
  if (p == 1) diag[0] = (b - a) / (a + b + 2.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (p == 1) {
    GaussRule rule;
    rule.nodes = {diag[0]};
    rule.weights = {std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) /
                    std::tgamma(a + b + 2.0)};
    return rule;
  }
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);

  const double mu0 =
      std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0));

  GaussRule rule;
  rule.nodes.resize(p);
  rule.weights.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    double x = es.eigenvalues()[static_cast<Eigen::Index>(k)];
    // Newton polish on P_p^{(a,b)}.
    for (int it = 0; it < 3; ++it) {
      double val = 0.0;
      double der = 0.0;
      jacobi_eval(p, a, b, x, val, der);
      if (der == 0.0) break;
      const double dx = val / der;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[k] = x;
    const double v0 = es.eigenvectors()(0, static_cast<Eigen::Index>(k));
    rule.weights[k] = mu0 * v0 * v0;
  }
  // Weights from the polished nodes via the Christoffel formula keep full accuracy
  // for large p; the eigenvector weights serve as a fallback for tiny p.
  if (p >= 4) {
    const double pp = static_cast<double>(p);
    const double logc = (a + b + 1.0) * std::log(2.0) + std::lgamma(pp + a + 1.0) + std::lgamma(pp + b + 1.0) -
                        std::lgamma(pp + 1.0) - std::lgamma(pp + a + b + 1.0);
    for (std::size_t k = 0; k < p; ++k) {
      double val = 0.0;
      double der = 0.0;
      jacobi_eval(p, a, b, rule.nodes[k], val, der);
      const double x = rule.nodes[k];
      rule.weights[k] = std::exp(logc) / ((1.0 - x * x) * der * der);
    }
  }
  return rule;
}

GaussRule graded_rule(double lo, double hi, double focus, std::size_t levels, const GaussRule& base) {
  GaussRule out;
  auto add_panel = [&](double a, double b) {
    if (!(b > a)) return;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t k = 0; k < base.size(); ++k) {
      out.nodes.push_back(mid + half * base.nodes[k]);
      out.weights.push_back(half * base.weights[k]);
    }
  };
  // Grade [a, b] towards one endpoint; `gap` is the distance from that endpoint
  // to the singular point (0 when it sits on the endpoint).
  auto graded_side = [&](double a, double b, bool toward_a, double gap) {
    double outer = b - a;
    if (!(outer > 0.0)) return;
    for (std::size_t l = 0; l < levels; ++l) {
      const double inner = 0.25 * outer;
      if (inner < 0.5 * gap) break;
      if (toward_a)
        add_panel(a + inner, a + outer);
      else
        add_panel(b - outer, b - inner);
      outer = inner;
    }
    if (toward_a)
      add_panel(a, a + outer);
    else
      add_panel(b - outer, b);
  };

  if (focus <= lo) {
    graded_side(lo, hi, true, lo - focus);
  } else if (focus >= hi) {
    graded_side(lo, hi, false, focus - hi);
  } else {
    graded_side(lo, focus, false, 0.0);
    graded_side(focus, hi, true, 0.0);
  }
  return out;
}

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const std::size_t p = nodes.size();
  std::vector<double> w(p, 1.0);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < p; ++k)
      if (k != j) w[j] /= (nodes[j] - nodes[k]);
  return w;
}

void lagrange_basis(std::span<const double> nodes, std::span<const double> bary, double x,
                    std::span<double> out) {
  const std::size_t p = nodes.size();
  for (std::size_t k = 0; k < p; ++k) {
    if (x == nodes[k]) {
      std::fill(out.begin(), out.end(), 0.0);
      out[k] = 1.0;
      return;
    }
  }
  double denom = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    out[k] = bary[k] / (x - nodes[k]);
    denom += out[k];
  }
  for (std::size_t k = 0; k < p; ++k) out[k] /= denom;
}

}  // namespace qcurv
