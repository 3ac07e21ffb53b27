#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qcurv/core.hpp"
#include "qcurv/gauss.hpp"
#include "qcurv/quadrature.hpp"
#include "qcurv/radial_solver.hpp"

namespace qcurv {

/// Mean of log|p - q| over the rotations of q about the x_1 axis, for points
/// p = (s1, sigma) and q = (t1, tau) given by axial coordinate and distance to the
/// axis in R^n (n >= 3). Equals angular_log_mean(a, b, n - 1) with
/// a^2 + b^2 = (s1 - t1)^2 + sigma^2 + tau^2 and 2ab = 2 sigma tau.
double axisym_kernel_mean(double s1, double sigma, double t1, double tau, int n);

// Polar layout of an x_1-axisymmetric function on R^n: radius r from a RadialGrid
// and t = cos(angle to the x_1 axis) at Gauss-Gegenbauer nodes for the weight
// (1 - t^2)^{(n-3)/2}. Node (i, k) sits at x_1 = r_i t_k, rho = r_i sqrt(1 - t_k^2).
struct AxisymGrid {
  int n = 0;
  RadialGrid radial;
  GaussRule angular;

  std::size_t radial_size() const noexcept { return radial.size(); }
  std::size_t angular_size() const noexcept { return angular.size(); }
  std::size_t size() const noexcept { return radial_size() * angular_size(); }
  std::size_t index(std::size_t i, std::size_t k) const noexcept { return i * angular_size() + k; }

  double x1(std::size_t i, std::size_t k) const { return radial.nodes[i] * angular.nodes[k]; }
  double rho(std::size_t i, std::size_t k) const;

  // Integration measure per node, summing to the volume of the truncated ball.
  std::vector<double> measure() const;
};

AxisymGrid build_axisym_grid(const ProblemParams& params, std::size_t radial_nodes, std::size_t angular_nodes,
                             std::optional<double> r_max = std::nullopt,
                             std::optional<double> grading = std::nullopt);

struct AxisymConfig {
  std::size_t radial_nodes = 128;
  std::size_t angular_nodes = 96;
  std::optional<double> r_max;
  std::optional<double> grading;
  double damping = 0.5;
  double min_damping = 1.0 / 1024.0;
  double tol = 1e-8;
  std::size_t max_iter = 50000;
  double blowup_ceiling = 40.0;
  // Include the symmetry-breaking term v* x_1; off reproduces the radial problem.
  bool tilt = true;
  // Starting iterate, one value per node in AxisymGrid::index order; empty means v = 0.
  std::vector<double> initial_v;
  TraceSink trace;
};

// Mode-decomposed potential operator on an AxisymGrid. An axisymmetric density
// is expanded in normalised Gegenbauer polynomials p_l(t); each mode l has its own
// radial Nystrom block (l = 0 carries the log(1 + |y|) shift).
class AxisymOperator {
 public:
  explicit AxisymOperator(const AxisymGrid& grid);

  // (1/gamma_n) int log((1 + |y|)/|x - y|) f(y) dy at every node.
  std::vector<double> potential(std::span<const double> density) const;

  const AxisymGrid& grid() const noexcept { return grid_; }
  std::size_t modes() const noexcept { return blocks_.size(); }

 private:
  AxisymGrid grid_;
  std::vector<Eigen::MatrixXd> blocks_;
  // poly_(l, k) = p_l(t_k); proj_(l, k) = W_k p_l(t_k) / h_l.
  Eigen::MatrixXd poly_;
  Eigen::MatrixXd proj_;
};

struct AxisymField {
  ProblemParams params;
  AxisymGrid grid;
  std::vector<double> v;
  double c_v = 0.0;
  double v_star = 0.0;
  std::vector<double> u;
  std::vector<double> density;
  double residual_sup = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::max_iterations;
  double damping = 0.0;
  bool tilt = true;
  // int |y|^{n alpha} e^{-n |y|^2} e^{n (v + c_v)} dy on the grid.
  double volume = 0.0;
  // sup |v(x_1, rho) - v(-x_1, rho)|.
  double asymmetry = 0.0;
  // sup |v(x)| / (1 + |x|).
  double norm = 0.0;
  // Density on the outermost radial panel relative to its peak.
  double tail_ratio = 0.0;
};

/// sup over nodes with |x| <= 1 of e^{(2/(1+alpha)) (v + c_v)}.
double compute_v_star(std::span<const double> v, double c_v, double alpha, const AxisymGrid& grid);

struct AxisymStep {
  std::vector<double> v_bar;
  double c_v = 0.0;
  double v_star = 0.0;
};

/// One application of the tilted operator: potential of |y|^{n alpha} e^{-n|y|^2} e^{n(v + c_v)}
/// plus v* x_1 (omitted when tilt is false).
AxisymStep apply_T_axisym(std::span<const double> v, const ProblemParams& params, const AxisymOperator& op,
                          bool tilt = true);

AxisymField solve_axisym(const ProblemParams& params, const AxisymConfig& config);

// Both sides of the Pohozaev identity for the tilted weight
// K(y) = |y|^{n alpha} e^{-n |y|^2 + n v* y_1} carried by eta = v - v* x_1 + c_v:
//   Lambda (Lambda - 2 gamma_n) / gamma_n = 2 alpha Lambda - 4 int |y|^2 f + 2 v* int y_1 f.
struct TiltedPohozaev {
  double lambda = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double alpha_term = 0.0;
  double gaussian_term = 0.0;
  double tilt_term = 0.0;
  double residual = 0.0;
  double relative_residual = 0.0;
};

TiltedPohozaev tilted_pohozaev(const AxisymField& field);

}  // namespace qcurv
