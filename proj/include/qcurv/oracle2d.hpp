#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qcurv/quadrature.hpp"
#include "qcurv/radial_solver.hpp"

namespace qcurv {

// u(z) = log(2 (alpha+1) lambda / (1 + lambda^2 |z^{alpha+1} - zeta|^2)), a solution of
// -Delta u = |x|^{2 alpha} e^{2u} on R^2 with total curvature 4 pi (1 + alpha).
struct ExplicitSolution2D {
  double alpha = 0.0;
  double lambda_scale = 1.0;
  std::complex<double> zeta{0.0, 0.0};

  ExplicitSolution2D(double alpha, double lambda_scale = 1.0, std::complex<double> zeta = {});

  bool radial() const noexcept { return zeta == std::complex<double>{}; }
};

double eval_u(const ExplicitSolution2D& sol, double x1, double x2);

/// Radial member (zeta = 0) at radius r.
double eval_u_radial(const ExplicitSolution2D& sol, double r);

/// Radius beyond which the total curvature left outside is below `tail` relative.
double oracle_r_max(const ExplicitSolution2D& sol, double tail = 1e-12);

/// Radial grid on (0, oracle_r_max] adapted to the peak width of the family member.
RadialGrid oracle_grid(const ExplicitSolution2D& sol, std::size_t m);

struct Oracle2DGridSpec {
  std::size_t radial_nodes = 512;
  // Trapezoid nodes in the angle; only used when zeta != 0.
  std::size_t angular_nodes = 256;
  // Relative disagreement between the grid and its half-resolution version that
  // is reported as an unresolved peak.
  double refinement_tol = 1e-6;
};

struct CurvatureResult {
  double value = 0.0;
  double coarse = 0.0;
  double disagreement = 0.0;
};

/// int |x|^{2 alpha} e^{2u} dx; DiagnosticError when the coarse and full grids disagree.
CurvatureResult total_curvature(const ExplicitSolution2D& sol, const Oracle2DGridSpec& spec = {});

struct OracleProfile {
  RadialGrid grid;
  std::vector<double> u;
  std::vector<double> density;
};

OracleProfile oracle_profile(const ExplicitSolution2D& sol, std::size_t m);

/// sup over nodes s <= test_radius of |u(s) - (1/gamma_2) int log((1+|y|)/|s-y|) f(y) dy - c|.
NormalityFit normality_residual_2d(const ExplicitSolution2D& sol, std::size_t m, double test_radius = 5.0);

}  // namespace qcurv
