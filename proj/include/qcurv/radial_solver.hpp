#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcurv/core.hpp"
#include "qcurv/interpolation.hpp"
#include "qcurv/kernel_cache.hpp"
#include "qcurv/quadrature.hpp"
#include "qcurv/radial_kernel.hpp"

namespace qcurv {

struct TraceRecord {
  std::size_t iteration = 0;
  double residual = 0.0;
  double c_v = 0.0;
  double w0 = 0.0;
  double damping = 0.0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct SolverConfig {
  double damping = 0.5;
  double min_damping = 1.0 / 1024.0;
  double tol = 1e-8;
  std::size_t max_iter = 50000;
  // Starting iterate on the grid nodes; empty means v = 0.
  std::vector<double> initial_v;
  // Absolute ceiling on w(0) = v(0) + c_v.
  double blowup_ceiling = 40.0;
  // Also declare blow-up once the concentration radius e^{-w(0)/(1+alpha)}
  // drops below the grid's resolution radius.
  bool resolution_guard = true;
  TraceSink trace;
};

enum class SolveStatus { converged, max_iterations, blowup };

const char* to_string(SolveStatus s);

struct RadialSolution {
  ProblemParams params;
  RadialGrid grid;
  std::vector<double> v;
  // Potential at the origin, evaluated from the fixed-point relation.
  double v_origin = 0.0;
  double c_v = 0.0;
  // u = v - (mu/n) r^2 + c_v, which solves (-Delta)^{n/2} u = |x|^{n alpha} e^{n u}.
  std::vector<double> u;
  // |r|^{n alpha} e^{-mu r^2} e^{n (v + c_v)}.
  std::vector<double> density;
  double residual_sup = 0.0;
  double update_sup = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::max_iterations;
  double damping = 0.0;

  double w0() const noexcept { return v_origin + c_v; }
};

// The map T_Lambda of the Gaussian ansatz on one grid: normalisation c_v plus
// the plain-kernel potential of |y|^{n alpha} e^{-mu |y|^2} e^{n (v + c_v)}.
class RadialOperator {
 public:
  RadialOperator(const ProblemParams& params, const RadialGrid& grid, KernelCache* cache = nullptr);

  struct Result {
    std::vector<double> v_bar;
    double v_bar_origin = 0.0;
    double c_v = 0.0;
  };

  double normalize(std::span<const double> v) const;
  Result apply(std::span<const double> v) const;
  std::vector<double> density(std::span<const double> v, double c_v) const;

  const ProblemParams& params() const noexcept { return params_; }
  const RadialGrid& grid() const noexcept { return grid_; }
  const KernelMatrix& kernel() const noexcept { return *kernel_; }

 private:
  ProblemParams params_;
  RadialGrid grid_;
  std::shared_ptr<const KernelMatrix> kernel_;
  std::shared_ptr<const KernelMatrix> origin_;
  std::vector<double> log_mass_;  // log(measure_i) + n alpha log r_i - mu r_i^2
};

/// c_v = (1/n) log(Lambda / I(v)), I(v) = int |y|^{n alpha} e^{-mu |y|^2} e^{n v} dy.
/// Throws BlowupSignal if I(v) leaves double range, DomainError if I(v) = 0.
double normalize_c(std::span<const double> v, const ProblemParams& params, const RadialGrid& grid);

/// One application of T_Lambda; `kernel` must be the plain variant with targets on the nodes.
std::vector<double> apply_T(std::span<const double> v, const ProblemParams& params, const RadialGrid& grid,
                            const KernelMatrix& kernel);

RadialSolution solve_fixed_point(const ProblemParams& params, const RadialGrid& grid, const SolverConfig& config,
                                 KernelCache* cache = nullptr);

struct SweepStep {
  double lambda = 0.0;
  std::optional<RadialSolution> solution;
  std::string error;

  bool converged() const { return solution && solution->converged; }
};

/// Sequential solves along an increasing Lambda list below Lambda_1 (1 + alpha),
/// each warm-started from the previous converged profile.
std::vector<SweepStep> continuation_sweep(const ProblemParams& base, std::span<const double> lambdas,
                                          const RadialGrid& grid, const SolverConfig& config,
                                          KernelCache* cache = nullptr);

// eta(x) = w(r_k x) - w(0) with r_k^{1+alpha} = e^{-w(0)}, w = v + c_v.
struct BlowupProfile {
  int n = 0;
  double alpha = 0.0;
  double r_k = 0.0;
  double source_peak = 0.0;
  // The source grid divided by r_k; eta is exact on its nodes.
  RadialGrid grid;
  std::vector<double> eta;

  double operator()(double x) const { return interp_ ? (*interp_)(x) : 0.0; }
  std::vector<double> sample(std::span<const double> xs) const;

  void build_interpolant();

 private:
  std::shared_ptr<const MonotoneCubic> interp_;
};

BlowupProfile rescale_blowup(const RadialSolution& solution);

struct NormalExtractionOptions {
  // Smallest peak w(0) accepted as a blow-up step.
  double min_peak = 2.0;
  // Normality residual is taken over rescaled nodes in (0, test_radius].
  double test_radius = 5.0;
};

struct NormalProfile {
  BlowupProfile profile;
  double lambda_source = 0.0;
  // int |x|^{n alpha} e^{n eta} dx.
  double total_curvature = 0.0;
  // Least-squares constant c of the normal equation.
  double c = 0.0;
  double normality_residual = 0.0;
  std::vector<double> test_radii;
  std::vector<double> residuals;
};

/// Normal-solution residual of a radial profile sampled on `grid`:
/// sup_s |eta(s) - (1/gamma_n) int log((1+|y|)/|s-y|) |y|^{n alpha} e^{n eta} dy - c|
/// over nodes s <= test_radius, with c fitted by least squares.
struct NormalityFit {
  double c = 0.0;
  double residual = 0.0;
  std::vector<double> radii;
  std::vector<double> errors;
};
NormalityFit normality_fit(std::span<const double> eta, std::span<const double> density, const RadialGrid& grid,
                           int n, double test_radius);

NormalProfile extract_normal_solution(std::span<const SweepStep> sweep, const NormalExtractionOptions& options = {});

}  // namespace qcurv
