#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qcurv/diagnostics.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/oracle2d.hpp"

using namespace qcurv;
constexpr double pi = std::numbers::pi;

TEST_CASE("WeightSpec validation") {
  CHECK_NOTHROW(WeightSpec(0.0, 0.0));
  CHECK_THROWS_AS(WeightSpec(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(WeightSpec(0.0, -0.1), DomainError);
  CHECK(WeightSpec(0.5, 3.0).description() == "|y|^(n*0.5) * exp(-3*|y|^2)");
}

TEST_CASE("Pohozaev identity on the explicit two-dimensional profiles") {
  {
    const OracleProfile prof = oracle_profile(ExplicitSolution2D(0.0), 512);
    const PohozaevResult p = pohozaev_residual(prof.u, WeightSpec(0.0, 0.0), 2, prof.grid);
    CHECK(p.lambda == doctest::Approx(4.0 * pi).epsilon(1e-9));
    CHECK(std::abs(p.lhs) < 1e-7);
    CHECK(p.rhs == 0.0);
    CHECK(p.mu_term == 0.0);
  }
  {
    const OracleProfile prof = oracle_profile(ExplicitSolution2D(1.0), 512);
    const PohozaevResult p = pohozaev_residual(prof.u, WeightSpec(1.0, 0.0), 2, prof.grid);
    CHECK(p.lambda == doctest::Approx(8.0 * pi).epsilon(1e-9));
    CHECK(p.rhs == doctest::Approx(16.0 * pi).epsilon(1e-9));
    CHECK(p.lhs == doctest::Approx(16.0 * pi).epsilon(1e-6));
    CHECK(p.residual < 1e-5);
  }
}

TEST_CASE("pohozaev_residual rejects an unsettled tail") {
  const RadialGrid g = build_radial_grid(ProblemParams(3, 0.0, 1.0), 64, 6.0);
  const std::vector<double> flat(g.size(), 0.0);
  CHECK_THROWS_AS(pohozaev_residual(flat, WeightSpec(0.0, 0.0), 3, g), DiagnosticError);
  CHECK_THROWS_AS(pohozaev_residual(std::span<const double>(flat.data(), 3), WeightSpec(0.0, 0.0), 3, g), UsageError);
}

TEST_CASE("log_slope") {
  const RadialGrid g = build_radial_grid(ProblemParams(3, 0.0, 1.0), 256, 20.0);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = -3.0 * std::log(g.nodes[i]);
  CHECK(log_slope(v, g, 2.0, 10.0) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(log_slope(v, g) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK_THROWS_AS(log_slope(v, g, 2.0, 30.0), UsageError);
  CHECK_THROWS_AS(log_slope(v, g, 0.0, 1.0), UsageError);
  CHECK_THROWS_AS(log_slope(v, g, 5.0, 5.001), UsageError);

  const ExplicitSolution2D sol(0.0);
  const OracleProfile prof = oracle_profile(sol, 512);
  CHECK(log_slope(prof.u, prof.grid, 10.0, 50.0) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("lower_bound_check") {
  const RadialGrid g = build_radial_grid(ProblemParams(3, 0.0, 1.0), 256, 20.0);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = -2.0 * std::log(g.nodes[i]);
  CHECK(lower_bound_check(v, g, 2.0) == 0);
  CHECK(lower_bound_check(v, g, 2.0, 1e-12) == 0);
  v[200] -= 1.0;
  CHECK(lower_bound_check(v, g, 2.0) == 1);
  // Nodes inside the unit ball are not checked.
  v[3] -= 100.0;
  CHECK(lower_bound_check(v, g, 2.0) == 1);

  // Explicit bubble: the normal potential stays above -beta log r.
  const OracleProfile prof = oracle_profile(ExplicitSolution2D(0.0), 512);
  const KernelMatrix k = assemble_kernel_matrix(prof.grid, prof.grid.nodes, 2, KernelVariant::plain);
  const auto plain = apply_potential(k, prof.density);
  const auto normal = shifted_potential(plain, prof.density, prof.grid, 2);
  CHECK(lower_bound_check(normal, prof.grid, 2.0) == 0);
}

TEST_CASE("diagnostics of converged Gaussian-ansatz solutions") {
  for (auto [n, alpha, frac] : {std::tuple{3, 0.0, 0.5}, {3, -0.5, 0.9}, {4, 0.5, 0.9}}) {
    const ProblemParams p(n, alpha, frac * critical_lambda(n, alpha));
    const RadialSolution s = solve_fixed_point(p, build_radial_grid(p, GridSpec{256}), SolverConfig{});
    REQUIRE(s.converged);
    const DiagnosticsReport d = diagnose_radial(s);
    CAPTURE(n);
    CAPTURE(alpha);
    CHECK(d.lambda_measured == doctest::Approx(p.lambda()).epsilon(1e-12));
    CHECK(d.beta_expected == doctest::Approx(p.lambda() / gamma_n(n)));
    CHECK(d.window_density_ratio < 1e-10);
    CHECK(d.beta_estimate == doctest::Approx(d.beta_expected).epsilon(0.05));
    CHECK(d.lower_bound_violations == 0);
    CHECK(d.pohozaev_relative < 1e-3);
    CHECK(d.pohozaev_residual < 1e-3 * p.lambda() * p.lambda());
    CHECK(d.pohozaev_mu_term > 0.0);
    CHECK(d.pohozaev_lhs - 2.0 * alpha * d.lambda_measured < 0.0);
    CHECK(d.fit_hi == doctest::Approx(0.8 * s.grid.r_max));
  }
}

TEST_CASE("threshold scan brackets the critical value") {
  SolverConfig cfg;
  cfg.max_iter = 4000;
  for (double alpha : {0.0, -0.5}) {
    const ProblemParams p(3, alpha, 1.0);
    const std::vector<double> fr{0.95, 1.05};
    const ThresholdScan scan = threshold_scan(p, fr, build_radial_grid(p, GridSpec{256}), cfg);
    CAPTURE(alpha);
    REQUIRE(scan.rows.size() == 2);
    CHECK(scan.threshold == doctest::Approx(critical_lambda(3, alpha)));
    CHECK(scan.rows[0].converged);
    CHECK(scan.rows[0].status == "ok");
    CHECK_FALSE(scan.rows[1].converged);
    CHECK(scan.consistent);
    CHECK_FALSE(scan.beyond_proposition);
    REQUIRE(scan.last_converged);
    REQUIRE(scan.first_failed);
    CHECK(*scan.last_converged < scan.threshold);
    CHECK(*scan.first_failed > scan.threshold);
  }
  const ProblemParams p2(2, 0.0, 1.0);
  const std::vector<double> one{0.5};
  const ThresholdScan scan2 = threshold_scan(p2, one, build_radial_grid(p2, GridSpec{128}), cfg);
  CHECK(scan2.beyond_proposition);
  CHECK(scan2.consistent);
}
