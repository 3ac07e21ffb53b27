#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qcurv/diagnostics.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/oracle2d.hpp"

using namespace qcurv;
constexpr double pi = std::numbers::pi;

TEST_CASE("eval_u examples") {
  const ExplicitSolution2D bubble(0.0);
  CHECK(eval_u(bubble, 0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(eval_u(bubble, 0.6, 0.8) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(eval_u_radial(bubble, 1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));

  const ExplicitSolution2D shifted(1.0, 1.0, {1.0, 0.0});
  CHECK(eval_u(shifted, 1.0, 0.0) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(eval_u(shifted, -1.0, 0.0) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(eval_u(shifted, 0.0, 1.0) == doctest::Approx(std::log(4.0 / 5.0)).epsilon(1e-15));
  CHECK_THROWS_AS(eval_u_radial(shifted, 1.0), PreconditionError);

  CHECK_THROWS_AS(ExplicitSolution2D(-1.0), DomainError);
  CHECK_THROWS_AS(ExplicitSolution2D(0.0, 0.0), DomainError);
  CHECK_THROWS_AS(ExplicitSolution2D(0.5, 1.0, {1.0, 0.0}), DomainError);
  CHECK_NOTHROW(ExplicitSolution2D(2.0, 1.0, {0.0, 1.0}));
}

TEST_CASE("scaling closes the family") {
  for (double alpha : {-0.5, 0.0, 0.5, 1.0}) {
    const ExplicitSolution2D one(alpha);
    for (double lam : {0.25, 3.0}) {
      const ExplicitSolution2D scaled(alpha, lam);
      const double s = std::pow(lam, 1.0 / (1.0 + alpha));
      for (double r : {0.01, 0.3, 1.0, 2.5, 40.0})
        CHECK(std::abs(eval_u_radial(scaled, r) - (eval_u_radial(one, s * r) + std::log(lam))) < 1e-12);
    }
  }
}

TEST_CASE("total curvature of the explicit family") {
  for (double alpha : {0.0, 0.5, 1.0}) {
    const CurvatureResult c = total_curvature(ExplicitSolution2D(alpha));
    CHECK(std::abs(c.value - 4.0 * pi * (1.0 + alpha)) < 1e-6);
    CHECK(c.disagreement <= 1e-6);
  }
  CHECK(std::abs(total_curvature(ExplicitSolution2D(0.0, 7.0)).value - 4.0 * pi) < 1e-6);
  const CurvatureResult z = total_curvature(ExplicitSolution2D(1.0, 1.0, {2.0, 0.0}));
  CHECK(std::abs(z.value - 8.0 * pi) < 1e-4);
}

TEST_CASE("unresolved peak is reported") {
  Oracle2DGridSpec coarse;
  coarse.radial_nodes = 64;
  coarse.angular_nodes = 16;
  CHECK_THROWS_AS(total_curvature(ExplicitSolution2D(1.0, 50.0, {2.0, 0.0}), coarse), DiagnosticError);
}

TEST_CASE("oracle grid and profile") {
  const ExplicitSolution2D sol(0.5, 4.0);
  const double tail = 1e-12;
  const double r_max = oracle_r_max(sol, tail);
  // Curvature outside r_max is 4 pi (1+alpha) / (1 + lambda^2 r_max^{2(1+alpha)}).
  CHECK(1.0 / (1.0 + 16.0 * std::pow(r_max, 3.0)) == doctest::Approx(tail).epsilon(1e-6));
  const OracleProfile p = oracle_profile(sol, 256);
  CHECK(p.grid.size() == 256);
  CHECK(p.grid.r_max == doctest::Approx(r_max).epsilon(1e-12));
  for (std::size_t i = 0; i < p.grid.size(); i += 17) {
    CHECK(p.u[i] == eval_u_radial(sol, p.grid.nodes[i]));
    CHECK(p.density[i] == doctest::Approx(std::pow(p.grid.nodes[i], 1.0) * std::exp(2.0 * p.u[i])));
  }
  CHECK_THROWS_AS(oracle_profile(ExplicitSolution2D(1.0, 1.0, {1.0, 0.0}), 64), PreconditionError);
}

TEST_CASE("explicit solutions are normal") {
  for (double alpha : {0.0, 0.5}) {
    const NormalityFit fit = normality_residual_2d(ExplicitSolution2D(alpha), 512);
    CAPTURE(alpha);
    CHECK(fit.residual < 1e-4);
    CHECK(fit.radii.back() <= 5.0);
    const double coarse = normality_residual_2d(ExplicitSolution2D(alpha), 128).residual;
    const double fine = normality_residual_2d(ExplicitSolution2D(alpha), 256).residual;
    CHECK(fine * 4.0 <= coarse);
  }
}

TEST_CASE("decay rate of the explicit family") {
  for (double alpha : {0.0, 0.5, 1.0}) {
    const OracleProfile p = oracle_profile(ExplicitSolution2D(alpha), 512);
    const double beta = log_slope(p.u, p.grid, 10.0, 50.0);
    CHECK(beta == doctest::Approx(2.0 * (1.0 + alpha)).epsilon(0.01));
    CHECK(2.0 * (1.0 + alpha) == doctest::Approx(4.0 * pi * (1.0 + alpha) / gamma_n(2)));
  }
}
