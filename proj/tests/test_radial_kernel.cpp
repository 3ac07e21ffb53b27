#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "qcurv/errors.hpp"
#include "qcurv/gauss.hpp"
#include "qcurv/kernel_cache.hpp"
#include "qcurv/radial_kernel.hpp"

using namespace qcurv;
constexpr double pi = std::numbers::pi;

namespace {

// ((a+b)^2 (2 log(a+b) - 1) - (a-b)^2 (2 log|a-b| - 1)) / (8ab)
double s3_closed(double a, double b) {
  const double p = a + b;
  const double m = std::abs(a - b);
  const double tm = m > 0.0 ? m * m * (2.0 * std::log(m) - 1.0) : 0.0;
  return (p * p * (2.0 * std::log(p) - 1.0) - tm) / (8.0 * a * b);
}

// Brute-force theta average with the singular point split off.
double s_theta(double a, double b, int n) {
  const GaussRule base = gauss_legendre(16);
  const GaussRule g = graded_rule(0.0, pi, 0.0, 30, base);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double t = g.nodes[i];
    const double w = g.weights[i] * std::pow(std::sin(t), n - 2);
    const double h = std::sin(0.5 * t);
    num += w * 0.5 * std::log((a - b) * (a - b) + 4.0 * a * b * h * h);
    den += w;
  }
  return num / den;
}

std::vector<double> lattice() {
  std::vector<double> v;
  for (int i = 0; i < 20; ++i) v.push_back(0.1 * std::pow(100.0, i / 19.0));
  return v;
}

}  // namespace

TEST_CASE("angular_log_mean examples") {
  CHECK(angular_log_mean(1.0, 0.0, 3) == 0.0);
  CHECK(angular_log_mean(2.5, 0.0, 5) == doctest::Approx(std::log(2.5)).epsilon(1e-15));
  CHECK(angular_log_mean(2.0, 1.0, 2) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(angular_log_mean(2.0, 1.0, 3) == doctest::Approx((9.0 * (2.0 * std::log(3.0) - 1.0) + 1.0) / 16.0).epsilon(1e-14));
  CHECK(angular_log_mean(2.0, 1.0, 3) == doctest::Approx(0.73593).epsilon(1e-5));
  CHECK_THROWS_AS(angular_log_mean(0.0, 0.0, 3), DomainError);
  CHECK_THROWS_AS(angular_log_mean(-1.0, 1.0, 3), DomainError);
}

TEST_CASE("S_2 is log max on the lattice, including near the diagonal") {
  double err = 0.0;
  for (double a : lattice())
    for (double b : lattice()) err = std::max(err, std::abs(angular_log_mean(a, b, 2) - std::log(std::max(a, b))));
  for (double ratio = 0.9; ratio <= 1.1; ratio += 0.0125)
    err = std::max(err, std::abs(angular_log_mean(3.0 * ratio, 3.0, 2) - std::log(3.0 * std::max(ratio, 1.0))));
  CHECK(err < 1e-8);
}

TEST_CASE("S_3 matches its antiderivative on the lattice") {
  double err = 0.0;
  for (double a : lattice())
    for (double b : lattice()) err = std::max(err, std::abs(angular_log_mean(a, b, 3) - s3_closed(a, b)));
  CHECK(err < 1e-8);
  CHECK(angular_log_mean(1.0, 1.0, 3) == doctest::Approx(s3_closed(1.0, 1.0)).epsilon(1e-14));
}

TEST_CASE("higher dimensions agree with a theta quadrature") {
  for (int n : {3, 4, 5, 6, 7}) {
    for (auto [a, b] : {std::pair{1.0, 0.3}, {1.0, 0.6}, {1.0, 0.95}, {1.0, 1.0}, {0.7, 2.0}}) {
      CAPTURE(n);
      CAPTURE(a);
      CAPTURE(b);
      CHECK(angular_log_mean(a, b, n) == doctest::Approx(s_theta(a, b, n)).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("symmetry and homogeneity") {
  for (int n : {2, 3, 4, 5}) {
    for (double a : {0.2, 1.0, 3.7}) {
      for (double b : {0.1, 0.99, 2.0}) {
        CHECK(std::abs(angular_log_mean(a, b, n) - angular_log_mean(b, a, n)) < 1e-12);
        for (double l : {0.5, 2.0, 10.0})
          CHECK(std::abs(angular_log_mean(l * a, l * b, n) - std::log(l) - angular_log_mean(a, b, n)) < 1e-10);
      }
    }
  }
}

TEST_CASE("offset form") {
  CHECK(angular_log_offset(0.0, 4) == 0.0);
  CHECK(angular_log_offset(0.5, 3) == doctest::Approx(angular_log_mean(1.0, 0.5, 3)));
  CHECK_THROWS_AS(angular_log_offset(1.5, 3), DomainError);
  CHECK_THROWS_AS(angular_log_offset(0.5, 1), DomainError);
}

TEST_CASE("kernel potential of a Gaussian against an independent quadrature") {
  const int n = 3;
  const ProblemParams p(n, 0.0, 1.0);
  const RadialGrid grid = build_radial_grid(p, 256, 8.0);
  std::vector<double> f(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) f[j] = std::exp(-grid.nodes[j] * grid.nodes[j]);
  const std::vector<double> targets{0.0, 0.05, 0.5, 1.0, grid.nodes[100], 2.5, 6.0};
  for (auto variant : {KernelVariant::plain, KernelVariant::shifted}) {
    const KernelMatrix k = assemble_kernel_matrix(grid, targets, n, variant);
    const std::vector<double> pot = apply_potential(k, f);
    const GaussRule base = gauss_legendre(20);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const double s = targets[i];
      double ref = 0.0;
      auto piece = [&](double lo, double hi, double focus) {
        const GaussRule g = graded_rule(lo, hi, focus, 30, base);
        for (std::size_t q = 0; q < g.size(); ++q) {
          const double r = g.nodes[q];
          const double shift = variant == KernelVariant::shifted ? std::log1p(r) : 0.0;
          const double mean = s == 0.0 ? std::log(r) : s3_closed(s, r);
          ref += g.weights[q] * (shift - mean) * std::exp(-r * r) * r * r;
        }
      };
      if (s > 0.0) {
        piece(0.0, s, s);
        piece(s, 8.0, s);
      } else {
        piece(0.0, 8.0, 0.0);
      }
      ref *= sphere_area(n - 1) / gamma_n(n);
      CAPTURE(s);
      CHECK(pot[i] == doctest::Approx(ref).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("plain-kernel potential of a nonnegative density is non-increasing") {
  for (int n : {3, 4}) {
    const ProblemParams p(n, -0.5, 1.0);
    const RadialGrid grid = build_radial_grid(p, 256, 7.0);
    const KernelMatrix k = assemble_kernel_matrix(grid, grid.nodes, n, KernelVariant::plain);
    std::vector<double> f(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
      f[j] = std::pow(grid.nodes[j], -0.5 * n) * std::exp(-n * grid.nodes[j] * grid.nodes[j]) *
             (1.0 + std::sin(3.0 * grid.nodes[j]) * std::sin(3.0 * grid.nodes[j]));
    const std::vector<double> v = apply_potential(k, f);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] <= v[i - 1] + 1e-10);
  }
}

TEST_CASE("apply_potential is linear and checks dimensions") {
  const RadialGrid grid = build_radial_grid(ProblemParams(3, 0.0, 1.0), 64, 6.0);
  const KernelMatrix k = assemble_kernel_matrix(grid, grid.nodes, 3, KernelVariant::shifted);
  std::vector<double> f(grid.size()), g(grid.size()), fg(grid.size()), zero(grid.size(), 0.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    f[j] = std::exp(-grid.nodes[j]);
    g[j] = 1.0 / (1.0 + grid.nodes[j] * grid.nodes[j] * grid.nodes[j] * grid.nodes[j]);
    fg[j] = f[j] + g[j];
  }
  const auto a = apply_potential(k, f);
  const auto b = apply_potential(k, g);
  const auto c = apply_potential(k, fg);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(c[i] - a[i] - b[i]) < 1e-13 * (1.0 + std::abs(c[i])));
  for (double z : apply_potential(k, zero)) CHECK(z == 0.0);
  CHECK_THROWS_AS(apply_potential(k, std::span<const double>(f.data(), 5)), UsageError);
  const std::vector<double> bad{-1.0};
  CHECK_THROWS_AS(assemble_kernel_matrix(grid, bad, 3, KernelVariant::plain), DomainError);
}

TEST_CASE("a one-node mass gives the log profile away from the node") {
  const int n = 3;
  const RadialGrid grid = build_radial_grid(ProblemParams(n, 0.0, 1.0), 256, 8.0);
  std::size_t j = 0;
  while (grid.nodes[j] < 1.0) ++j;
  const double rj = grid.nodes[j];
  std::vector<double> f(grid.size(), 0.0);
  f[j] = gamma_n(n) / (sphere_area(n - 1) * std::pow(rj, n - 1) * grid.weights[j]);
  const std::vector<double> targets{0.01, 0.2, 4.0, 7.5};
  const auto pot = apply_potential(assemble_kernel_matrix(grid, targets, n, KernelVariant::shifted), f);
  for (std::size_t i = 0; i < targets.size(); ++i)
    CHECK(pot[i] == doctest::Approx(std::log1p(rj) - angular_log_mean(targets[i], rj, n)).epsilon(1e-12));
  // Far from the node the spherical mean is log s.
  CHECK(std::abs(pot[3] - std::log((1.0 + rj) / 7.5)) < 0.01);
}

TEST_CASE("doubling the grid shifts the kernel by log 2") {
  const int n = 4;
  const RadialGrid grid = build_radial_grid(ProblemParams(n, 0.0, 1.0), 128, 6.0);
  const RadialGrid big = grid.rescaled(0.5);
  const KernelMatrix a = assemble_kernel_matrix(grid, grid.nodes, n, KernelVariant::plain);
  const KernelMatrix b = assemble_kernel_matrix(big, big.nodes, n, KernelVariant::plain);
  const auto measure = radial_measure(grid, n);
  const double scale = std::pow(2.0, n);
  double err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      const double expect = scale * (a.entries(ii, jj) - std::log(2.0) / gamma_n(n) * measure[j]);
      err = std::max(err, std::abs(b.entries(ii, jj) - expect) / (std::abs(expect) + measure[j] * scale));
    }
  CHECK(err < 1e-10);
}

TEST_CASE("kernel cache reuses and persists matrices") {
  const auto dir = std::filesystem::temp_directory_path() / "qcurv_test_kernel_cache";
  std::filesystem::remove_all(dir);
  const RadialGrid grid = build_radial_grid(ProblemParams(3, 0.0, 1.0), 64, 6.0);
  std::shared_ptr<const KernelMatrix> first;
  {
    KernelCache cache(dir);
    first = cache.get(grid, grid.nodes, 3, KernelVariant::plain);
    auto again = cache.get(grid, grid.nodes, 3, KernelVariant::plain);
    CHECK(cache.assembled() == 1);
    CHECK(cache.hits() == 1);
    CHECK(again.get() == first.get());
    cache.get(grid, grid.nodes, 3, KernelVariant::shifted);
    CHECK(cache.assembled() == 2);
  }
  KernelCache reopened(dir);
  auto loaded = reopened.get(grid, grid.nodes, 3, KernelVariant::plain);
  CHECK(reopened.assembled() == 0);
  CHECK(reopened.hits() == 1);
  CHECK(loaded->entries == first->entries);
  CHECK(loaded->key == first->key);
  CHECK(loaded->variant == KernelVariant::plain);

  const auto file = dir / "roundtrip.bin";
  KernelCache::save(file, *first);
  const KernelMatrix back = KernelCache::load(file);
  CHECK(back.entries == first->entries);
  CHECK(back.n == 3);
  std::filesystem::remove_all(dir);
}
