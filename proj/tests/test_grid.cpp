#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qduality/errors.hpp"
#include "qduality/grid.hpp"
#include "test_support.hpp"

using namespace qduality;
using qtest::max_abs;
using qtest::max_abs_diff;
using qtest::sample;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
}  // namespace

TEST_CASE("grid: construction invariants") {
  const Grid p(64, 0.0, kTwoPi, Boundary::Periodic);
  CHECK(p.dx() == doctest::Approx(kTwoPi / 64));
  CHECK(p.x(63) < kTwoPi);
  const Grid v(65, -1.0, 1.0, Boundary::Vanishing);
  CHECK(v.dx() == doctest::Approx(2.0 / 64));
  CHECK(v.x(64) == doctest::Approx(1.0));
  CHECK_THROWS_AS(Grid(7, 0.0, 1.0, Boundary::Periodic), ConfigError);
  CHECK_THROWS_AS(Grid(16, 1.0, 1.0, Boundary::Periodic), ConfigError);
  CHECK_THROWS_AS(Grid(16, 2.0, 1.0, Boundary::Vanishing), ConfigError);
}

TEST_CASE("diff1/diff2: constant field has zero derivative") {
  for (Boundary b : {Boundary::Periodic, Boundary::Vanishing}) {
    const Grid g(32, -3.0, 3.0, b);
    const ComplexField f(g.size(), cplx{2.5, -1.0});
    for (DerivativeScheme s : {DerivativeScheme::Spectral, DerivativeScheme::CentralFD4}) {
      if (s == DerivativeScheme::Spectral && b == Boundary::Vanishing) continue;
      CHECK(max_abs(diff1(g, f, s)) < 1e-12);
      CHECK(max_abs(diff2(g, f, s)) < 1e-10);
    }
  }
}

TEST_CASE("spectral derivatives of Fourier modes are exact") {
  const Grid g(64, 0.0, kTwoPi, Boundary::Periodic);
  for (int k : {1, -3, 7, 20}) {
    const ComplexField f = sample(g, [k](double x) { return std::polar(1.0, k * x); });
    const ComplexField d1 = diff1(g, f, DerivativeScheme::Spectral);
    const ComplexField d2 = diff2(g, f, DerivativeScheme::Spectral);
    ComplexField e1(f.size()), e2(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      e1[i] = cplx{0.0, double(k)} * f[i];
      e2[i] = -double(k * k) * f[i];
    }
    CHECK(max_abs_diff(d1, e1) < 1e-12 * std::abs(k));
    CHECK(max_abs_diff(d2, e2) < 1e-12 * k * k);
  }
}

TEST_CASE("FD4 first derivative converges at fourth order") {
  auto error = [](std::size_t n) {
    const Grid g(n, 0.0, kTwoPi, Boundary::Periodic);
    const ComplexField f = sample(g, [](double x) { return cplx{std::sin(x), 0.0}; });
    const ComplexField exact = sample(g, [](double x) { return cplx{std::cos(x), 0.0}; });
    return max_abs_diff(diff1(g, f, DerivativeScheme::CentralFD4), exact);
  };
  const double e32 = error(32), e64 = error(64), e128 = error(128);
  MESSAGE("FD4 sin errors: " << e32 << " " << e64 << " " << e128);
  CHECK(e32 / e64 == doctest::Approx(16.0).epsilon(0.05));
  CHECK(e64 / e128 == doctest::Approx(16.0).epsilon(0.05));
  // C = err / dx^4 stays bounded (cos has unit fourth derivative; central stencil constant is 1/30)
  const double dx = kTwoPi / 64;
  CHECK(e64 / std::pow(dx, 4) < 1.0 / 30.0 * 1.05);
}

TEST_CASE("FD4 stencils including one-sided closures are exact for low-order polynomials") {
  const Grid g(33, -1.0, 2.0, Boundary::Vanishing);
  for (int p = 0; p <= 4; ++p) {
    const ComplexField f = sample(g, [p](double x) { return cplx{std::pow(x, p), 0.0}; });
    const ComplexField d1e = sample(g, [p](double x) { return cplx{p == 0 ? 0.0 : p * std::pow(x, p - 1), 0.0}; });
    const ComplexField d2e =
        sample(g, [p](double x) { return cplx{p < 2 ? 0.0 : p * (p - 1) * std::pow(x, p - 2), 0.0}; });
    CHECK(max_abs_diff(diff1(g, f, DerivativeScheme::CentralFD4), d1e) < 1e-10);
    CHECK(max_abs_diff(diff2(g, f, DerivativeScheme::CentralFD4), d2e) < 1e-8);
  }
}

TEST_CASE("diff2 of x^2 on a vanishing grid is 2") {
  const Grid g(41, -2.0, 2.0, Boundary::Vanishing);
  const ComplexField f = sample(g, [](double x) { return cplx{x * x, 0.0}; });
  const ComplexField d2 = diff2(g, f, DerivativeScheme::CentralFD4);
  for (const cplx& z : d2) CHECK(std::abs(z - 2.0) < 1e-9);
}

TEST_CASE("spectral diff1 composed with itself matches diff2") {
  auto compare = [](std::size_t n, auto&& fn) {
    const Grid g(n, 0.0, kTwoPi, Boundary::Periodic);
    const ComplexField f = sample(g, fn);
    const ComplexField dd = diff1(g, diff1(g, f, DerivativeScheme::Spectral), DerivativeScheme::Spectral);
    const ComplexField d2 = diff2(g, f, DerivativeScheme::Spectral);
    // vector 2-norms
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      diff += std::norm(dd[i] - d2[i]);
      norm += std::norm(f[i]);
    }
    return std::pair{std::sqrt(diff), std::sqrt(norm)};
  };
  SUBCASE("band-limited field, O(1) wavenumbers") {
    const auto [diff, norm] = compare(8, [](double x) {
      return std::polar(1.0, x) + 0.5 * std::polar(1.0, -2.0 * x) + cplx{0.25, 0.1} * std::polar(1.0, 3.0 * x);
    });
    MESSAGE("||D1 D1 f - D2 f|| = " << diff << ", 10 eps ||f|| = " << 10 * kEps * norm);
    CHECK(diff <= 10 * kEps * norm);
  }
  SUBCASE("smooth field on a finer grid: roundoff grows like k_max^2") {
    const std::size_t n = 64;
    const auto [diff, norm] = compare(n, [](double x) { return std::exp(cplx{std::sin(x), 0.5 * std::cos(2 * x)}); });
    const double kmax = n / 2.0;
    CHECK(diff <= 10 * kEps * norm * kmax * kmax / 16.0);
  }
}

TEST_CASE("integrate: exact and reference quadratures") {
  {
    const Grid g(33, 0.0, 1.0, Boundary::Vanishing);
    CHECK(g.quadrature_rule() == QuadratureRule::Simpson);
    const ComplexField one(g.size(), cplx{1.0, 0.0});
    CHECK(std::abs(integrate(g, one) - 1.0) < 1e-14);
    const Grid even(32, 0.0, 1.0, Boundary::Vanishing);
    CHECK(even.quadrature_rule() == QuadratureRule::Trapezoid);
    CHECK(even.quadrature_order() == 2);
    CHECK(std::abs(integrate(even, ComplexField(32, 1.0)) - 1.0) < 1e-14);
  }
  {
    const Grid g(32, 0.0, kTwoPi, Boundary::Periodic);
    const ComplexField f = sample(g, [](double x) { return cplx{std::sin(x) * std::sin(x), 0.0}; });
    CHECK(std::abs(integrate(g, f) - std::numbers::pi) < 1e-13);
  }
  {
    // reference: same integrand at 4x resolution
    auto gauss = [](std::size_t n) {
      const Grid g(n, -10.0, 10.0, Boundary::Vanishing);
      return integrate(g, sample(g, [](double x) { return cplx{std::exp(-x * x), 0.0}; })).real();
    };
    const double coarse = gauss(257), fine = gauss(1025);
    CHECK(std::abs(coarse - fine) < 1e-12);
    CHECK(std::abs(coarse - std::sqrt(std::numbers::pi)) < 1e-12);
  }
}

TEST_CASE("property: linearity of diff1") {
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    for (Boundary b : {Boundary::Periodic, Boundary::Vanishing}) {
      const Grid g(48, -5.0, 5.0, b);
      const auto s = default_scheme(g);
      ComplexField f(g.size()), h(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        f[i] = {nd(rng), nd(rng)};
        h[i] = {nd(rng), nd(rng)};
      }
      const cplx a{nd(rng), nd(rng)}, c{nd(rng), nd(rng)};
      ComplexField comb(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) comb[i] = a * f[i] + c * h[i];
      const ComplexField lhs = diff1(g, comb, s);
      const ComplexField df = diff1(g, f, s), dh = diff1(g, h, s);
      ComplexField rhs(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) rhs[i] = a * df[i] + c * dh[i];
      CHECK(max_abs_diff(lhs, rhs) < 1e-12 * (1.0 + max_abs(lhs)));
    }
  }
}

TEST_CASE("property: integration by parts") {
  std::mt19937 rng(5);
  SUBCASE("periodic spectral, random smooth fields") {
    const Grid g(128, -10.0, 10.0, Boundary::Periodic);
    for (int trial = 0; trial < 5; ++trial) {
      const ComplexField f = qtest::random_smooth_state(g, rng).values();
      const ComplexField h = qtest::random_smooth_state(g, rng).values();
      const ComplexField df = diff1(g, f, DerivativeScheme::Spectral), dh = diff1(g, h, DerivativeScheme::Spectral);
      ComplexField lhs(g.size()), rhs(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        lhs[i] = f[i] * dh[i];
        rhs[i] = -df[i] * h[i];
      }
      const cplx a = integrate(g, lhs), b = integrate(g, rhs);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
  SUBCASE("vanishing FD4, decayed fields") {
    auto mismatch = [](std::size_t n) {
      const Grid g(n, -12.0, 12.0, Boundary::Vanishing);
      const ComplexField f = sample(g, [](double x) { return std::exp(cplx{-x * x / 2, 1.5 * x}); });
      const ComplexField h = sample(g, [](double x) { return std::exp(cplx{-(x - 1) * (x - 1) / 3, -0.5 * x}); });
      const ComplexField df = diff1(g, f, DerivativeScheme::CentralFD4), dh = diff1(g, h, DerivativeScheme::CentralFD4);
      ComplexField s(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) s[i] = f[i] * dh[i] + df[i] * h[i];
      return std::abs(integrate(g, s));
    };
    const double e1 = mismatch(129), e2 = mismatch(257);
    MESSAGE("IBP mismatch FD4: " << e1 << " " << e2);
    // the interior central stencil is antisymmetric, so only closure rows and roundoff remain
    CHECK(e1 < 1e-12);
    CHECK(e2 < 1e-12);
  }
}

TEST_CASE("property: Fourier modes integrate to zero on periodic grids") {
  const Grid g(64, -3.0, 5.0, Boundary::Periodic);
  for (int k = 1; k < 64; ++k) {
    const ComplexField f = sample(g, [&](double x) { return std::polar(1.0, kTwoPi * k * (x - g.x_min()) / g.length()); });
    CHECK(std::abs(integrate(g, f)) < 1e-13);
  }
}

TEST_CASE("grid operations reject invalid input") {
  const Grid v(32, -1.0, 1.0, Boundary::Vanishing);
  const ComplexField f(32, 1.0);
  CHECK_THROWS_AS(diff1(v, f, DerivativeScheme::Spectral), ConfigError);
  CHECK_THROWS_AS(diff2(v, f, DerivativeScheme::Spectral), ConfigError);
  CHECK_THROWS_AS(diff1(v, ComplexField(31, 1.0), DerivativeScheme::CentralFD4), ShapeError);
  CHECK_THROWS_AS(integrate(v, ComplexField(33, 1.0)), ShapeError);
}

TEST_CASE("boundary-decay guard warns for undecayed fields on vanishing grids") {
  qtest::WarningCapture capture;
  const Grid v(65, -4.0, 4.0, Boundary::Vanishing);
  const ComplexField wide = sample(v, [](double x) { return cplx{std::exp(-x * x / 8), 0.0}; });
  const ComplexField narrow = sample(v, [](double x) { return cplx{std::exp(-x * x * 4), 0.0}; });
  CHECK_FALSE(check_boundary_decay(v, wide, "test"));
  CHECK(check_boundary_decay(v, narrow, "test"));
  CHECK(capture.messages.size() == 1);
  const Grid p(64, -4.0, 4.0, Boundary::Periodic);
  CHECK(check_boundary_decay(p, ComplexField(64, 1.0), "test"));
}
