#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "fbh/specfun.hpp"

using namespace fbh;
using std::numbers::pi;

namespace {

// Plain double power series for J_0, independent of the library evaluator.
double j0_series(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= -(x * x / 4.0) / (static_cast<double>(k) * k);
    sum += term;
  }
  return sum;
}

double bisect(double (*f)(double), double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_SUITE("specfun") {
  TEST_CASE("order restriction") {
    CHECK_THROWS_AS(Order(-0.5), DomainError);
    CHECK_THROWS_AS(Order(-1.0), DomainError);
    CHECK_THROWS_AS(Order(std::nan("")), DomainError);
    CHECK(Order(-0.49).value() == doctest::Approx(-0.49));
    CHECK(Order(2.0).half_shift() == doctest::Approx(2.5));
  }

  TEST_CASE("bessel_j half-integer closed form") {
    CHECK(specfun::bessel_j(0.5, pi / 2) == doctest::Approx(2.0 / pi).epsilon(1e-14));
    CHECK(std::fabs(specfun::bessel_j(0.5, pi)) < 1e-15);
    for (double x = 0.01; x < 300.0; x *= 1.07) {
      const double exact = std::sqrt(2.0 / (pi * x)) * std::sin(x);
      CHECK(std::fabs(specfun::bessel_j(0.5, x) - exact) < 1e-12);
    }
  }

  TEST_CASE("bessel_j agrees with Boost.Math across both regimes") {
    for (double nu : {-0.4, 0.0, 0.3, 1.0, 2.5, 4.0, 4.5, 6.0}) {
      for (double x = 0.0; x < 120.0; x += 0.37) {
        if (x == 0.0 && nu < 0.0) continue;
        const double ref = x == 0.0 ? (nu == 0.0 ? 1.0 : 0.0) : boost::math::cyl_bessel_j(nu, x);
        CAPTURE(nu);
        CAPTURE(x);
        CHECK(std::fabs(specfun::bessel_j(nu, x) - ref) < 2e-13);
      }
    }
  }

  TEST_CASE("bessel_j rejects bad arguments") {
    CHECK_THROWS_AS(specfun::bessel_j(0.0, -1.0), DomainError);
    CHECK_THROWS_AS(specfun::bessel_j(0.0, std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(specfun::bessel_j(0.0, std::nan("")), DomainError);
  }

  TEST_CASE("ratio derivative") {
    const Order half(0.5);
    CHECK(specfun::bessel_j_ratio_derivative(half, pi) ==
          doctest::Approx(-std::pow(pi, -0.5) * std::sqrt(2.0) / pi).epsilon(1e-13));
    const Order zero(0.0);
    const double l1 = 2.404825557695773;
    CHECK(specfun::bessel_j_ratio_derivative(zero, l1) == doctest::Approx(-0.519147).epsilon(1e-6));
    const double h = 1e-6;
    const double fd = (specfun::bessel_j(0.0, l1 + h) - specfun::bessel_j(0.0, l1 - h)) / (2 * h);
    CHECK(std::fabs(fd - specfun::bessel_j_ratio_derivative(zero, l1)) < 1e-6);
    CHECK(std::fabs(specfun::bessel_j_ratio_derivative(Order(2.0), 1e-6)) < 1e-6);
    CHECK_THROWS_AS(specfun::bessel_j_ratio_derivative(zero, 0.0), DomainError);
  }

  TEST_CASE("ratio derivative matches central differences on [0.1, 20]") {
    for (double nu : {0.0, 0.5, 1.3, 3.0}) {
      const Order o(nu);
      auto g = [nu](double x) { return std::pow(x, -nu) * specfun::bessel_j(nu, x); };
      for (double x = 0.1; x <= 20.0; x += 0.1) {
        const double h = 1e-5;
        const double fd = (g(x + h) - g(x - h)) / (2 * h);
        CHECK(std::fabs(fd - specfun::bessel_j_ratio_derivative(o, x)) < 1e-6);
      }
    }
  }

  TEST_CASE("bessel_i") {
    CHECK(specfun::bessel_i(0.5, 1.0) == doctest::Approx(std::sqrt(2.0 / pi) * std::sinh(1.0)).epsilon(1e-14));
    CHECK(specfun::bessel_i(0.5, 1.0) == doctest::Approx(0.937674).epsilon(1e-6));
    CHECK(specfun::bessel_i(0.0, 0.0) == 1.0);
    double series = 0.0;
    double fact_k = 1.0;
    for (int k = 0; k < 30; ++k) {
      if (k > 0) fact_k *= k;
      series += std::pow(1.0, 2 * k + 1) / (fact_k * fact_k * (k + 1));
    }
    CHECK(specfun::bessel_i(1.0, 2.0) == doctest::Approx(series).epsilon(1e-14));
    CHECK_THROWS_AS(specfun::bessel_i(0.0, -0.1), DomainError);
    CHECK_THROWS_AS(specfun::bessel_i(0.0, 800.0), DomainError);
  }

  TEST_CASE("exp-scaled bessel_i agrees with Boost.Math") {
    for (double nu : {-0.3, 0.0, 0.5, 1.0, 2.5, 5.5}) {
      for (double x = 0.05; x < 600.0; x *= 1.3) {
        const double ref = std::exp(std::log(boost::math::cyl_bessel_i(nu, x)) - x);
        CAPTURE(nu);
        CAPTURE(x);
        CHECK(specfun::bessel_i_scaled(nu, x) == doctest::Approx(ref).epsilon(1e-12));
      }
    }
    // Far beyond double range of I itself.
    CHECK(specfun::bessel_i_scaled(0.5, 1e6) == doctest::Approx(1.0 / std::sqrt(2 * pi * 1e6)).epsilon(1e-12));
  }

  TEST_CASE("zeros: closed form at nu = 1/2") {
    const auto t = bessel_zeros(Order(0.5), 50);
    for (std::size_t n = 1; n <= 50; ++n) CHECK(std::fabs(t.zero(n) - n * pi) < 1e-10);
    CHECK_THROWS_AS(t.zero(0), DomainError);
    CHECK_THROWS_AS(t.zero(51), DomainError);
  }

  TEST_CASE("zeros: bisection oracle on the power series of J_0") {
    const auto t = bessel_zeros(Order(0.0), 2);
    const double z1 = bisect(j0_series, 2.0, 3.0);
    const double z2 = bisect(j0_series, 5.0, 6.0);
    CHECK(std::fabs(t.zero(1) - z1) < 1e-10);
    CHECK(std::fabs(t.zero(2) - z2) < 1e-10);
    CHECK(std::fabs(t.zero(1) - 2.404825557695773) < 1e-10);
    CHECK(std::fabs(t.zero(2) - 5.520078110286311) < 1e-10);
    CHECK(std::fabs(specfun::bessel_j(0.0, 2.404825557695773)) < 1e-12);
    CHECK(std::fabs(bessel_zeros(Order(1.0), 1).zero(1) - 3.831705970207512) < 1e-10);
  }

  TEST_CASE("zeros: residuals, spacing, interlacing, growth") {
    for (double nu : {-0.45, 0.0, 0.3, 1.0, 2.5, 4.2}) {
      CAPTURE(nu);
      const auto a = bessel_zeros(Order(nu), 400);
      const auto b = bessel_zeros(Order(nu + 1.0), 400);
      for (std::size_t k = 1; k <= a.size(); ++k) {
        CHECK(a.residuals()[k - 1] < BesselZeroTable::kZeroTolerance);
        const double ratio = a.zero(k) / static_cast<double>(k);
        CHECK(ratio > 1.0);
        CHECK(ratio < 10.0);
        if (k >= 20 && k < a.size()) CHECK(std::fabs(a.zero(k + 1) - a.zero(k) - pi) < 0.05);
        if (k < a.size()) {
          CHECK(a.zero(k) < b.zero(k));
          CHECK(b.zero(k) < a.zero(k + 1));
        }
      }
    }
  }

  TEST_CASE("zeros: large tables agree with Boost.Math") {
    for (double nu : {0.0, 0.7, 3.0}) {
      const auto t = bessel_zeros(Order(nu), 20000);
      for (std::size_t k : {1u, 7u, 100u, 1234u, 9999u, 20000u}) {
        CAPTURE(nu);
        CAPTURE(k);
        const double ref = boost::math::cyl_bessel_j_zero(nu, static_cast<int>(k));
        CHECK(std::fabs(t.zero(k) - ref) < 1e-9);
      }
    }
  }

  TEST_CASE("zero table validation") {
    CHECK_THROWS_AS(bessel_zeros(Order(0.0), 0), DomainError);
    CHECK_THROWS_AS(BesselZeroTable(Order(0.0), {2.0, 1.0}, {0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(BesselZeroTable(Order(0.0), {1.0}, {1.0}), DomainError);
  }
}
