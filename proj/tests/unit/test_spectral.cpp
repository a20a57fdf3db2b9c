#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "fbh/spectral.hpp"

using namespace fbh;
using std::numbers::pi;

namespace {

// int_0^z u^p J_nu(u) du, independent of the library.
double power_bessel_reference(double nu, double p, double z) {
  auto f = [&](double u) { return std::pow(u, p) * boost::math::cyl_bessel_j(nu, u); };
  boost::math::quadrature::tanh_sinh<double> ts;
  const double head = std::min(z, 1.0);
  double s = ts.integrate(f, 0.0, head);
  for (double a = head; a < z; a += 1.0) {
    s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, std::min(z, a + 1.0), 0);
  }
  return s;
}

// Sine-series semigroups on (0, 1) with Dirichlet data, written through
// odd 2-periodic images of the whole-line kernels.
double poisson_images(double a, double b, double t, double x) {
  auto block = [&](double c) { return (std::atan((x - c) / t)) / pi; };
  double s = 0.0;
  for (int k = -4000; k <= 4000; ++k) {
    s += block(a + 2 * k) - block(b + 2 * k);
    s -= block(-b + 2 * k) - block(-a + 2 * k);
  }
  return s;
}

double heat_images(double a, double b, double t, double x) {
  const double r = 1.0 / std::sqrt(4.0 * t);
  auto block = [&](double c) { return 0.5 * std::erf((x - c) * r); };
  double s = 0.0;
  for (int k = -40; k <= 40; ++k) {
    s += block(a + 2 * k) - block(b + 2 * k);
    s -= block(-b + 2 * k) - block(-a + 2 * k);
  }
  return s;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("step function basics") {
    const StepFunction f({0.1, 0.3, 0.5}, {2.0, -1.0});
    CHECK(f(0.1) == 0.0);
    CHECK(f(0.2) == 2.0);
    CHECK(f(0.3) == 2.0);
    CHECK(f(0.4) == -1.0);
    CHECK(f(0.6) == 0.0);
    CHECK(f.integral(Measure::Lebesgue, Order(0.0)) == doctest::Approx(0.2));
    CHECK(f.l1_norm(Measure::Lebesgue, Order(0.0)) == doctest::Approx(0.6));
    CHECK(f.sup_norm() == 2.0);
    const StepFunction g = StepFunction::sum(f, StepFunction({0.2, 0.4}, {1.0}));
    CHECK(g(0.15) == 2.0);
    CHECK(g(0.25) == 3.0);
    CHECK(g(0.35) == 0.0);
    CHECK(g(0.45) == -1.0);
    CHECK_THROWS_AS(StepFunction({0.2, 0.1}, {1.0}), DomainError);
    CHECK_THROWS_AS(StepFunction({0.1, 0.2}, {1.0, 2.0}), DomainError);
  }

  TEST_CASE("power Bessel integrals match direct quadrature") {
    for (double nu : {0.0, 0.3, 1.7}) {
      for (double p : {0.5, 1.5, nu + 1.0, nu + 2.0, nu + 3.0, 3.5}) {
        const PowerBesselIntegral h(nu, p);
        for (double z : {0.05, 0.7, 3.0, 41.5, 319.0, 321.0, 900.0}) {
          const double ref = power_bessel_reference(nu, p, z);
          const double scale = std::max(1.0, std::pow(z, p - 0.5));
          CHECK(std::fabs(h(z) - ref) < 2e-12 * scale);
        }
      }
    }
    CHECK(PowerBesselIntegral(0.3, 1.3).closed_form());
    CHECK(PowerBesselIntegral(0.3, 3.3).closed_form());
    CHECK_FALSE(PowerBesselIntegral(0.3, 2.3).closed_form());
  }

  TEST_CASE("integration by parts continues the quadrature past the switch") {
    for (double nu : {0.0, 0.8, 4.0}) {
      for (double p : {0.5, 1.5, 2.5, 3.5}) {
        const PowerBesselIntegral h(nu, p);
        CHECK(h.remainder_bound() < 1e-14 * std::max(1.0, std::pow(320.0, p - 0.5)));
        for (double z : {320.0, 333.3, 640.0, 1500.0}) {
          const double scale = std::max(1.0, std::pow(z, p - 0.5));
          CHECK(std::fabs(h(z) - h.quadrature(0.0, z)) < 1e-12 * scale);
        }
      }
    }
  }

  TEST_CASE("half-order step coefficients are sine integrals") {
    const EigenBasis b(Order(0.5), 3000);
    const StepFunction f({0.13, 0.5, 0.77}, {1.0, -2.5});
    const auto leb = step_coefficients(b, Family::Lebesgue, f, 3000);
    const auto mu = step_coefficients(b, Family::Mu, f, 3000);
    auto sine_int = [](double k, double a, double c) { return (std::cos(k * a) - std::cos(k * c)) / k; };
    auto x_sine_int = [](double k, double a, double c) {
      auto F = [k](double x) { return std::sin(k * x) / (k * k) - x * std::cos(k * x) / k; };
      return F(c) - F(a);
    };
    for (std::size_t n = 1; n <= 3000; ++n) {
      const double k = n * pi;
      const double l = std::sqrt(2.0) * (sine_int(k, 0.13, 0.5) - 2.5 * sine_int(k, 0.5, 0.77));
      const double m = std::sqrt(2.0) * (x_sine_int(k, 0.13, 0.5) - 2.5 * x_sine_int(k, 0.5, 0.77));
      CHECK(std::fabs(leb[n - 1] - l) < 1e-13);
      CHECK(std::fabs(mu[n - 1] - m) < 1e-13);
    }
  }

  TEST_CASE("piecewise cubic coefficients match fine quadrature") {
    for (double nu : {0.0, 0.3, 2.2}) {
      const EigenBasis b(Order(nu), 60);
      const std::vector<double> edges{0.0, 0.2, 0.45, 0.9};
      const auto f = PiecewisePolynomial::interpolate([](double x) { return std::exp(x) * std::cos(5.0 * x); },
                                                      edges);
      for (Family fam : {Family::Lebesgue, Family::Mu}) {
        const auto a = piecewise_coefficients(b, fam, f, 60);
        for (std::size_t n = 1; n <= 60; n += 7) {
          double ref = 0.0;
          for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
            auto g = [&](double x) {
              const double w = fam == Family::Mu ? std::pow(x, 2.0 * nu + 1.0) : 1.0;
              return f(x) * b.eigenfunction(fam, n, x) * w;
            };
            boost::math::quadrature::tanh_sinh<double> ts;
            ref += ts.integrate(g, edges[k], edges[k + 1]);
          }
          CHECK(std::fabs(a[n - 1] - ref) < 1e-12);
        }
      }
    }
  }

  TEST_CASE("cubic interpolation reproduces cubics and converges") {
    const std::vector<double> coarse{0.0, 0.3, 1.0};
    const auto cubic = PiecewisePolynomial::interpolate([](double x) { return 1.0 - 2.0 * x + 0.5 * x * x * x; },
                                                        coarse);
    for (double x = 0.01; x < 1.0; x += 0.037) CHECK(std::fabs(cubic(x) - (1.0 - 2.0 * x + 0.5 * x * x * x)) < 1e-13);
    std::vector<double> fine;
    for (int k = 0; k <= 50; ++k) fine.push_back(k / 50.0);
    const auto c = PiecewisePolynomial::interpolate([](double x) { return std::cos(3.0 * x); }, fine);
    double err = 0.0;
    for (double x = 0.0005; x < 1.0; x += 0.001) err = std::max(err, std::fabs(c(x) - std::cos(3.0 * x)));
    CHECK(err < 81.0 * std::pow(0.01, 4) / 24.0);
    CHECK(std::fabs(c.l1_norm(Measure::Lebesgue, Order(0.0)) - (2.0 - std::sin(3.0)) / 3.0) < 1e-6);
  }

  TEST_CASE("quadrature coefficients agree with exact ones for smooth data") {
    const EigenBasis b(Order(0.3), 200);
    const std::vector<double> edges{0.0, 1.0};
    const auto exact = piecewise_coefficients(
        b, Family::Lebesgue, PiecewisePolynomial::interpolate([](double x) { return x * x; }, edges), 200);
    const auto quad = function_coefficients(b, Family::Lebesgue, [](double x) { return x * x; }, 200);
    for (std::size_t n = 0; n < 200; ++n) CHECK(std::fabs(exact[n] - quad[n]) < 1e-11);
    const auto exact_mu = piecewise_coefficients(
        b, Family::Mu, PiecewisePolynomial::interpolate([](double x) { return 1.0 - x; }, edges), 200);
    const auto quad_mu = function_coefficients(b, Family::Mu, [](double x) { return 1.0 - x; }, 200);
    for (std::size_t n = 0; n < 200; ++n) CHECK(std::fabs(exact_mu[n] - quad_mu[n]) < 1e-11);
  }

  TEST_CASE("geometric tails bound the actual tails") {
    const EigenBasis b(Order(1.2), 20000);
    const auto lam = b.lambdas();
    const double delta = b.spacing_lower_bound();
    for (Symbol s : {Symbol::Poisson, Symbol::Heat}) {
      for (double t : {0.003, 0.05, 0.6}) {
        for (double p : {0.0, 1.7}) {
          for (std::size_t n : {10u, 300u, 3000u}) {
            const double bound = geometric_tail(s, t, lam[n], p, delta, 1.0);
            double sum = 0.0;
            for (std::size_t k = n; k < lam.size(); ++k) sum += std::pow(lam[k], p) * symbol_value(s, t, lam[k]);
            CHECK(sum <= bound);
          }
        }
      }
    }
  }

  TEST_CASE("evolution of a single mode") {
    const EigenBasis b(Order(0.7), 400);
    std::vector<double> a(400, 0.0);
    a[4] = 1.0;
    const std::vector<double> times{0.01, 0.2};
    const std::vector<double> points{0.0, 0.1, 0.55, 1.0};
    for (Family fam : {Family::Lebesgue, Family::Mu}) {
      for (Symbol s : {Symbol::Poisson, Symbol::Heat}) {
        const Evolution ev = evolve(b, fam, a, s, times, points, 1e-12);
        for (std::size_t k = 0; k < times.size(); ++k) {
          for (std::size_t i = 0; i < points.size(); ++i) {
            const double ref = symbol_value(s, times[k], b.lambda(5)) * b.eigenfunction(fam, 5, points[i]);
            CHECK(std::fabs(ev.at(k, i) - ref) < 1e-12);
          }
        }
      }
    }
  }

  TEST_CASE("half-order semigroups match the method of images") {
    const EigenBasis b(Order(0.5), 40000);
    const StepFunction f({0.25, 0.6}, {1.0});
    const auto a = step_coefficients(b, Family::Lebesgue, f, 40000);
    const std::vector<double> times{0.001, 0.02, 0.3};
    std::vector<double> points;
    for (double x = 0.0; x <= 1.0; x += 0.0625) points.push_back(x);
    points.push_back(0.25);
    const Evolution pe = evolve(b, Family::Lebesgue, a, Symbol::Poisson, times, points, 1e-10);
    const Evolution he = evolve(b, Family::Lebesgue, a, Symbol::Heat, times, points, 1e-10);
    CHECK(pe.tail_bound <= 1e-10);
    for (std::size_t k = 0; k < times.size(); ++k) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK(std::fabs(pe.at(k, i) - poisson_images(0.25, 0.6, times[k], points[i])) < 2e-10);
        CHECK(std::fabs(he.at(k, i) - heat_images(0.25, 0.6, times[k], points[i])) < 2e-10);
      }
    }
  }

  TEST_CASE("short coefficient lists are reported") {
    const EigenBasis b(Order(0.0), 50);
    const auto a = step_coefficients(b, Family::Mu, StepFunction({0.2, 0.4}, {1.0}), 50);
    const std::vector<double> times{1e-4};
    const std::vector<double> points{0.5};
    CHECK_THROWS_AS(evolve(b, Family::Mu, a, Symbol::Poisson, times, points, 1e-10), ConvergenceError);
  }
}
