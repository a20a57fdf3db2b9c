#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/special_functions/bessel.hpp>

#include "fbh/basis.hpp"

using namespace fbh;
using std::numbers::pi;

namespace {

QuadratureRule fine_rule(Measure m, Order o) {
  const std::vector<double> focus{0.0};
  auto r = composite(graded_edges(0.0, 1.0, focus, 1e-9, 1.3), 24);
  return m == Measure::Mu ? with_mu_density(std::move(r), o) : r;
}

}  // namespace

TEST_SUITE("basis") {
  TEST_CASE("half-order eigenfunctions are sines") {
    const EigenBasis b(Order(0.5), 300);
    std::vector<double> row(300);
    for (double x = 0.001; x < 1.0; x += 0.0173) {
      b.psi_row(x, row);
      for (std::size_t n = 1; n <= 300; ++n) {
        const double exact = std::sqrt(2.0) * std::sin(n * pi * x);
        CHECK(std::fabs(row[n - 1] - exact) < 1e-12);
        if (n <= 40) CHECK(std::fabs(b.psi(n, x) - exact) < 1e-12);
      }
    }
    CHECK(b.phi(1, 0.5) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(b.psi(3, 1.0 / 6.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::fabs(b.psi(2, 0.5)) < 1e-12);
  }

  TEST_CASE("phi vanishes at the right endpoint and matches the normalization oracle") {
    const EigenBasis b(Order(0.0), 50);
    for (std::size_t n = 1; n <= 50; ++n) CHECK(std::fabs(b.phi(n, 1.0 - 1e-14)) < 1e-10);
    // c_1 from a high-order quadrature of int_0^1 J_0(lambda_1 x)^2 x dx.
    const auto r = gauss_on(0.0, 1.0, 200);
    const double l1 = b.lambda(1);
    const double norm2 = r.integrate([l1](double x) {
      const double j = boost::math::cyl_bessel_j(0.0, l1 * x);
      return j * j * x;
    });
    const double c1 = 1.0 / std::sqrt(norm2);
    CHECK(b.phi(1, 0.3) == doctest::Approx(c1 * boost::math::cyl_bessel_j(0.0, 0.3 * l1)).epsilon(1e-12));
    CHECK(std::fabs(b.psi(1, 0.3) - std::sqrt(0.3) * b.phi(1, 0.3)) < 1e-12);
    CHECK_THROWS_AS(b.phi(0, 0.3), DomainError);
    CHECK_THROWS_AS(b.phi(51, 0.3), DomainError);
  }

  TEST_CASE("Gram matrices are the identity") {
    for (double nu : {0.0, 0.5, 1.0, 2.5, -0.3}) {
      const Order o(nu);
      const EigenBasis b(o, 20);
      for (Family fam : {Family::Mu, Family::Lebesgue}) {
        const auto r = fine_rule(measure_of(fam), o);
        std::vector<double> gram(400, 0.0);
        std::vector<double> row(20);
        for (std::size_t i = 0; i < r.size(); ++i) {
          b.row(fam, r.nodes[i], row);
          for (int n = 0; n < 20; ++n) {
            for (int m = 0; m < 20; ++m) gram[n * 20 + m] += r.weights[i] * row[n] * row[m];
          }
        }
        double err = 0.0;
        for (int n = 0; n < 20; ++n) {
          for (int m = 0; m < 20; ++m) err = std::max(err, std::fabs(gram[n * 20 + m] - (n == m ? 1.0 : 0.0)));
        }
        CAPTURE(nu);
        CHECK(err < 1e-8);
      }
    }
  }

  TEST_CASE("normalization constants stay bounded relative to sqrt(lambda)") {
    for (double nu : {-0.4, 0.0, 1.0, 3.5}) {
      const EigenBasis b(Order(nu), 2000);
      for (std::size_t n = 1; n <= b.size(); ++n) {
        const double r = b.norm_constant(n) / std::sqrt(b.lambda(n));
        CHECK(r > 1.0);
        CHECK(r < 3.0);
      }
    }
  }

  TEST_CASE("rows agree with pointwise evaluation and Boost.Math") {
    for (double nu : {-0.3, 0.0, 1.0, 2.5, 5.0}) {
      const EigenBasis b(Order(nu), 5000);
      std::vector<double> prow(5000), srow(5000), crow(5000);
      for (double x : {1e-3, 0.05, 0.31, 0.5, 0.97}) {
        b.phi_row(x, prow);
        b.psi_row(x, srow);
        b.chi_row(x, crow);
        for (std::size_t n : {1u, 2u, 10u, 77u, 400u, 1999u, 5000u}) {
          const double lam = b.lambda(n);
          const double c = b.norm_constant(n);
          const double amp = c * std::min(1.0, std::sqrt(2.0 / (pi * lam * x)));
          CAPTURE(nu);
          CAPTURE(x);
          CAPTURE(n);
          const double jref = boost::math::cyl_bessel_j(nu, lam * x);
          const double j1ref = boost::math::cyl_bessel_j(nu + 1.0, lam * x);
          CHECK(std::fabs(srow[n - 1] - c * std::sqrt(x) * jref) < 1e-12 * amp * std::sqrt(x) + 1e-13);
          CHECK(std::fabs(prow[n - 1] * std::pow(x, nu + 0.5) - srow[n - 1]) < 1e-12 * (std::fabs(srow[n - 1]) + 1e-3));
          CHECK(std::fabs(crow[n - 1] - c * std::sqrt(x) * j1ref) < 1e-12 * amp * std::sqrt(x) + 1e-13);
          CHECK(std::fabs(b.psi(n, x) - srow[n - 1]) < 1e-12 * amp + 1e-13);
        }
      }
    }
  }

  TEST_CASE("uniform bounds dominate sampled eigenfunctions") {
    for (double nu : {-0.4, 0.0, 0.5, 2.5}) {
      const EigenBasis b(Order(nu), 3000);
      std::vector<double> prow(3000), crow(3000);
      double ps = 0.0, cs = 0.0;
      for (double x = 1e-4; x < 1.0; x += 0.00731) {
        b.psi_row(x, prow);
        b.chi_row(x, crow);
        for (std::size_t k = 0; k < 3000; ++k) {
          ps = std::max(ps, std::fabs(prow[k]));
          cs = std::max(cs, std::fabs(crow[k]));
        }
      }
      CAPTURE(nu);
      CHECK(ps <= b.psi_bound());
      CHECK(cs <= b.chi_bound());
      CHECK(b.psi_bound() < 3.0 * ps);
    }
  }

  TEST_CASE("coefficients") {
    const Order half(0.5);
    const EigenBasis b(half, 60);
    const auto rmu = make_quadrature(Domain::UnitInterval, 256, Measure::Mu, half);
    const auto f = SampledFunction::sample(rmu, [&](double x) { return b.phi(2, x); }, Measure::Mu);
    CHECK(std::fabs(coeff_mu(f, b, 2) - 1.0) < 1e-8);
    CHECK(std::fabs(coeff_mu(f, b, 1)) < 1e-8);
    CHECK_THROWS_AS(coeff_lebesgue(f, b, 1), DomainError);

    const auto rl = make_quadrature(Domain::UnitInterval, 256, Measure::Lebesgue, half);
    const auto g = SampledFunction::sample(rl, [](double x) { return std::sqrt(2.0) * std::sin(pi * x); },
                                           Measure::Lebesgue);
    CHECK(std::fabs(coeff_lebesgue(g, b, 1) - 1.0) < 1e-10);
    CHECK_THROWS_AS(coeff_mu(g, b, 1), DomainError);

    const auto fx = SampledFunction::sample(rmu, [](double x) { return x; }, Measure::Mu);
    const double exact = std::sqrt(2.0) * (pi * pi - 4.0) / (pi * pi * pi);
    CHECK(std::fabs(coeff_mu(fx, b, 1) - exact) < 1e-12);
    const auto all = coefficients(fx, b, 10);
    CHECK(std::fabs(all[0] - exact) < 1e-12);
  }

  TEST_CASE("synthesis") {
    const Order half(0.5);
    const EigenBasis b(half, 60);
    std::vector<double> e2(5, 0.0);
    e2[1] = 1.0;
    CHECK(synthesize(b, Family::Mu, e2, 0.37) == doctest::Approx(b.phi(2, 0.37)).epsilon(1e-14));
    std::vector<double> zero(10, 0.0);
    CHECK(synthesize(b, Family::Lebesgue, zero, 0.4) == 0.0);

    const auto rl = make_quadrature(Domain::UnitInterval, 512, Measure::Lebesgue, half);
    const auto g = SampledFunction::sample(rl, [](double x) { return x * (1.0 - x); }, Measure::Lebesgue);
    const auto c = coefficients(g, b, 50);
    double err = 0.0;
    for (double x = 0.01; x < 1.0; x += 0.01) err = std::max(err, std::fabs(synthesize(b, Family::Lebesgue, c, x) - x * (1 - x)));
    CHECK(err < 1e-3);
  }

  TEST_CASE("sampled functions") {
    QuadratureRule r;
    r.nodes = {0.2, 0.1};
    r.weights = {1.0, 1.0};
    CHECK_THROWS_AS(SampledFunction(r, {1.0, 2.0}, Measure::Lebesgue), DomainError);
    r.nodes = {0.1, 0.2};
    r.weights = {1.0, -1.0};
    CHECK_THROWS_AS(SampledFunction(r, {1.0, 2.0}, Measure::Lebesgue), DomainError);
    const auto q = make_quadrature(Domain::UnitInterval, 64, Measure::Mu, Order(1.0));
    const auto one = SampledFunction::sample(q, [](double) { return 1.0; }, Measure::Mu);
    CHECK(std::fabs(one.integral() - MeasureMu(Order(1.0)).interval(0, 1)) < 1e-10);
    std::ostringstream os;
    one.write_csv(os);
    CHECK(os.str().rfind("x,value\n", 0) == 0);
  }

  TEST_CASE("mu distance") {
    CHECK(mu_distance(Order(0.0), 0.0, 1.0) == doctest::Approx(0.5));
    CHECK(mu_distance(Order(0.3), 0.4, 0.4) == 0.0);
    CHECK(mu_distance(Order(0.5), 0.25, 0.75) == doctest::Approx(13.0 / 96.0).epsilon(1e-14));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const Order o(u(rng) * 3.0 - 0.45);
      const double x = u(rng), y = u(rng), z = u(rng);
      CHECK(mu_distance(o, x, y) == mu_distance(o, y, x));
      CHECK(mu_distance(o, x, z) <= mu_distance(o, x, y) + mu_distance(o, y, z) + 1e-15);
    }
  }

  TEST_CASE("Hankel transform: Plancherel, self-reciprocity, Gaussian") {
    for (double nu : {0.0, 0.5, 1.7}) {
      const Order o(nu);
      const auto ry = make_quadrature(Domain::HalfLine, 1024, Measure::Mu, o, 8.0);
      auto prof = [](double y) { return y < 1.0 ? std::pow(1.0 - y * y, 8) : 0.0; };
      const auto f = SampledFunction::sample(ry, prof, Measure::Mu);
      const auto rxi = make_quadrature(Domain::HalfLine, 2048, Measure::Mu, o, 60.0);
      std::vector<double> hf(rxi.size());
      for (std::size_t i = 0; i < rxi.size(); ++i) hf[i] = hankel_transform(f, o, rxi.nodes[i]);
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t i = 0; i < rxi.size(); ++i) lhs += rxi.weights[i] * hf[i] * hf[i];
      for (std::size_t i = 0; i < ry.size(); ++i) rhs += ry.weights[i] * f.values()[i] * f.values()[i];
      CAPTURE(nu);
      CHECK(std::fabs(std::sqrt(lhs) - std::sqrt(rhs)) < 1e-6);

      const SampledFunction hsf(rxi, hf, Measure::Mu);
      for (double y = 0.05; y < 0.95; y += 0.1) CHECK(std::fabs(hankel_transform(hsf, o, y) - prof(y)) < 1e-4);

      const auto gauss = SampledFunction::sample(ry, [](double y) { return std::exp(-0.5 * y * y); }, Measure::Mu);
      for (double xi = 0.1; xi < 5.0; xi += 0.3) CHECK(std::fabs(hankel_transform(gauss, o, xi) - std::exp(-0.5 * xi * xi)) < 1e-10);
    }
    const auto ry = make_quadrature(Domain::HalfLine, 64, Measure::Mu, Order(0.0), 8.0);
    const auto zero = SampledFunction::sample(ry, [](double) { return 0.0; }, Measure::Mu);
    CHECK(hankel_transform(zero, Order(0.0), 1.3) == 0.0);
    CHECK_THROWS_AS(hankel_transform(zero, Order(0.0), 0.0), DomainError);
  }
}
