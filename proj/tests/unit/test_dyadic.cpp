#include <doctest.h>

#include <cmath>
#include <random>

#include "fbh/dyadic.hpp"

using namespace fbh;

TEST_SUITE("dyadic") {
  TEST_CASE("intervals of both families") {
    const DyadicCover ci(CoverFamily::I);
    const DyadicCover cj(CoverFamily::J);
    CHECK(ci.interval(0).lo == 0.0);
    CHECK(ci.interval(0).hi == 0.5);
    CHECK(ci.interval(3).lo == 0.875);
    CHECK(ci.interval(3).hi == 0.9375);
    CHECK(cj.interval(-1).lo == 0.25);
    CHECK(cj.interval(-1).hi == 0.5);
    CHECK(cj.interval(-3).lo == 0.0625);
    CHECK(cj.interval(2).lo == ci.interval(2).lo);
    CHECK_THROWS_AS(cj.interval(0), DomainError);
    CHECK_THROWS_AS(ci.interval(-1), DomainError);
    CHECK(cj.next(-1) == 1);
    CHECK(cj.previous(1) == -1);
    CHECK(ci.next(4) == 5);
    CHECK_THROWS_AS(ci.previous(0), DomainError);
    CHECK(cj.range(-2, 2) == std::vector<int>{-2, -1, 1, 2});
  }

  TEST_CASE("index_of respects half-open intervals") {
    const DyadicCover ci(CoverFamily::I);
    const DyadicCover cj(CoverFamily::J);
    CHECK(ci.index_of(0.5) == 0);
    CHECK(ci.index_of(0.5000001) == 1);
    CHECK(ci.index_of(0.75) == 1);
    CHECK(ci.index_of(1e-9) == 0);
    CHECK(cj.index_of(0.5) == -1);
    CHECK(cj.index_of(0.25) == -2);
    CHECK(cj.index_of(0.3) == -1);
    CHECK(cj.index_of(0.75) == 1);
    CHECK(cj.index_of(0.76) == 2);
    CHECK_THROWS_AS(ci.index_of(1.0), DomainError);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
      const double x = u(rng);
      if (x == 0.0) continue;
      CHECK(ci.interval(ci.index_of(x)).contains(x));
      CHECK(cj.interval(cj.index_of(x)).contains(x));
    }
  }

  TEST_CASE("cover is exact: lengths add to one") {
    double a = 0.0;
    for (int j = 0; j < 60; ++j) a += DyadicCover(CoverFamily::I).interval(j).length();
    CHECK(a == doctest::Approx(1.0).epsilon(1e-15));
    double b = 0.0;
    const DyadicCover cj(CoverFamily::J);
    for (int j : cj.range(-60, 60)) b += cj.interval(j).length();
    CHECK(b == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("enlargement") {
    const Interval i0 = DyadicCover(CoverFamily::I).interval(0);
    const Interval s1 = enlarge(i0);
    const Interval s2 = enlarge(i0, 2);
    const Interval s3 = enlarge(i0, 3);
    CHECK(s1.lo == 0.0);
    CHECK(s1.hi == doctest::Approx(0.505).epsilon(1e-14));
    CHECK(s2.hi == doctest::Approx(0.51005).epsilon(1e-14));
    CHECK(s3.hi == doctest::Approx(0.5151505).epsilon(1e-14));
    for (int j = 0; j < 12; ++j) {
      const Interval a = DyadicCover(CoverFamily::I).interval(j);
      const Interval b = enlarge(a);
      const Interval c = enlarge(a, 2);
      const Interval d = enlarge(a, 3);
      CHECK(b.contains(a));
      CHECK(c.contains(b));
      CHECK(d.contains(c));
      CHECK(b.length() <= (1.0 + kZeta) * a.length() + 1e-15);
      CHECK(d.hi <= 1.0);
    }
    CHECK_THROWS_AS(enlarge(i0, -1), DomainError);
  }

  TEST_CASE("smoothstep") {
    CHECK(smoothstep(-1.0) == 0.0);
    CHECK(smoothstep(2.0) == 1.0);
    CHECK(smoothstep(0.5) == doctest::Approx(0.5));
    const double h = 1e-6;
    for (double u : {0.1, 0.37, 0.8}) {
      CHECK(smoothstep_derivative(u) ==
            doctest::Approx((smoothstep(u + h) - smoothstep(u - h)) / (2 * h)).epsilon(1e-7));
      CHECK(smoothstep_second_derivative(u) ==
            doctest::Approx((smoothstep_derivative(u + h) - smoothstep_derivative(u - h)) / (2 * h)).epsilon(1e-6));
    }
    CHECK(smoothstep_derivative(0.5) == doctest::Approx(1.875));
  }

  TEST_CASE("partitions sum to one with supports inside the stars") {
    for (CoverFamily fam : {CoverFamily::I, CoverFamily::J}) {
      const PartitionOfUnity p(fam);
      const DyadicCover& c = p.cover();
      for (int k = 1; k < 10000; ++k) {
        const double x = k / 10000.0;
        double s = 0.0;
        for (const auto& [j, v] : p.at(x)) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
          s += v;
        }
        CHECK(std::fabs(s - 1.0) < 1e-12);
      }
      // dense sample close to the endpoints where the scales shrink
      for (int k = 1; k < 40; ++k) {
        const double x = fam == CoverFamily::J && k % 2 ? std::ldexp(1.3, -k) : 1.0 - std::ldexp(1.3, -k);
        double s = 0.0;
        for (const auto& [j, v] : p.at(x)) s += v;
        CHECK(std::fabs(s - 1.0) < 1e-12);
      }
      for (int j : c.range(-12, 12)) {
        const Interval sup = p.support(j);
        const Interval star = c.star(j);
        CHECK(star.contains(sup));
        CHECK(p.value(j, c.interval(j).center()) == 1.0);
      }
    }
  }

  TEST_CASE("derivative bound scales like the inverse interval length") {
    for (CoverFamily fam : {CoverFamily::I, CoverFamily::J}) {
      const PartitionOfUnity p(fam);
      double worst = 0.0;
      for (int j : p.cover().range(-12, 12)) {
        const Interval s = p.support(j);
        double m = 0.0;
        for (int k = 0; k <= 4000; ++k) {
          const double x = s.lo + s.length() * k / 4000.0;
          if (x <= 0.0 || x >= 1.0) continue;
          m = std::max(m, std::fabs(p.derivative(j, x)));
        }
        const double scaled = m * std::ldexp(1.0, -std::abs(j));
        CHECK(scaled <= p.derivative_constant() * (1.0 + 1e-12));
        worst = std::max(worst, scaled);
      }
      CHECK(worst > 0.5 * p.derivative_constant());
      const double h = 1e-7;
      const double x = p.cover().interval(2).hi + 0.3 * p.right_halfwidth(2);
      CHECK(p.derivative(2, x) == doctest::Approx((p.value(2, x + h) - p.value(2, x - h)) / (2 * h)).epsilon(1e-5));
    }
  }
}
