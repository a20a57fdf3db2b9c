#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "fbh/simd.hpp"

using namespace fbh;

namespace {

struct BackendGuard {
  simd::Backend saved = simd::active_backend();
  ~BackendGuard() { simd::force_backend(saved); }
};

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar backend is always available") {
    const auto avail = simd::available_backends();
    REQUIRE(!avail.empty());
    CHECK(avail.front() == simd::Backend::Scalar);
  }

  TEST_CASE("reductions and axpy agree across backends") {
    BackendGuard guard;
    std::mt19937_64 rng(7);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 64u, 1001u}) {
      const auto a = random_vector(rng, n);
      const auto b = random_vector(rng, n);
      const auto w = random_vector(rng, n);
      const auto y0 = random_vector(rng, n);
      simd::force_backend(simd::Backend::Scalar);
      const double d_ref = simd::dot(a, b);
      const double d3_ref = simd::dot3(w, a, b);
      auto y_ref = y0;
      simd::axpy(0.37, a, y_ref);
      double scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) scale += std::fabs(a[i] * b[i]);
      for (auto be : simd::available_backends()) {
        simd::force_backend(be);
        CAPTURE(simd::backend_name(be));
        CHECK(std::fabs(simd::dot(a, b) - d_ref) <= 1e-14 * (scale + 1.0));
        CHECK(std::fabs(simd::dot3(w, a, b) - d3_ref) <= 1e-14 * (scale + 1.0));
        auto y = y0;
        simd::axpy(0.37, a, y);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(y[i] - y_ref[i]) <= 1e-15);
      }
    }
  }

  TEST_CASE("length mismatch is rejected") {
    std::vector<double> a(3), b(4);
    CHECK_THROWS(simd::dot(a, b));
    CHECK_THROWS(simd::axpy(1.0, a, b));
  }

  TEST_CASE("Hankel rows agree with each other and with Boost.Math") {
    BackendGuard guard;
    std::mt19937_64 rng(11);
    for (double nu : {-0.3, 0.0, 0.5, 1.0, 2.5, 3.7, 6.0}) {
      const auto series = simd::make_hankel_series(nu);
      const double thr = simd::hankel_fast_threshold(nu);
      std::vector<double> z;
      std::uniform_real_distribution<double> logu(std::log(thr), std::log(3e5));
      for (int i = 0; i < 203; ++i) z.push_back(std::exp(logu(rng)));
      z.push_back(thr);
      std::vector<double> ref(z.size());
      simd::force_backend(simd::Backend::Scalar);
      simd::bessel_j_hankel(series, z, ref);
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double amp = std::sqrt(2.0 / (std::numbers::pi * z[i]));
        const double boost_ref = boost::math::cyl_bessel_j(nu, z[i]);
        CAPTURE(nu);
        CAPTURE(z[i]);
        // Argument reduction of z ~ 1e5 costs a few ulps of z in the phase.
        CHECK(std::fabs(ref[i] - boost_ref) <= amp * (1e-13 + 4e-16 * z[i]));
      }
      for (auto be : simd::available_backends()) {
        simd::force_backend(be);
        std::vector<double> out(z.size());
        simd::bessel_j_hankel(series, z, out);
        for (std::size_t i = 0; i < z.size(); ++i) {
          const double amp = std::sqrt(2.0 / (std::numbers::pi * z[i]));
          CHECK(std::fabs(out[i] - ref[i]) <= 4e-15 * amp);
        }
      }
    }
  }

  TEST_CASE("half-order Hankel row is the sine closed form") {
    BackendGuard guard;
    const auto series = simd::make_hankel_series(0.5);
    std::vector<double> z, out(500);
    for (int k = 0; k < 500; ++k) z.push_back(40.0 + 97.3 * k);
    for (auto be : simd::available_backends()) {
      simd::force_backend(be);
      simd::bessel_j_hankel(series, z, out);
      for (int k = 0; k < 500; ++k) {
        const double amp = std::sqrt(2.0 / (std::numbers::pi * z[k]));
        CHECK(std::fabs(out[k] - amp * std::sin(z[k])) < amp * (1e-14 + 4e-16 * z[k]));
      }
    }
  }
}
