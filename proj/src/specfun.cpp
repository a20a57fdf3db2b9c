#include "fbh/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

namespace fbh {

Order::Order(double nu) : nu_(nu) {
  if (!std::isfinite(nu) || !(nu > -0.5)) {
    throw DomainError("order must satisfy nu > -1/2, got " + std::to_string(nu));
  }
}

namespace specfun {
namespace {

constexpr double kPi = std::numbers::pi;

// Ascending series sum_k (-1)^k (x/2)^{2k+nu} / (k! Gamma(k+nu+1)), in long
// double to absorb the cancellation near the switch point.
double j_series(double nu, double x) {
  if (x == 0.0) {
    if (nu == 0.0) return 1.0;
    if (nu > 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  const long double half = 0.5L * x;
  const long double q = -half * half;
  long double term = std::pow(half, static_cast<long double>(nu)) /
                     std::tgamma(static_cast<long double>(nu) + 1.0L);
  long double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<long double>(k) * (static_cast<long double>(k) + nu));
    sum += term;
    if (std::fabs(term) < 1e-21L * std::fabs(sum) && k > half) break;
  }
  return static_cast<double>(sum);
}

// e^{-x} times the ascending series of I_nu.
double i_series_scaled(double nu, double x) {
  if (x == 0.0) return nu == 0.0 ? 1.0 : (nu > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  const long double half = 0.5L * x;
  const long double q = half * half;
  long double term = std::exp(static_cast<long double>(nu) * std::log(half) - static_cast<long double>(x) -
                              std::lgamma(static_cast<long double>(nu) + 1.0L));
  long double sum = term;
  for (int k = 1; k < 2000; ++k) {
    term *= q / (static_cast<long double>(k) * (static_cast<long double>(k) + nu));
    sum += term;
    if (term < 1e-21L * sum && k > half) break;
  }
  return static_cast<double>(sum);
}

// e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(nu) / x^k.
double i_asymptotic_scaled(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    const double mag = std::fabs(term);
    if (mag > prev) break;
    sum += term;
    if (mag < 1e-17 * std::fabs(sum)) break;
    prev = mag;
  }
  return sum / std::sqrt(2.0 * kPi * x);
}

double i_switch(double nu) { return std::max(30.0, 2.0 * nu * nu); }

}  // namespace

double asymptotic_switch(double nu) noexcept { return std::max(17.0, 2.0 * std::fabs(nu)); }

void hankel_pq(double nu, double z, double& p, double& q) {
  const double mu = 4.0 * nu * nu;
  const double inv8z = 1.0 / (8.0 * z);
  // a_k / z^k with a_k = prod_{j<=k} (mu - (2j-1)^2) / (k! 8^k)
  double term = 1.0;
  p = 1.0;
  q = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) * inv8z / k;
    const double mag = std::fabs(term);
    if (mag > prev) break;
    // P collects even k with sign (-1)^{k/2}; Q odd k with sign (-1)^{(k-1)/2}.
    switch (k % 4) {
      case 0: p += term; break;
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
    }
    if (mag < 1e-17) break;
    prev = mag;
  }
}

double bessel_j(double nu, double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j: non-finite argument");
  if (x < 0.0) throw DomainError("bessel_j: negative argument");
  if (!(nu > -1.0)) throw DomainError("bessel_j: order must exceed -1");
  if (nu > kTwoRegimeMaxOrder) {
    if (x == 0.0) return 0.0;
    return boost::math::cyl_bessel_j(nu, x);
  }
  if (x <= asymptotic_switch(nu)) return j_series(nu, x);
  double p = 0.0;
  double q = 0.0;
  hankel_pq(nu, x, p, q);
  const double chi = x - (0.5 * nu + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

double bessel_j_ratio_derivative(Order order, double x) {
  if (!std::isfinite(x) || !(x > 0.0)) throw DomainError("bessel_j_ratio_derivative: x must be positive");
  return -std::pow(x, -order.value()) * bessel_j(order.value() + 1.0, x);
}

double bessel_i_scaled(double nu, double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_i: non-finite argument");
  if (x < 0.0) throw DomainError("bessel_i: negative argument");
  if (!(nu > -1.0)) throw DomainError("bessel_i: order must exceed -1");
  if (x > i_switch(nu)) return i_asymptotic_scaled(nu, x);
  if (nu > kTwoRegimeMaxOrder && x > 0.0) return boost::math::cyl_bessel_i(nu, x) * std::exp(-x);
  return i_series_scaled(nu, x);
}

double bessel_i(double nu, double x) {
  const double scaled = bessel_i_scaled(nu, x);
  if (x == 0.0) return scaled;
  const double log_value = std::log(scaled) + x;
  if (log_value > std::log(std::numeric_limits<double>::max())) {
    throw DomainError("bessel_i: I_nu(x) overflows double at x=" + std::to_string(x));
  }
  return scaled * std::exp(x);
}

}  // namespace specfun

BesselZeroTable::BesselZeroTable(Order order, std::vector<double> zeros, std::vector<double> residuals)
    : order_(order), zeros_(std::move(zeros)), residuals_(std::move(residuals)),
      min_spacing_(std::numeric_limits<double>::infinity()) {
  if (zeros_.empty() || zeros_.size() != residuals_.size()) {
    throw DomainError("BesselZeroTable: zeros and residuals must be non-empty and equally long");
  }
  for (std::size_t k = 0; k < zeros_.size(); ++k) {
    if (!(zeros_[k] > 0.0)) throw DomainError("BesselZeroTable: zeros must be positive");
    if (!(residuals_[k] < kZeroTolerance)) throw DomainError("BesselZeroTable: residual above tolerance");
    if (k > 0) {
      const double gap = zeros_[k] - zeros_[k - 1];
      if (!(gap > kZeroTolerance)) throw DomainError("BesselZeroTable: zeros not strictly increasing");
      min_spacing_ = std::min(min_spacing_, gap);
    }
  }
  if (zeros_.size() == 1) min_spacing_ = 2.5;
}

double BesselZeroTable::zero(std::size_t n) const {
  if (n < 1 || n > zeros_.size()) {
    throw DomainError("zero index " + std::to_string(n) + " outside table of size " + std::to_string(zeros_.size()));
  }
  return zeros_[n - 1];
}

namespace {

// McMahon: lambda_k ~ beta - (mu-1)/(8 beta) - 4(mu-1)(7mu-31)/(3 (8 beta)^3).
double mcmahon_guess(double nu, std::size_t k) {
  const double mu = 4.0 * nu * nu;
  const double beta = (static_cast<double>(k) + 0.5 * nu - 0.25) * std::numbers::pi;
  const double b8 = 8.0 * beta;
  return beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 * b8 * b8);
}

double refine_zero(double nu, double lo, double hi) {
  double flo = specfun::bessel_j(nu, lo);
  // Bisect to a narrow bracket, then safeguarded Newton.
  for (int it = 0; it < BesselZeroTable::kIterationCap && hi - lo > 1e-4; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = specfun::bessel_j(nu, mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < BesselZeroTable::kIterationCap; ++it) {
    const double f = specfun::bessel_j(nu, x);
    if (f == 0.0) return x;
    if ((f > 0.0) == (flo > 0.0)) {
      lo = x;
    } else {
      hi = x;
    }
    const double df = (nu / x) * f - specfun::bessel_j(nu + 1.0, x);
    double next = x - f / df;
    double step = std::fabs(next - x);
    // Stop at rounding level, or once steps stop shrinking inside tolerance.
    if (step <= 4e-16 * x) return next;
    if (std::fabs(f) < BesselZeroTable::kZeroTolerance && step >= 0.5 * last_step) return x;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
      step = std::numeric_limits<double>::infinity();
    }
    last_step = step;
    x = next;
  }
  const double f = specfun::bessel_j(nu, x);
  if (std::fabs(f) < BesselZeroTable::kZeroTolerance) return x;
  throw ConvergenceError("bessel_zeros", "zero refinement did not converge near x=" + std::to_string(x));
}

}  // namespace

BesselZeroTable bessel_zeros(Order order, std::size_t count) {
  if (count < 1) throw DomainError("bessel_zeros: count must be >= 1");
  const double nu = order.value();
  std::vector<double> zeros;
  std::vector<double> residuals;
  zeros.reserve(count);
  residuals.reserve(count);
  constexpr double kStep = 0.25;
  // Consecutive zeros of J_nu, nu > -1/2, are more than 2.5 apart.
  constexpr double kMinGap = 2.0;
  double start = nu > 1.0 ? nu : 0.5;
  for (std::size_t k = 1; k <= count; ++k) {
    double lo = 0.0;
    double hi = 0.0;
    bool bracketed = false;
    const double guess = mcmahon_guess(nu, k);
    // The guess is trusted only when [start, guess) cannot hide a skipped zero.
    if (guess - 0.2 > start && guess - 0.2 - start < 2.5) {
      const double a = guess - 0.2;
      const double b = guess + 0.2;
      const double fs = specfun::bessel_j(nu, start);
      const double fa = specfun::bessel_j(nu, a);
      if ((fs > 0.0) == (fa > 0.0) && (fa > 0.0) != (specfun::bessel_j(nu, b) > 0.0)) {
        lo = a;
        hi = b;
        bracketed = true;
      }
    }
    if (!bracketed) {
      double a = start;
      double fa = specfun::bessel_j(nu, a);
      for (int it = 0; it < 4000; ++it) {
        const double b = a + kStep;
        const double fb = specfun::bessel_j(nu, b);
        if ((fa > 0.0) != (fb > 0.0)) {
          lo = a;
          hi = b;
          bracketed = true;
          break;
        }
        a = b;
        fa = fb;
      }
    }
    if (!bracketed) {
      throw ConvergenceError("bessel_zeros", "could not bracket zero " + std::to_string(k));
    }
    const double z = refine_zero(nu, lo, hi);
    zeros.push_back(z);
    residuals.push_back(std::fabs(specfun::bessel_j(nu, z)));
    start = z + kMinGap;
  }
  return BesselZeroTable(order, std::move(zeros), std::move(residuals));
}

}  // namespace fbh
