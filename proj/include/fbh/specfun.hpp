#pragma once

// Bessel functions J_nu, I_nu of real order nu > -1/2 and the positive zeros
// of J_nu.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbh {

/// Raised when an argument violates an operation's precondition.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an iterative or truncated computation cannot meet its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string operation, const std::string& what)
      : std::runtime_error(what), operation_(std::move(operation)) {}
  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string operation_;
};

/// Order nu of a Bessel function, restricted to nu > -1/2.
class Order {
 public:
  explicit Order(double nu);
  double value() const noexcept { return nu_; }
  /// nu + 1/2, the exponent linking the two eigenbases.
  double half_shift() const noexcept { return nu_ + 0.5; }

 private:
  double nu_;
};

namespace specfun {

/// Arguments above this switch from the ascending series to the Hankel
/// large-argument expansion: max(17, 2|nu|).
double asymptotic_switch(double nu) noexcept;

/// Orders up to this value use the series/asymptotic pair; larger orders
/// fall back to Boost.Math (the two-regime scheme loses accuracy there).
inline constexpr double kTwoRegimeMaxOrder = 4.5;

/// J_nu(x) for x >= 0 and any real nu > -1 (orders nu+k are needed internally).
double bessel_j(double nu, double x);
inline double bessel_j(Order order, double x) { return bessel_j(order.value(), x); }

/// d/dx [x^{-nu} J_nu(x)] = -x^{-nu} J_{nu+1}(x), x > 0.
double bessel_j_ratio_derivative(Order order, double x);

/// I_nu(x) for x >= 0. Throws DomainError when the value overflows a double.
double bessel_i(double nu, double x);
inline double bessel_i(Order order, double x) { return bessel_i(order.value(), x); }

/// e^{-x} I_nu(x), finite for every x >= 0.
double bessel_i_scaled(double nu, double x);

/// Hankel asymptotic amplitudes: J_nu(z) = sqrt(2/(pi z)) (P cos chi - Q sin chi),
/// chi = z - nu pi/2 - pi/4. Accurate for z >= asymptotic_switch(nu).
void hankel_pq(double nu, double z, double& p, double& q);

}  // namespace specfun

/// Validated increasing zeros lambda_1 < ... < lambda_N of J_nu.
class BesselZeroTable {
 public:
  static constexpr double kZeroTolerance = 1e-12;
  static constexpr int kIterationCap = 100;

  BesselZeroTable(Order order, std::vector<double> zeros, std::vector<double> residuals);

  Order order() const noexcept { return order_; }
  std::size_t size() const noexcept { return zeros_.size(); }
  /// 1-based, matching lambda_{n,nu}.
  double zero(std::size_t n) const;
  std::span<const double> zeros() const noexcept { return zeros_; }
  std::span<const double> residuals() const noexcept { return residuals_; }
  /// Smallest gap lambda_{k+1} - lambda_k over the table (pi for an infinite table at nu = 1/2).
  double min_spacing() const noexcept { return min_spacing_; }

 private:
  Order order_;
  std::vector<double> zeros_;
  std::vector<double> residuals_;
  double min_spacing_;
};

/// First `count` positive zeros of J_nu, each refined by bracketed Newton
/// iteration until |J_nu(lambda)| < kZeroTolerance.
BesselZeroTable bessel_zeros(Order order, std::size_t count);

}  // namespace fbh
