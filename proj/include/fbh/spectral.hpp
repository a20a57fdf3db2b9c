#pragma once

// Coefficients in the eigenbases and evaluation of spectral multipliers
//   u(t, x) = sum_n m(t, lambda_n) a_n e_n(x)
// with m = exp(-t lambda) (Poisson) or exp(-t lambda^2) (heat).

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fbh/basis.hpp"

namespace fbh {

/// values[k] on (edges[k], edges[k+1]], zero elsewhere.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> edges, std::vector<double> values);

  std::span<const double> edges() const noexcept { return edges_; }
  std::span<const double> values() const noexcept { return values_; }
  bool empty() const noexcept { return values_.empty(); }
  double lo() const;
  double hi() const;

  double operator()(double x) const;
  /// int f dmeasure.
  double integral(Measure m, Order order) const;
  double l1_norm(Measure m, Order order) const;
  double sup_norm() const;

  StepFunction scaled(double factor) const;
  /// Pointwise sum on the union of breakpoints.
  static StepFunction sum(const StepFunction& a, const StepFunction& b);

 private:
  std::vector<double> edges_;
  std::vector<double> values_;
};

enum class Symbol { Poisson, Heat };

/// exp(-t lambda) or exp(-t lambda^2).
double symbol_value(Symbol s, double t, double lambda);

/// Upper bound for sum_{n > N} K lambda_n^p m(t, lambda_n), given lambda_{N+1}
/// and a lower bound delta on the gaps between consecutive lambdas. Returns
/// +inf when lambda_{N+1} is still below the point where the summand decays
/// geometrically.
double geometric_tail(Symbol s, double t, double lambda_next, double p, double delta, double k);

/// Polynomial of degree <= 3 on each (edges[k], edges[k+1]], stored in
/// global monomials: f(x) = sum_i coeffs[4k + i] x^i. Zero elsewhere.
class PiecewisePolynomial {
 public:
  static constexpr int kMaxDegree = 3;

  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::vector<double> edges, std::vector<double> coeffs);
  explicit PiecewisePolynomial(const StepFunction& f);
  /// Cubic interpolation of f at Chebyshev points of every panel.
  static PiecewisePolynomial interpolate(const std::function<double(double)>& f, std::span<const double> edges);

  std::span<const double> edges() const noexcept { return edges_; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  std::size_t panels() const noexcept { return edges_.empty() ? 0 : edges_.size() - 1; }
  double operator()(double x) const;
  /// Sample-based L^1 norm (Gauss rule per panel).
  double l1_norm(Measure m, Order order) const;

 private:
  std::vector<double> edges_;
  std::vector<double> coeffs_;
};

/// H_p(z) = int_0^z u^p J_nu(u) du, p + nu > -1. Gauss quadrature below a
/// switch point z0 and repeated integration by parts above it:
///   H_p(z) = H_p(z0) + S(z) - S(z0) + R,  S(z) = sum_j C_j z^{p-j} J_{nu+j+1}(z).
/// When the recursion terminates (p - nu - 1 a nonnegative even integer),
/// H_p = S exactly for every z.
class PowerBesselIntegral {
 public:
  static constexpr double kSwitch = 320.0;

  PowerBesselIntegral(double nu, double p);

  double nu() const noexcept { return nu_; }
  double power() const noexcept { return p_; }
  bool closed_form() const noexcept { return closed_; }
  int terms() const noexcept { return static_cast<int>(c_.size()); }
  /// Bound on |R| (zero for closed forms).
  double remainder_bound() const noexcept { return remainder_; }

  double operator()(double z) const;
  /// Valid for z >= kSwitch, or any z > 0 for closed forms; j0 = J_nu(z),
  /// j1 = J_{nu+1}(z).
  double from_bessel(double z, double j0, double j1) const;
  /// sum_j C_j z^{-j} J_{nu+j+1}(z) for a precomputed ladder
  /// ladder[j] = J_{nu+j+1}(z); from_bessel = offset + z^p * this.
  double ladder_sum(double z, std::span<const double> ladder) const;
  double offset() const noexcept { return offset_; }
  /// int_a^b u^p J_nu(u) du by Gauss quadrature, 0 <= a <= b.
  double quadrature(double a, double b) const;

 private:
  double nu_;
  double p_;
  bool closed_ = false;
  double remainder_ = 0.0;
  double offset_ = 0.0;
  std::vector<double> c_;
};

/// Exact <f, e_n> for n = 1..count (e_n = phi_n with mu, psi_n with dx).
std::vector<double> step_coefficients(const EigenBasis& basis, Family family, const StepFunction& f,
                                      std::size_t count);
/// Exact <f, e_n> for a piecewise cubic; edges must lie in [0, 1].
std::vector<double> piecewise_coefficients(const EigenBasis& basis, Family family, const PiecewisePolynomial& f,
                                           std::size_t count);

/// <f, e_n> for n = 1..count by composite Gauss rules fine enough for e_count;
/// `breakpoints` are honoured as panel edges.
std::vector<double> function_coefficients(const EigenBasis& basis, Family family,
                                          const std::function<double(double)>& f, std::size_t count,
                                          std::span<const double> breakpoints = {});

struct Evolution {
  std::vector<double> times;
  std::vector<double> points;
  /// values[k * points.size() + i] at (times[k], points[i]).
  std::vector<double> values;
  /// Terms summed at each time.
  std::vector<std::size_t> terms;
  /// Largest certified truncation error over all times.
  double tail_bound = 0.0;

  double at(std::size_t k, std::size_t i) const { return values[k * points.size() + i]; }
};

/// sum_n m(t, lambda_n) a_n e_n(x) on times x points. Each time keeps the
/// shortest prefix whose tail is below `tolerance` (absolute); coefficients
/// beyond coeffs.size() are bounded by the largest of the trailing half.
/// Throws ConvergenceError when the coefficient list is too short.
Evolution evolve(const EigenBasis& basis, Family family, std::span<const double> coeffs, Symbol symbol,
                 std::span<const double> times, std::span<const double> points, double tolerance);

}  // namespace fbh
