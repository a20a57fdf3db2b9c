#pragma once

// Orthonormal Fourier-Bessel systems on (0,1):
//   phi_n(x) = c_n J_nu(lambda_n x) x^{-nu}    in L^2((0,1), mu)
//   psi_n(x) = x^{nu+1/2} phi_n(x)             in L^2((0,1), dx)
// with c_n = sqrt(2) / |J_{nu+1}(lambda_n)|.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "fbh/quadrature.hpp"
#include "fbh/simd.hpp"
#include "fbh/specfun.hpp"

namespace fbh {

/// Mu: the operator with measure x^{2nu+1}dx and eigenfunctions phi_n.
/// Lebesgue: its conjugate with measure dx and eigenfunctions psi_n.
enum class Family { Mu, Lebesgue };

inline Measure measure_of(Family f) { return f == Family::Mu ? Measure::Mu : Measure::Lebesgue; }

class EigenBasis {
 public:
  /// Computes `size` zeros and normalization constants, and checks the unit
  /// norm of the first few eigenfunctions by quadrature.
  EigenBasis(Order order, std::size_t size);

  Order order() const noexcept { return zeros_.order(); }
  double nu() const noexcept { return zeros_.order().value(); }
  std::size_t size() const noexcept { return zeros_.size(); }
  const BesselZeroTable& zeros() const noexcept { return zeros_; }
  /// 1-based.
  double lambda(std::size_t n) const { return zeros_.zero(n); }
  double norm_constant(std::size_t n) const;
  std::span<const double> lambdas() const noexcept { return zeros_.zeros(); }
  std::span<const double> norm_constants() const noexcept { return c_; }

  double phi(std::size_t n, double x) const;
  double psi(std::size_t n, double x) const;
  double eigenfunction(Family f, std::size_t n, double x) const;
  /// c_n x^{1/2} J_{nu+1}(lambda_n x): delta_L psi_n = lambda_n chi_n.
  double chi(std::size_t n, double x) const;

  /// out[n-1] = phi_n(x) (resp. psi_n, chi_n) for n = 1..out.size().
  void phi_row(double x, std::span<double> out) const;
  void psi_row(double x, std::span<double> out) const;
  void chi_row(double x, std::span<double> out) const;
  void row(Family f, double x, std::span<double> out) const;
  /// out[n-1] = J_{nu+shift}(lambda_n x) for shift in {0, 1}.
  void bessel_row(int shift, double x, std::span<double> out) const;

  /// sup_{n, x in (0,1)} |psi_n(x)| (certified upper bound).
  double psi_bound() const noexcept { return psi_bound_; }
  /// sup_{n, x in (0,1)} |chi_n(x)| (certified upper bound).
  double chi_bound() const noexcept { return chi_bound_; }
  /// Lower bound for lambda_{n+1} - lambda_n valid for every n.
  double spacing_lower_bound() const noexcept { return spacing_; }
  /// Upper bound for c_n / sqrt(lambda_n) over all n.
  double norm_growth() const noexcept { return growth_; }

 private:
  BesselZeroTable zeros_;
  std::vector<double> c_;
  simd::HankelSeries hankel_[2];
  double psi_bound_ = 0.0;
  double chi_bound_ = 0.0;
  double spacing_ = 0.0;
  double growth_ = 0.0;

  void check_index(std::size_t n) const;
};

/// Values on a quadrature grid plus the measure the weights integrate against.
class SampledFunction {
 public:
  SampledFunction(QuadratureRule rule, std::vector<double> values, Measure measure);
  static SampledFunction sample(const QuadratureRule& rule, const std::function<double(double)>& f, Measure measure);

  const QuadratureRule& rule() const noexcept { return rule_; }
  std::span<const double> nodes() const noexcept { return rule_.nodes; }
  std::span<const double> weights() const noexcept { return rule_.weights; }
  std::span<const double> values() const noexcept { return values_; }
  Measure measure() const noexcept { return measure_; }
  std::size_t size() const noexcept { return values_.size(); }

  double integral() const;
  double l1_norm() const;
  double sup_norm() const;

  /// `x,value` CSV, ascending x.
  void write_csv(std::ostream& os) const;
  /// Reads `x,value` CSV. Weights are trapezoidal in x over the listed nodes
  /// (times x^{2nu+1} for Measure::Mu).
  static SampledFunction read_csv(const std::filesystem::path& path, Measure measure, Order order);

 private:
  QuadratureRule rule_;
  std::vector<double> values_;
  Measure measure_;
};

/// <f, phi_n>_mu by the sampled quadrature; f must carry Measure::Mu.
double coeff_mu(const SampledFunction& f, const EigenBasis& basis, std::size_t n);
/// <g, psi_n> by the sampled quadrature; g must carry Measure::Lebesgue.
double coeff_lebesgue(const SampledFunction& g, const EigenBasis& basis, std::size_t n);
/// First `count` coefficients in the family matching f's measure tag.
std::vector<double> coefficients(const SampledFunction& f, const EigenBasis& basis, std::size_t count);

/// sum_n coeffs[n-1] e_n(x), e_n = phi_n or psi_n.
double synthesize(const EigenBasis& basis, Family family, std::span<const double> coeffs, double x);

/// z^{-nu} J_nu(z), with the limit 1/(2^nu Gamma(nu+1)) at z = 0.
double bessel_j_normalized(double nu, double z);

/// int phi(xi y) f(y) dmu(y), phi(z) = z^{-nu} J_nu(z); f sampled on a
/// truncated half-line with Measure::Mu.
double hankel_transform(const SampledFunction& f, Order order, double xi);

/// |y^{2nu+2} - x^{2nu+2}| / (2nu+2).
double mu_distance(Order order, double x, double y);

}  // namespace fbh
