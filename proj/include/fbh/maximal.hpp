#pragma once

// Semigroups applied to functions, discretized maximal functions, the
// reparametrized kernel K(r,x,y), Uchiyama condition audits, the Duhamel
// residuals comparing the interval heat semigroup with the half-line one,
// and the commutator kernels of the partitions of unity.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbh/basis.hpp"
#include "fbh/dyadic.hpp"
#include "fbh/kernels.hpp"
#include "fbh/spectral.hpp"

namespace fbh {

/// PoissonMu: exp(-t sqrt(L_mu)) on (0,1) with mu. PoissonLebesgue: its
/// Lebesgue conjugate. Heat*: exp(-t L). Halfline*: the half-line Bessel
/// semigroups (measure mu), restricted to (0,1).
enum class Semigroup { PoissonMu, PoissonLebesgue, HeatMu, HeatLebesgue, HalflinePoisson, HalflineHeat };

std::string_view semigroup_name(Semigroup s) noexcept;
Measure semigroup_measure(Semigroup s) noexcept;

/// Geometric times below and above the split point.
struct TimeGrid {
  std::vector<double> times;
  double split_point = 1.0;

  static TimeGrid geometric(double t_min = 1e-4, double t_max = 10.0, double ratio = 1.25);
  /// Inserts the geometric midpoint of every pair of neighbours.
  TimeGrid refined() const;
  /// Times in [lo, hi], with lo and hi themselves added.
  TimeGrid restricted(double lo, double hi) const;
  double t_min() const { return times.front(); }
  double t_max() const { return times.back(); }
  double max_ratio() const;
  std::string describe() const;
};

/// rho = 1 on the inner interval, 0 beyond the outer one, quintic smoothstep
/// in between (both intervals share the left endpoint 0).
struct CutoffRho {
  Interval inner;
  Interval outer;
  int degree = 5;

  /// inner = I_0**, outer = I_0***.
  static CutoffRho standard();
  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  /// Closed support of rho' (and rho'').
  Interval transition() const { return Interval{inner.hi, outer.hi}; }
};

/// Smallest term count whose multiplier at t_min is below e^{-55}, capped by
/// the basis size.
std::size_t spectral_terms(const EigenBasis& basis, Symbol symbol, double t_min);

/// Composite Gauss rule on (0,1), 8 nodes per panel, graded towards `focus`
/// (panel width `finest` next to each focus point, growth 1.5), with the mu
/// density folded in for Measure::Mu.
QuadratureRule output_rule(Measure measure, Order order, std::span<const double> focus, double finest = 1.0 / 512.0);

/// T_t f on the nodes of f's rule. Half-line semigroups: quadrature of the
/// kernel against f. Series semigroups: f is replaced by its expansion in the
/// eigenfunctions the rule resolves (>= 4 nodes per wavelength), with
/// coefficients from the rule.
SampledFunction apply_semigroup(const EigenBasis& basis, Semigroup s, const SampledFunction& f, double t);
/// Same for an exactly integrable piecewise cubic, on the nodes of `output`
/// (whose weights define the measure of the result).
SampledFunction apply_semigroup(const EigenBasis& basis, Semigroup s, const PiecewisePolynomial& f, double t,
                                const QuadratureRule& output);
/// apply_semigroup restricted to the Poisson semigroups.
SampledFunction apply_poisson(const EigenBasis& basis, Semigroup s, const SampledFunction& f, double t);

struct MaximalFunction {
  SampledFunction values;
  /// Time of the maximum at every node.
  std::vector<double> argmax_t;
  std::string grid;
};

/// max over the grid of |T_t f| at every node.
MaximalFunction maximal_function(const EigenBasis& basis, Semigroup s, const SampledFunction& f, const TimeGrid& grid);
MaximalFunction maximal_function(const EigenBasis& basis, Semigroup s, const PiecewisePolynomial& f,
                                 const TimeGrid& grid, const QuadratureRule& output);

/// Times <= split (M0) and >= split (Minf).
struct SplitMaximal {
  MaximalFunction m0;
  MaximalFunction minf;
};

SplitMaximal split_maximal(const EigenBasis& basis, Semigroup s, const SampledFunction& f, const TimeGrid& grid);
SplitMaximal split_maximal(const EigenBasis& basis, Semigroup s, const PiecewisePolynomial& f, const TimeGrid& grid,
                           const QuadratureRule& output);

// ---------------------------------------------------------------- Uchiyama

/// r x^{-2nu-1} if r <= x^{2nu+2}, r^{1/(2nu+2)} otherwise.
double uchiyama_time(Order order, double x, double r);
/// Half-line Poisson kernel at time uchiyama_time(x, r); r in (0, mu(I_0**)),
/// x, y in I_0**.
double uchiyama_kernel(Order order, double r, double x, double y);

/// NaturalLocal: P_t (mu kernel) on I_j**, t < mu(I_j**), distance |x-y|.
/// LebesgueLocal: P_t (Lebesgue kernel) on J_j**, t < |J_j**|, distance |x-y|.
/// Reparametrized: K(r,x,y) on I_0**, r < mu(I_0**), distance d_mu.
enum class UchiyamaFamily { NaturalLocal, LebesgueLocal, Reparametrized };

std::string_view uchiyama_family_name(UchiyamaFamily f) noexcept;

struct UchiyamaGrid {
  std::size_t points = 12;   // per space axis, uniform in the distance
  std::size_t scales = 10;   // geometric in (scale_min_fraction, 1) * sigma(X)
  double scale_min_fraction = 1.0 / 128.0;
};

struct UchiyamaReport {
  std::string family;
  int j = 0;
  Interval space;
  double sigma = 0.0;         // sigma(X): upper end of the scale range
  double lower_constant = 0.0;   // max 1 / (r K(r,x,x))
  double size_constant = 0.0;    // max r K(r,x,y) (1 + d/r)^2
  double holder_constant = 0.0;  // max |K(x,y) - K(x,z)| r^2 / d(y,z) * (1 + d(x,y)/r)^2
  double constant = 0.0;         // max of the three
  double min_kernel = 0.0;
  std::size_t holder_pairs = 0;
  std::string grid;
};

/// Empirical constants of the size, lower-bound and Lipschitz conditions with
/// exponents 1 + gamma = 2 and gamma_2 = 1. The Lipschitz condition is only
/// tested where d(y,z) <= (r + d(x,y)) / (4A), A from the first two.
UchiyamaReport check_uchiyama_conditions(const EigenBasis& basis, UchiyamaFamily family, int j,
                                         const UchiyamaGrid& grid = {});

// ---------------------------------------------------------------- Duhamel

struct DuhamelOptions {
  int s_nodes = 24;        // Gauss nodes per s-panel
  int z_nodes = 32;        // Gauss nodes on supp rho'
  int refinement = 0;      // every s-panel split into 2^refinement pieces
  int source_nodes = 24;   // Gauss nodes per panel of f for the half-line term
};

struct DuhamelResult {
  double t = 0.0;
  /// rho T~_t f - T_t (rho f) and the three residual integrals on the output nodes.
  SampledFunction lhs;
  SampledFunction r1;
  SampledFunction r2;
  SampledFunction r3;
  /// sup |lhs - r1 - r2 - r3| over the nodes.
  double closure_error = 0.0;
};

/// f must vanish outside rho's inner interval; 0 < t < 1.
DuhamelResult duhamel_residuals(const EigenBasis& basis, const CutoffRho& rho, const PiecewisePolynomial& f, double t,
                                const QuadratureRule& output, const DuhamelOptions& options = {});
/// Integral kernels R_t^{[j]}(x, y), j = 1, 2, 3.
std::array<double, 3> duhamel_kernels(const EigenBasis& basis, const CutoffRho& rho, double t, double x, double y,
                                      const DuhamelOptions& options = {});

// ---------------------------------------------------------------- Theorem 4.1

/// sup_{t <= 1} |P_t f - P^{(0,1)}_t f| for inputs sampled on one rule over
/// I_0**; the half-line kernel matrix is built once.
class SemigroupComparison {
 public:
  /// `rule` carries mu weights and lies in I_0**.
  SemigroupComparison(const EigenBasis& basis, QuadratureRule rule, const TimeGrid& grid);

  const QuadratureRule& rule() const noexcept { return rule_; }
  /// ||sup_t |difference| ||_{L^1(I_0**, mu)} / ||f||_{L^1(I_0**, mu)}; 0 for f = 0.
  double ratio(std::span<const double> values) const;
  /// sup_t |difference| at the nodes.
  std::vector<double> sup_difference(std::span<const double> values) const;

 private:
  const EigenBasis* basis_;
  QuadratureRule rule_;
  std::vector<double> times_;
  std::vector<double> halfline_;  // [k][i][j] = P_{t_k}(x_i, x_j) w_j
};

double compare_semigroups_theorem41(const EigenBasis& basis, const SampledFunction& f,
                                    const TimeGrid& grid = TimeGrid::geometric());

// ---------------------------------------------------------------- commutators

struct CommutatorValue {
  double value = 0.0;
  /// (j, sup_t |eta_j(x) - eta_j(y)| K_t(x, y)) for every contributing j.
  std::vector<std::pair<int, double>> terms;
  /// Indices with sigma_j below the grid's t_min (left out of the sum).
  std::vector<int> unresolved;
};

/// sum_j sup_{t < sigma_j} |(eta_j(x) - eta_j(y)) K_t(x, y)|, K = P (mu) with
/// sigma_j = mu(I_j**) for the I-family, K = P (Lebesgue) with sigma_j = |J_j**|
/// for the J-family; the sup runs over grid times below sigma_j and sigma_j.
/// Indices with sigma_j < t_min are not resolved by the grid and are skipped.
CommutatorValue commutator_kernel(const EigenBasis& basis, const PartitionOfUnity& partition, double x, double y,
                                  const TimeGrid& grid = TimeGrid::geometric());

struct CommutatorRow {
  double y = 0.0;
  double integral = 0.0;  // int V(x, y) dsigma(x)
  /// Contribution of every j to the integral.
  std::vector<std::pair<int, double>> by_index;
  /// Total weight of nodes where some index was skipped (sigma_j < t_min).
  double unresolved_weight = 0.0;
};

/// int_0^1 V(x, y) dsigma(x) on the nodes of `rule` (weights carry the measure).
CommutatorRow commutator_row_integral(const EigenBasis& basis, const PartitionOfUnity& partition, double y,
                                      const QuadratureRule& rule, const TimeGrid& grid = TimeGrid::geometric());

/// sigma_j of the commutator sup: mu(I_j**) or |J_j**|.
double local_time_cap(const PartitionOfUnity& partition, Order order, int j);

}  // namespace fbh
