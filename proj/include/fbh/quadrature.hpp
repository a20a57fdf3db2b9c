#pragma once

// Gauss-Legendre rules, composite and graded panels, and the measure
// dmu(x) = x^{2nu+1} dx.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fbh/specfun.hpp"

namespace fbh {

/// Nodes and positive weights; weights already include any measure density.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
  double integrate(const std::function<double(double)>& f) const;
  double integrate(std::span<const double> values) const;
  void append(const QuadratureRule& other);
};

enum class Measure { Lebesgue, Mu };
enum class Domain { UnitInterval, HalfLine };

/// n-point Gauss-Legendre rule on [-1, 1] (cached).
const QuadratureRule& gauss_legendre(int n);
/// n-point Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_on(double a, double b, int n);
/// n-point rule for int_0^a x^p g(x) dx, p > -1 (Gauss-Jacobi); the weights
/// include x^p.
QuadratureRule gauss_jacobi_left(double a, double p, int n);
/// Gauss rule with `per_panel` nodes on each [edges[k], edges[k+1]].
QuadratureRule composite(std::span<const double> edges, int per_panel);

/// Panel edges on [lo, hi] refined geometrically towards every point of
/// `focus` (points outside [lo, hi] are ignored): panels adjacent to a focus
/// point have width `finest` and grow by `ratio` away from it.
std::vector<double> graded_edges(double lo, double hi, std::span<const double> focus, double finest, double ratio);

/// Multiplies weights by x^{2nu+1}.
QuadratureRule with_mu_density(QuadratureRule rule, Order order);

/// Default rule on (0,1) or (0,R) with roughly n_nodes nodes. For Measure::Mu
/// the density is folded into the weights and panels are graded towards 0.
QuadratureRule make_quadrature(Domain domain, std::size_t n_nodes, Measure measure, Order order,
                               double halfline_cutoff = 8.0);

class MeasureMu {
 public:
  explicit MeasureMu(Order order) : order_(order) {}
  Order order() const noexcept { return order_; }
  double density(double x) const;
  /// mu((a, b)) for 0 <= a <= b.
  double interval(double a, double b) const;
  /// mu((x - r, x + r) intersected with (0, inf)).
  double ball(double x, double r) const;
  /// s (x + s)^{2nu+1}, comparable to ball(x, s).
  double ball_comparand(double x, double s) const;

 private:
  Order order_;
};

/// |(a,b)| or mu((a,b)).
double measure_of(Measure m, Order order, double a, double b);

}  // namespace fbh
